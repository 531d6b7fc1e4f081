// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"
#include "singlab/rng.hpp"

namespace singlab::est {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Params {
  std::vector<MatrixXd> W;  // out x in
  std::vector<VectorXd> b;

  void zero_like(const Params& o) {
    W.clear();
    b.clear();
    for (std::size_t l = 0; l < o.W.size(); ++l) {
      W.push_back(MatrixXd::Zero(o.W[l].rows(), o.W[l].cols()));
      b.push_back(VectorXd::Zero(o.b[l].size()));
    }
  }

  std::vector<double> flat() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < W.size(); ++l) {
      out.insert(out.end(), W[l].data(), W[l].data() + W[l].size());
      out.insert(out.end(), b[l].data(), b[l].data() + b[l].size());
    }
    return out;
  }
};

/// One restart's optimizer state: current parameters, momentum buffers,
/// the best iterate seen, and the per-step best-loss history.
struct TrainState {
  Params p, v, best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_hist;
  long long steps = 0;
};

void apply_act(const Activation& act, const MatrixXd& z, MatrixXd& a) {
  if (act.piecewise_linear()) {
    a = act.c1 * z.cwiseMax(0.0) + act.c2 * z.cwiseMin(0.0);
  } else {
    a = z.unaryExpr([&act](double t) { return act(t); });
  }
}

void apply_act_deriv(const Activation& act, const MatrixXd& z, MatrixXd& g) {
  if (act.piecewise_linear()) {
    g = (z.array() >= 0.0).select(act.c1, MatrixXd::Constant(z.rows(),
                                                             z.cols(),
                                                             act.c2));
  } else {
    g = z.unaryExpr([&act](double t) { return act.deriv(1, t); });
  }
}

class Trainer {
 public:
  Trainer(const fgen::Dataset& data, const DnnConfig& cfg)
      : cfg_(cfg),
        n_(static_cast<Index>(data.n())),
        X_(Eigen::Map<const MatrixXd>(data.X.data(), static_cast<Index>(data.D),
                                      n_)
               .transpose()),
        Y_(Eigen::Map<const VectorXd>(data.Y.data(), n_)) {
    dims_.push_back(static_cast<Index>(data.D));
    for (int w : cfg.widths) {
      if (w < 1) throw ConfigError("dnn: hidden widths must be positive");
      dims_.push_back(w);
    }
    dims_.push_back(1);
    const std::size_t L = dims_.size() - 1;
    Z_.resize(L);
    A_.resize(L);
    D_.resize(L);
  }

  Params init(std::uint64_t seed, int restart) const {
    rng::Counter g(rng::derive_seed(seed, static_cast<std::uint64_t>(restart)),
                   "dnn-init");
    const std::size_t L = dims_.size() - 1;
    Params p;
    const double ymean = Y_.mean();
    for (std::size_t l = 0; l < L; ++l) {
      const Index fan_in = dims_[l], fan_out = dims_[l + 1];
      const bool last = l + 1 == L;
      double scale = cfg_.act.piecewise_linear()
                         ? std::sqrt(2.0 / static_cast<double>(fan_in))
                         : std::sqrt(1.0 / static_cast<double>(fan_in));
      // The final affine map starts at zero weights with the sample-mean
      // bias, so training begins exactly at the best constant predictor.
      if (last) scale = 0.0;
      MatrixXd W(fan_out, fan_in);
      for (Index r = 0; r < fan_out; ++r) {
        for (Index c = 0; c < fan_in; ++c) W(r, c) = scale * g.next_normal();
      }
      VectorXd b = VectorXd::Zero(fan_out);
      if (l == 0 && !last) {
        // Spread first-layer breakpoints across the input range.
        for (Index r = 0; r < fan_out; ++r) b(r) = g.next_uniform(-0.5, 0.5);
      }
      if (last) b(0) = ymean;  // start from the sample mean
      p.W.push_back(std::move(W));
      p.b.push_back(std::move(b));
    }
    return p;
  }

  /// Forward pass; fills the layer caches and returns the training MSE.
  double loss_and_cache(const Params& p) {
    const std::size_t L = dims_.size() - 1;
    const MatrixXd* in = &X_;
    for (std::size_t l = 0; l < L; ++l) {
      Z_[l].noalias() = (*in) * p.W[l].transpose();
      Z_[l].rowwise() += p.b[l].transpose();
      if (l + 1 < L) {
        apply_act(cfg_.act, Z_[l], A_[l]);
        in = &A_[l];
      }
    }
    resid_ = Z_[L - 1].col(0) - Y_;
    return resid_.squaredNorm() / static_cast<double>(n_);
  }

  /// Backward pass from the cached forward; fills grad.
  void gradients(const Params& p, Params& grad) {
    const std::size_t L = dims_.size() - 1;
    MatrixXd dZ = (2.0 / static_cast<double>(n_)) * resid_;
    for (std::size_t l = L; l-- > 0;) {
      const MatrixXd& input = l == 0 ? X_ : A_[l - 1];
      grad.W[l].noalias() = dZ.transpose() * input;
      grad.b[l] = dZ.colwise().sum().transpose();
      if (l > 0) {
        D_[l - 1].noalias() = dZ * p.W[l];
        apply_act_deriv(cfg_.act, Z_[l - 1], dZ);
        dZ.array() *= D_[l - 1].array();
      }
    }
  }

  /// Runs steps [from, to) of the global schedule on one restart state.
  /// Early stopping (trailing-window gap below gap_target) is enabled only
  /// when `allow_stop` is set, and only past half of the total budget.
  void run(TrainState& st, long long from, long long to, bool allow_stop) {
    Params grad;
    grad.zero_like(st.p);
    const long long total = cfg_.iters;
    const long long window = std::max<long long>(
        1, static_cast<long long>(std::ceil(0.05 * total)));
    for (long long t = from; t < to; ++t) {
      const double loss = loss_and_cache(st.p);
      if (!std::isfinite(loss)) {
        throw DivergenceError(
            "dnn training diverged: non-finite loss at iteration " +
                std::to_string(t),
            st.best.flat());
      }
      if (loss < st.best_loss) {
        st.best_loss = loss;
        st.best = st.p;
      }
      st.best_hist.push_back(st.best_loss);
      st.steps = t + 1;
      if (allow_stop && t >= total / 2 && t % window == 0 &&
          st.best_hist.size() > static_cast<std::size_t>(window)) {
        const double before =
            st.best_hist[st.best_hist.size() - 1 -
                         static_cast<std::size_t>(window)];
        if (before - st.best_loss < cfg_.gap_target) return;
      }
      gradients(st.p, grad);
      const double lr = cfg_.learning_rate * schedule(t, total);
      for (std::size_t l = 0; l < st.p.W.size(); ++l) {
        st.v.W[l] = cfg_.momentum * st.v.W[l] - lr * grad.W[l];
        st.v.b[l] = cfg_.momentum * st.v.b[l] - lr * grad.b[l];
        st.p.W[l] += st.v.W[l];
        st.p.b[l] += st.v.b[l];
      }
    }
  }

  /// Final chance for the last iterate, outside the step loop.
  void settle(TrainState& st) {
    const double loss = loss_and_cache(st.p);
    if (std::isfinite(loss) && loss < st.best_loss) {
      st.best_loss = loss;
      st.best = st.p;
    }
    st.best_hist.push_back(st.best_loss);
  }

  static double schedule(long long t, long long total) {
    const double f = static_cast<double>(t) / static_cast<double>(total);
    if (f < 0.6) return 1.0;
    if (f < 0.85) return 0.3;
    return 0.09;
  }

 private:
  const DnnConfig& cfg_;
  Index n_;
  MatrixXd X_;
  VectorXd Y_;
  std::vector<Index> dims_;
  std::vector<MatrixXd> Z_, A_, D_;
  VectorXd resid_;
};

Network to_network(const Params& p, const Activation& act, double clip) {
  Network net;
  net.act = act;
  if (clip > 0.0) net.clip = clip;
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const auto out = static_cast<int>(p.W[l].rows());
    const auto in = static_cast<int>(p.W[l].cols());
    std::vector<double> row_major(static_cast<std::size_t>(out) *
                                  static_cast<std::size_t>(in));
    for (Index r = 0; r < p.W[l].rows(); ++r) {
      for (Index c = 0; c < p.W[l].cols(); ++c) {
        row_major[static_cast<std::size_t>(r) * static_cast<std::size_t>(in) +
                  static_cast<std::size_t>(c)] = p.W[l](r, c);
      }
    }
    std::vector<double> bias(p.b[l].data(), p.b[l].data() + p.b[l].size());
    net.layers.push_back(Layer::dense(out, in, row_major, std::move(bias)));
  }
  net.check();
  return net;
}

}  // namespace

Predictor fit_dnn_erm(const fgen::Dataset& data, const FitConfig& cfg,
                      std::uint64_t seed) {
  const DnnConfig& dc = cfg.dnn;
  if (data.n() == 0) throw ConfigError("dnn: empty dataset");
  if (dc.iters < 1) throw ConfigError("dnn: iteration budget must be positive");
  if (dc.restarts < 1) throw ConfigError("dnn: need at least one restart");
  if (dc.learning_rate <= 0.0) {
    throw ConfigError("dnn: learning rate must be positive");
  }

  Trainer trainer(data, dc);
  const long long explore = std::clamp<long long>(
      static_cast<long long>(std::ceil(dc.explore_fraction *
                                       static_cast<double>(dc.iters))),
      1, dc.iters);

  // Tournament phase: every restart runs the same opening schedule.
  std::vector<TrainState> states(static_cast<std::size_t>(dc.restarts));
  for (int r = 0; r < dc.restarts; ++r) {
    TrainState& st = states[static_cast<std::size_t>(r)];
    st.p = trainer.init(seed, r);
    st.v.zero_like(st.p);
    st.best.zero_like(st.p);
    trainer.run(st, 0, explore, false);
  }
  std::size_t win = 0;
  for (std::size_t r = 1; r < states.size(); ++r) {
    if (states[r].best_loss < states[win].best_loss) win = r;
  }

  // Finish phase: the tournament winner trains to the full budget.
  TrainState st = std::move(states[win]);
  trainer.run(st, explore, dc.iters, true);
  trainer.settle(st);

  Predictor p;
  p.kind = PredictorKind::Dnn;
  p.domain = data.domain;
  p.net = to_network(st.best, dc.act, dc.clip);
  p.meta.final_loss = st.best_loss;
  p.meta.iterations = st.steps;
  p.meta.seed = seed;
  p.meta.restarts = dc.restarts;
  p.meta.net = p.net.metrics();

  const auto window = static_cast<std::size_t>(std::max<long long>(
      1, static_cast<long long>(std::ceil(0.05 * dc.iters))));
  const std::size_t hist = st.best_hist.size();
  p.meta.gap = hist > window
                   ? st.best_hist[hist - 1 - window] - st.best_hist[hist - 1]
                   : st.best_hist.front() - st.best_hist.back();

  const std::size_t stride = std::max<std::size_t>(1, hist / 100);
  for (std::size_t i = 0; i < hist; i += stride) {
    p.meta.checkpoints.push_back(st.best_hist[i]);
  }
  if (p.meta.checkpoints.empty() ||
      p.meta.checkpoints.back() != st.best_hist.back()) {
    p.meta.checkpoints.push_back(st.best_hist.back());
  }
  return p;
}

}  // namespace singlab::est
