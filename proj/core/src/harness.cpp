// SPDX-License-Identifier: MIT
#include "singlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include "singlab/constructor.hpp"
#include "singlab/errors.hpp"
#include "singlab/rng.hpp"

namespace singlab::harness {

namespace {

bool same_box(const quad::Box& a, const quad::Box& b) {
  return a.lo == b.lo && a.hi == b.hi;
}

/// Sample mean and standard error of the mean.
void mean_and_se(const std::vector<double>& v, double& mean, double& se) {
  const double m = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= m;
  se = 0.0;
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (m - 1.0) / m);
}

std::string cell_tag(std::uint64_t n, int rep) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "n=%llu rep=%d",
                static_cast<unsigned long long>(n), rep);
  return buf;
}

/// Fit the slope, or flag the table degenerate: either every usable row sits
/// at the measurement floor (quadrature noise / exact representation), or too
/// few rows remain for a regression.
void finalize_table(RateTable& table, double floor_value) {
  bool any_usable = false;
  double max_err = 0.0;
  for (const RateRow& r : table.rows) {
    if (r.reps >= 1) {
      any_usable = true;
      max_err = std::max(max_err, r.mean_sq_err);
    }
  }
  if (any_usable && max_err <= floor_value) {
    table.degenerate = true;
    table.warnings.push_back(
        "all errors at the measurement floor; slope not fitted");
  } else {
    try {
      table.slope = fit_slope(table.rows);
    } catch (const ConfigError& e) {
      table.degenerate = true;
      table.warnings.push_back(std::string("slope not fitted: ") + e.what());
    }
  }
  if (table.degenerate) return;
  const RateRow& first = table.rows.front();
  const RateRow& last = table.rows.back();
  if (first.reps >= 1 && last.reps >= 1 &&
      !(last.mean_sq_err < first.mean_sq_err)) {
    table.monotone = false;
    table.warnings.push_back(
        "error at the largest n is not below the smallest n");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Calculators
// ---------------------------------------------------------------------------

TheoreticalRates theoretical_rates(double alpha, double beta, int D) {
  if (!(alpha >= 1.0) || !(beta >= 1.0) || D < 2) {
    throw ConfigError(
        "theoretical_rates: requires alpha >= 1, beta >= 1, D >= 2");
  }
  TheoreticalRates r;
  const double d = static_cast<double>(D);
  r.dnn = std::min(2.0 * beta / (2.0 * beta + d), alpha / (alpha + d - 1.0));
  r.linear_floor = alpha / (2.0 * alpha + d - 1.0);
  r.wavelet_floor = 0.5;
  r.curvelet_floor = 1.0 / 3.0;
  r.wavelet_floor_active = beta > d / 2.0 && alpha > d - 1.0;
  r.curvelet_floor_active =
      D == 2 && beta > d / 4.0 && alpha > (d - 1.0) / 2.0;
  r.linear_suboptimal = alpha < 2.0 * beta * (d - 1.0) / d;
  return r;
}

double covering_bound(double L, double S, double B, double eps) {
  // S log(2 L B^L (S+1)^L / eps), expanded so huge B^L cannot overflow.
  return S * (std::log(2.0 * L) + L * std::log(B) + L * std::log(S + 1.0) -
              std::log(eps));
}

double packing_rate(double eps, double alpha, double beta, int D) {
  if (!(eps > 0.0) || !(eps <= 1.0)) {
    throw ConfigError("packing_rate: eps must lie in (0, 1]");
  }
  if (!(alpha >= 2.0) || !(beta >= 2.0) || D < 2) {
    throw ConfigError("packing_rate: requires alpha >= 2, beta >= 2, D >= 2");
  }
  const double d = static_cast<double>(D);
  return std::pow(eps, -d / beta) + std::pow(eps, -2.0 * alpha / (d - 1.0));
}

// ---------------------------------------------------------------------------
// Error measurement
// ---------------------------------------------------------------------------

double l2_error(const est::Predictor& pred, const fgen::PiecewiseSmoothFn& f,
                const quad::Box& domain, std::uint64_t points) {
  if (points < (1u << 10)) {
    throw ConfigError("l2_error: needs at least 2^10 QMC points");
  }
  if (!same_box(pred.domain, domain) || !same_box(f.domain, domain)) {
    throw ConfigError(
        "l2_error: predictor, target, and integration domain disagree");
  }
  return quad::qmc_mean(domain, points, [&](std::span<const double> x) {
    const double d = pred.predict(x) - f.eval(x);
    return d * d;
  });
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

SlopeFit fit_slope(const std::vector<RateRow>& rows) {
  SlopeFit out;
  std::vector<double> xs, ys;
  for (const RateRow& r : rows) {
    if (r.reps >= 1 && r.mean_sq_err > 0.0 && r.n > 0) {
      xs.push_back(std::log(static_cast<double>(r.n)));
      ys.push_back(std::log(r.mean_sq_err));
    } else {
      ++out.excluded;
    }
  }
  out.used = static_cast<int>(xs.size());
  if (out.used < 3) {
    throw ConfigError(
        "fit_slope: needs at least 3 rows with positive mean error");
  }
  const double m = static_cast<double>(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= m;
  ybar /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx <= 0.0) {
    throw ConfigError("fit_slope: all rows share the same n");
  }
  out.slope = sxy / sxx;
  out.intercept = ybar - out.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (out.intercept + out.slope * xs[i]);
    rss += r * r;
  }
  out.std_err = std::sqrt(rss / (m - 2.0) / sxx);
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Rate sweeps
// ---------------------------------------------------------------------------

namespace {

struct CellResult {
  bool ok = false;
  double err = 0.0;
  std::string what;
};

/// Hidden width so the dense parameter count of a depth-4 ReLU net tracks
/// the sparsity budget scale * (M n^{D/(2b+D)} + n^{(D-1)/(a+D-1)}) log2^2 n.
int dnn_width_for(const SweepConfig& cfg, const fgen::PiecewiseSmoothFn& f,
                  std::uint64_t n) {
  const double d = static_cast<double>(f.domain.dim());
  const double a = f.alpha, b = f.beta;
  const double M = std::max(1, f.pieces.M());
  const double nn = static_cast<double>(n);
  const double lg = std::log2(std::max(2.0, nn));
  const double budget = cfg.dnn_budget_scale *
                        (M * std::pow(nn, d / (2.0 * b + d)) +
                         std::pow(nn, (d - 1.0) / (a + d - 1.0))) *
                        lg * lg;
  // Three hidden layers of width W cost about 2 W^2 dense parameters.
  const int w = static_cast<int>(std::lround(std::sqrt(budget / 2.0)));
  return std::clamp(w, cfg.dnn_min_width, cfg.dnn_max_width);
}

std::uint64_t default_l2_points(const SweepConfig& cfg,
                                const fgen::PiecewiseSmoothFn& f) {
  if (cfg.l2_points != 0) return cfg.l2_points;
  if (cfg.kind == est::PredictorKind::Curvelet) return 1u << 13;
  return f.pieces.M() > 1 ? (1u << 17) : (1u << 16);
}

/// Fit once with an explicit truncation (wavelet/curvelet).
est::Predictor fit_series(const SweepConfig& cfg, const fgen::Dataset& ds,
                          int tau) {
  est::FitConfig fc = cfg.fit;
  if (cfg.kind == est::PredictorKind::Wavelet) {
    fc.wavelet.tau = tau;
    return est::fit_wavelet(ds, fc);
  }
  fc.curvelet.tau = tau;
  return est::fit_curvelet(ds, fc);
}

/// Kernel-ridge with (bandwidth, lambda) tuned against the true target on a
/// subsample, then refit at full n with the winner.
est::Predictor fit_krr_tuned(const SweepConfig& cfg,
                             const fgen::PiecewiseSmoothFn& target,
                             const fgen::Dataset& ds) {
  if (!cfg.auto_policy) return est::fit_kernel_ridge(ds, cfg.fit);
  fgen::Dataset sub = ds;
  const std::size_t m = std::min(ds.n(), cfg.tune_subsample);
  sub.X.assign(ds.X.begin(),
               ds.X.begin() + static_cast<std::ptrdiff_t>(
                                  m * static_cast<std::size_t>(ds.D)));
  sub.Y.assign(ds.Y.begin(), ds.Y.begin() + static_cast<std::ptrdiff_t>(m));
  est::FitConfig best = cfg.fit;
  double best_err = std::numeric_limits<double>::infinity();
  std::string last_err = "no tuning grid";
  for (double bw : cfg.bandwidth_grid) {
    for (double lam : cfg.lambda_grid) {
      est::FitConfig fc = cfg.fit;
      fc.kernel.bandwidth = bw;
      fc.kernel.lambda = lam;
      try {
        const est::Predictor p = est::fit_kernel_ridge(sub, fc);
        const double e = l2_error(p, target, target.domain, cfg.tune_points);
        if (e < best_err) {
          best_err = e;
          best = fc;
        }
      } catch (const std::exception& e) {
        last_err = e.what();
      }
    }
  }
  if (!std::isfinite(best_err)) {
    throw ConfigError("kernel-ridge tuning failed everywhere; last error: " +
                      last_err);
  }
  return est::fit_kernel_ridge(ds, best);
}

}  // namespace

RateTable rate_sweep(const SweepConfig& cfg,
                     const fgen::PiecewiseSmoothFn& target,
                     const std::vector<std::uint64_t>& ns, int reps,
                     double sigma, std::uint64_t master_seed) {
  if (ns.empty()) throw ConfigError("rate_sweep: empty n grid");
  for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
    if (ns[i] >= ns[i + 1]) {
      throw ConfigError("rate_sweep: n grid must be strictly increasing");
    }
  }
  if (ns.front() == 0) throw ConfigError("rate_sweep: n must be positive");
  if (reps < 1) throw ConfigError("rate_sweep: reps must be >= 1");
  if (sigma < 0.0) throw ConfigError("rate_sweep: sigma must be >= 0");

  RateTable table;
  table.estimator = est::kind_name(cfg.kind);
  table.target = target.name;
  table.alpha = target.alpha;
  table.beta = target.beta;
  table.D = target.domain.dim();
  try {
    table.rates = theoretical_rates(target.alpha, target.beta, table.D);
    switch (cfg.kind) {
      case est::PredictorKind::Dnn:
        table.theoretical_exponent = table.rates.dnn;
        table.exponent_source = "min(2b/(2b+D), a/(a+D-1))";
        break;
      case est::PredictorKind::KernelRidge:
        table.theoretical_exponent = table.rates.linear_floor;
        table.exponent_source = "a/(2a+D-1) linear floor";
        break;
      case est::PredictorKind::Wavelet:
        table.theoretical_exponent = table.rates.wavelet_floor;
        table.exponent_source = table.rates.wavelet_floor_active
                                    ? "1/2 series floor"
                                    : "1/2 series floor (regime inactive)";
        break;
      case est::PredictorKind::Curvelet:
        table.theoretical_exponent = table.rates.curvelet_floor;
        table.exponent_source = table.rates.curvelet_floor_active
                                    ? "1/3 frame floor"
                                    : "1/3 frame floor (regime inactive)";
        break;
    }
  } catch (const ConfigError& e) {
    table.warnings.push_back(std::string("theoretical rates unavailable: ") +
                             e.what());
  }

  const std::uint64_t l2pts = default_l2_points(cfg, target);
  const bool series = cfg.kind == est::PredictorKind::Wavelet ||
                      cfg.kind == est::PredictorKind::Curvelet;

  // Truncation tuning per n, on a held-out replicate (index `reps`) so the
  // measured replicates stay untouched. Scored against the true target.
  std::vector<int> tuned_tau(ns.size(), cfg.fit.wavelet.tau);
  if (series) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
      tuned_tau[i] = cfg.kind == est::PredictorKind::Wavelet
                         ? cfg.fit.wavelet.tau
                         : cfg.fit.curvelet.tau;
      if (!cfg.auto_policy) continue;
      const fgen::Dataset tune = fgen::gen_dataset(
          target, ns[i], sigma, rng::derive_seed(master_seed, ns[i], reps));
      double best = std::numeric_limits<double>::infinity();
      std::string last_err;
      for (int tau : cfg.tau_grid) {
        try {
          const est::Predictor p = fit_series(cfg, tune, tau);
          const double e = l2_error(p, target, target.domain, cfg.tune_points);
          if (e < best) {
            best = e;
            tuned_tau[i] = tau;
          }
        } catch (const std::exception& e) {
          last_err = e.what();
        }
      }
      if (!std::isfinite(best)) {
        table.warnings.push_back("truncation tuning failed at " +
                                 cell_tag(ns[i], reps) + ": " + last_err);
      }
    }
  }

  // Independent cells, any execution order.
  const std::size_t total = ns.size() * static_cast<std::size_t>(reps);
  std::vector<CellResult> cells(total);
  auto run_cell = [&](std::size_t ni, int rep) {
    CellResult out;
    const std::uint64_t n = ns[ni];
    const std::uint64_t seed =
        rng::derive_seed(master_seed, n, static_cast<std::uint64_t>(rep));
    try {
      const fgen::Dataset ds = fgen::gen_dataset(target, n, sigma, seed);
      est::Predictor pred;
      switch (cfg.kind) {
        case est::PredictorKind::Dnn: {
          est::FitConfig fc = cfg.fit;
          if (cfg.auto_policy) {
            const int w = dnn_width_for(cfg, target, n);
            fc.dnn.widths = {w, w, w};
          }
          pred = est::fit_dnn_erm(ds, fc, seed);
          break;
        }
        case est::PredictorKind::KernelRidge:
          pred = fit_krr_tuned(cfg, target, ds);
          break;
        case est::PredictorKind::Wavelet:
        case est::PredictorKind::Curvelet:
          pred = fit_series(cfg, ds, tuned_tau[ni]);
          break;
      }
      out.err = l2_error(pred, target, target.domain, l2pts);
      out.ok = true;
    } catch (const std::exception& e) {
      out.what = e.what();
    }
    return out;
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) {
      cells[i] = run_cell(i / static_cast<std::size_t>(reps),
                          static_cast<int>(i % static_cast<std::size_t>(reps)));
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= total) return;
        cells[i] =
            run_cell(i / static_cast<std::size_t>(reps),
                     static_cast<int>(i % static_cast<std::size_t>(reps)));
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }

  // Deterministic aggregation in (n, rep) order.
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    RateRow row;
    row.n = ns[ni];
    std::vector<double> errs;
    for (int rep = 0; rep < reps; ++rep) {
      const CellResult& c =
          cells[ni * static_cast<std::size_t>(reps) +
                static_cast<std::size_t>(rep)];
      if (c.ok) {
        errs.push_back(c.err);
      } else {
        ++row.failed;
        table.warnings.push_back("cell " + cell_tag(row.n, rep) +
                                 " failed: " + c.what);
      }
    }
    row.reps = static_cast<int>(errs.size());
    if (!errs.empty()) mean_and_se(errs, row.mean_sq_err, row.std_err);
    table.rows.push_back(row);
  }

  finalize_table(table, 1e-10);  // squared-error floor
  return table;
}

// ---------------------------------------------------------------------------
// Approximation sweeps
// ---------------------------------------------------------------------------

RateTable approx_sweep(const ApproxSweepConfig& cfg,
                       const fgen::PiecewiseSmoothFn& target,
                       const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw ConfigError("approx_sweep: empty epsilon grid");
  for (std::size_t i = 0; i + 1 < eps_grid.size(); ++i) {
    if (eps_grid[i] <= eps_grid[i + 1]) {
      throw ConfigError(
          "approx_sweep: epsilon grid must be strictly decreasing");
    }
  }
  if (eps_grid.back() <= 0.0) {
    throw ConfigError("approx_sweep: epsilons must be positive");
  }

  RateTable table;
  table.estimator = "construct:" + cfg.builder;
  table.target = target.name;
  table.alpha = target.alpha;
  table.beta = target.beta;
  table.D = target.domain.dim();
  const double d = static_cast<double>(table.D);
  try {
    table.rates = theoretical_rates(target.alpha, target.beta, table.D);
  } catch (const ConfigError& e) {
    table.warnings.push_back(std::string("theoretical rates unavailable: ") +
                             e.what());
  }
  if (cfg.builder == "smooth") {
    table.theoretical_exponent = target.beta / d;
    table.exponent_source = "b/D approximation exponent";
  } else if (cfg.builder == "indicator") {
    table.theoretical_exponent = target.alpha / (2.0 * (d - 1.0));
    table.exponent_source = "a/(2(D-1)) approximation exponent";
  } else if (cfg.builder == "piecewise") {
    table.theoretical_exponent =
        std::min(target.beta / d, target.alpha / (2.0 * (d - 1.0)));
    table.exponent_source = "min(b/D, a/(2(D-1)))";
  } else {
    throw ConfigError("approx_sweep: unknown builder '" + cfg.builder + "'");
  }
  if (cfg.builder != "smooth" && target.pieces.M() < 1) {
    throw ConfigError("approx_sweep: target has no piece geometry");
  }
  if (target.fs.empty()) {
    throw ConfigError("approx_sweep: target has no piece functions");
  }

  for (double eps : eps_grid) {
    Network net;
    std::function<double(std::span<const double>)> truth;
    if (cfg.builder == "smooth") {
      const fgen::HolderFn& f0 = target.fs.front();
      net = ctor::smooth_net(f0, target.beta, eps, target.domain, cfg.act).net;
      truth = [&f0](std::span<const double> x) { return f0.eval(x); };
    } else if (cfg.builder == "indicator") {
      net = ctor::piece_indicator_net(target.pieces, 0, eps, cfg.act);
      truth = [&target](std::span<const double> x) {
        return target.pieces.piece_of(x) == 0 ? 1.0 : 0.0;
      };
    } else {
      net = ctor::piecewise_smooth_net(target, eps, eps, cfg.act).net;
      truth = [&target](std::span<const double> x) { return target.eval(x); };
    }
    Evaluator ev(net);
    const double mse =
        quad::qmc_mean(target.domain, cfg.points, [&](std::span<const double> x) {
          const double diff = ev.eval1(x) - truth(x);
          return diff * diff;
        });
    RateRow row;
    row.n = static_cast<std::uint64_t>(std::max<long long>(1, net.metrics().S));
    row.reps = 1;
    row.mean_sq_err = std::sqrt(mse);  // approximation sweeps store the
                                       // unsquared L2 error (see header)
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const RateRow& a, const RateRow& b) { return a.n < b.n; });

  finalize_table(table, 1e-7);  // unsquared-error floor
  return table;
}

}  // namespace singlab::harness
