// SPDX-License-Identifier: MIT
//
// Unit network constructions: tent maps, sawtooth compositions, squarers,
// products, monomials, and step approximators. Every builder is a pure
// function of its parameters; rebuilding yields bit-identical networks.
#include "singlab/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "singlab/errors.hpp"

namespace singlab::ctor {

namespace {

void require_piecewise(const Activation& act, const char* what) {
  if (!act.piecewise_linear())
    throw UnsupportedConstruction(
        std::string(what) + ": needs a piecewise-linear activation");
}

struct TeethCoef {
  double A, B, C;
};

/// Coefficients making A*eta(x) + B*eta(x - 1/2) + C the exact tent map on
/// [0,1] for eta(x) = c1 x (x >= 0), c2 x (x < 0).
TeethCoef teeth_coef(const Activation& act) {
  const double c1 = act.c1, c2 = act.c2;
  return {2.0 * (c1 + c2) / (c1 * (c1 - c2)), -4.0 / (c1 - c2),
          -2.0 * c2 / (c1 - c2)};
}

/// The squarer carry step: from activations of (u_t, s_t, s_t - 1/2),
/// produce pre-activations of (u_{t+1}, s_{t+1}, s_{t+1} - 1/2) where
/// s_{t+1} = tent(s_t) and u_{t+1} = u_t - s_{t+1}/4^{t+1}. u_t >= x^2 >= 0
/// throughout, so eta(u_t)/c1 recovers u_t exactly.
Layer square_carry_layer(const Activation& act, int t, bool last) {
  const auto [A, B, C] = teeth_coef(act);
  const double p = std::ldexp(1.0, -2 * (t + 1));  // 4^{-(t+1)}
  const double r = 1.0 / act.c1;
  if (last)
    return Layer::from_triplets(
        1, 3, {{0, 0, r}, {0, 1, -A * p}, {0, 2, -B * p}}, {-C * p});
  return Layer::from_triplets(3, 3,
                              {{0, 0, r},
                               {0, 1, -A * p},
                               {0, 2, -B * p},
                               {1, 1, A},
                               {1, 2, B},
                               {2, 1, A},
                               {2, 2, B}},
                              {-C * p, C, C - 0.5});
}

/// Block-diagonal stack of three independent copies of a 3->3 (or 3->1)
/// carry layer, one per squarer chain of the product construction.
Layer triple_block(const Layer& one) {
  std::vector<Layer::Triplet> tr;
  std::vector<double> bias;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < one.out; ++r) {
      for (int idx = one.row_ptr[r]; idx < one.row_ptr[r + 1]; ++idx)
        tr.push_back({c * one.out + r, c * 3 + one.col[idx], one.val[idx]});
      bias.push_back(one.bias[r]);
    }
  }
  return Layer::from_triplets(3 * one.out, 9, std::move(tr), std::move(bias));
}

void check_m(int m) {
  if (m < 1 || m > 40)
    throw ConfigError("product precision m must be in [1, 40]");
}

}  // namespace

Network teeth_net(const Activation& act) {
  require_piecewise(act, "teeth_net");
  const auto [A, B, C] = teeth_coef(act);
  Network net;
  net.act = act;
  net.layers.push_back(
      Layer::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}}, {0.0, -0.5}));
  net.layers.push_back(
      Layer::from_triplets(1, 2, {{0, 0, A}, {0, 1, B}}, {C}));
  net.check();
  return net;
}

Network sawtooth_net(int t, const Activation& act) {
  if (t < 1 || t > 40) throw ConfigError("sawtooth order t must be in [1, 40]");
  const Network tent = teeth_net(act);
  Network net = tent;
  for (int i = 1; i < t; ++i) net = compose(tent, net);
  return net;
}

Network square_net(int m, const Activation& act) {
  require_piecewise(act, "square_net");
  check_m(m);
  Network net;
  net.act = act;
  // (u_0, s_0, s_0 - 1/2) = (x, x, x - 1/2)
  net.layers.push_back(Layer::from_triplets(
      3, 1, {{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}}, {0.0, 0.0, -0.5}));
  for (int t = 0; t < m; ++t)
    net.layers.push_back(square_carry_layer(act, t, t + 1 == m));
  net.layers.push_back(
      Layer::from_triplets(1, 1, {{0, 0, 1.0 / act.c1}}, {0.0}));
  net.check();
  return net;
}

Network mult_net_scaled(int m, double Tv, double Tw, const Activation& act) {
  require_piecewise(act, "mult_net");
  check_m(m);
  if (Tv <= 0.0 || Tw <= 0.0)
    throw ConfigError("mult_net: input ranges must be positive");
  const int mi = m + 1;  // internal squarer precision
  const double c1 = act.c1, c2 = act.c2;

  Network net;
  net.act = act;
  // Layer 1: +-(v/Tv + w/Tw), +-(v/Tv), +-(w/Tw).
  net.layers.push_back(Layer::from_triplets(6, 2,
                                            {{0, 0, 1.0 / Tv},
                                             {0, 1, 1.0 / Tw},
                                             {1, 0, -1.0 / Tv},
                                             {1, 1, -1.0 / Tw},
                                             {2, 0, 1.0 / Tv},
                                             {3, 0, -1.0 / Tv},
                                             {4, 1, 1.0 / Tw},
                                             {5, 1, -1.0 / Tw}},
                                            std::vector<double>(6, 0.0)));
  // Layer 2: per chain i, |z_i|/2 = (eta(z_i) + eta(-z_i)) / (2 (c1 - c2))
  // replicated into the squarer header (u_0, s_0, s_0 - 1/2).
  {
    std::vector<Layer::Triplet> tr;
    std::vector<double> bias;
    const double s = 1.0 / (2.0 * (c1 - c2));
    for (int chain = 0; chain < 3; ++chain) {
      for (int r = 0; r < 3; ++r) {
        tr.push_back({chain * 3 + r, chain * 2, s});
        tr.push_back({chain * 3 + r, chain * 2 + 1, s});
        bias.push_back(r == 2 ? -0.5 : 0.0);
      }
    }
    net.layers.push_back(Layer::from_triplets(9, 6, std::move(tr), bias));
  }
  for (int t = 0; t < mi; ++t)
    net.layers.push_back(triple_block(square_carry_layer(act, t, t + 1 == mi)));
  // vw = Tv Tw (q(z0) - q(z1) - q(z2))/2 with q(z) = 4 * squarer(|z|/2).
  const double w = 2.0 * Tv * Tw / c1;
  net.layers.push_back(Layer::from_triplets(
      1, 3, {{0, 0, w}, {0, 1, -w}, {0, 2, -w}}, {0.0}));
  net.check();
  return net;
}

Network mult_net(int m, double T, const Activation& act) {
  return mult_net_scaled(m, T, T, act);
}

Network multi_mult_net(int m, double T, int Dp, const Activation& act) {
  require_piecewise(act, "multi_mult_net");
  check_m(m);
  if (Dp < 2) throw ConfigError("multi_mult_net: need at least two inputs");
  if (T <= 0.0) throw ConfigError("multi_mult_net: T must be positive");
  if (Dp == 2) return mult_net(m, T, act);

  // Nest unit-scale products of the normalized inputs x_d / T, then scale by
  // T^Dp at the end. The per-stage precision absorbs the T^{Dp-2} blow-up of
  // that final scaling and the (Dp-1)-stage error accumulation; the 1.125
  // working range covers intermediate values |P_k| <= 1 + stage error.
  const double t0 = 1.125;
  const int bump_t = static_cast<int>(
      std::ceil(std::max(0.0, (Dp - 2) * std::log2(T)) / 2.0));
  const int bump_d = static_cast<int>(std::ceil(std::log2(Dp - 1) / 2.0));
  const int mi = m + 1 + bump_t + bump_d;
  const Network unit = mult_net_scaled(mi, t0, t0, act);

  // P_2 = unit(x_1/T, x_2/T) as a network on all Dp inputs.
  Network chain = precompose_affine(
      unit, Layer::from_triplets(
                2, Dp, {{0, 0, 1.0 / T}, {1, 1, 1.0 / T}}, {0.0, 0.0}));
  for (int d = 2; d < Dp; ++d) {
    Network select;
    select.act = act;
    select.layers.push_back(
        Layer::from_triplets(1, Dp, {{0, d, 1.0 / T}}, {0.0}));
    chain = compose(unit, parallel({chain, select}));
  }
  return affine_output(chain, {std::pow(T, Dp)}, 0.0);
}

Network monomial_net(int gamma, double eps, double T, const Activation& act) {
  if (gamma < 0) throw ConfigError("monomial_net: gamma must be >= 0");
  if (eps <= 0.0 || eps >= 1.0)
    throw ConfigError("monomial_net: eps must lie in (0,1)");
  if (T <= 0.0) throw ConfigError("monomial_net: T must be positive");

  if (gamma == 0) return constant_net(act, 1.0, 1);

  if (act.piecewise_linear()) {
    if (gamma == 1) return identity_net(act, 2);
    const double need = gamma * T * T / eps;
    const int m = std::max(1, static_cast<int>(std::ceil(
                                  0.5 * std::log2(std::max(need, 1.0)))));
    std::vector<Layer::Triplet> rep;
    for (int d = 0; d < gamma; ++d) rep.push_back({d, 0, 1.0});
    return precompose_affine(
        multi_mult_net(m, T, gamma, act),
        Layer::from_triplets(gamma, 1, std::move(rep),
                             std::vector<double>(gamma, 0.0)));
  }

  // Smooth path: scaled gamma-th finite difference of the activation around
  // an anchor x' where the first gamma derivatives are all well away from
  // zero. Needs the analytic derivative of order gamma+1.
  if (gamma + 1 > act.deriv_budget)
    throw ConfigError("monomial_net: gamma exceeds the derivative budget");
  double best_x = 0.0, best_score = -1.0;
  for (int i = -60; i <= 60; ++i) {
    const double x = 0.05 * i;
    double score = std::abs(act.deriv(1, x));
    for (int j = 2; j <= gamma; ++j)
      score = std::min(score, std::abs(act.deriv(j, x)));
    if (score > best_score) {
      best_score = score;
      best_x = x;
    }
  }
  const double dg = act.deriv(gamma, best_x);
  // Sampled sup of the next derivative (smooth units decay in the tails),
  // inflated 2x to stay conservative.
  double sup_next = 0.0;
  for (int i = -1200; i <= 1200; ++i)
    sup_next = std::max(sup_next, std::abs(act.deriv(gamma + 1, 0.01 * i)));
  sup_next *= 2.0;

  const double C = gamma * std::pow(T, gamma + 1) * sup_next / std::abs(dg);
  const double abar = 2.0 * C / eps;

  std::vector<Layer::Triplet> l1;
  std::vector<double> b1;
  std::vector<Layer::Triplet> l2;
  double binom = 1.0;  // C(gamma, j)
  const double scale = std::pow(abar, gamma) / dg;
  for (int j = 0; j <= gamma; ++j) {
    l1.push_back({j, 0, j / abar});
    b1.push_back(best_x);
    const double sign = ((gamma - j) % 2 == 0) ? 1.0 : -1.0;
    l2.push_back({0, j, sign * binom * scale});
    binom = binom * (gamma - j) / (j + 1);
  }
  Network net;
  net.act = act;
  net.layers.push_back(
      Layer::from_triplets(gamma + 1, 1, std::move(l1), std::move(b1)));
  net.layers.push_back(Layer::from_triplets(1, gamma + 1, std::move(l2),
                                            {0.0}));
  net.check();
  return net;
}

StepNetInfo step_net(double eps, double T, const Activation& act) {
  if (eps <= 0.0 || eps >= 1.0)
    throw ConfigError("step_net: eps must lie in (0,1)");
  if (T <= 0.0) throw ConfigError("step_net: T must be positive");

  StepNetInfo info;
  if (act.piecewise_linear()) {
    const double c1 = act.c1, c2 = act.c2;
    info.kappa = c1 - c2 * c2 / c1;
    info.delta = 1.0 / info.kappa;
    // The ramp spans [-delta/(2a^2), delta/(2a^2)], so its exact L2 error
    // is delta^{1/2} / (12^{1/2} a); a is chosen to make that 0.995 eps.
    info.claimed = 0.995 * eps;
    info.a = std::sqrt(info.delta / 12.0) / info.claimed;
    info.closed_form = step_ramp_l2(info.a, info.delta);
    const double hw = info.delta / (2.0 * info.a * info.a);
    const double g = 1.0 / (2.0 * hw * info.kappa);

    Network net;
    net.act = act;
    if (c2 == 0.0) {
      net.layers.push_back(
          Layer::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}}, {hw, -hw}));
      net.layers.push_back(
          Layer::from_triplets(1, 2, {{0, 0, g}, {0, 1, -g}}, {0.0}));
    } else {
      const double q = -c2 / c1;
      net.layers.push_back(Layer::from_triplets(
          4, 1, {{0, 0, 1.0}, {1, 0, q}, {2, 0, 1.0}, {3, 0, q}},
          {hw, q * hw, -hw, -q * hw}));
      net.layers.push_back(Layer::from_triplets(
          1, 4, {{0, 0, g}, {0, 1, g}, {0, 2, -g}, {0, 3, -g}}, {0.0}));
    }
    net.check();
    info.net = std::move(net);
    return info;
  }

  const double margin = 0.97;
  if (act.k == 0) {
    // Bounded smooth unit: g_s = eta(a x); squared L2 error over the whole
    // line is 2/a * int_0^inf (1 - eta(u))^2 du = 2 (ln 2 - 1/2) / a.
    const double i0 = std::log(2.0) - 0.5;
    info.a = 2.0 * i0 / (margin * eps * margin * eps);
    info.claimed = margin * eps;
    info.closed_form = std::sqrt(2.0 * i0 / info.a);
    Network net;
    net.act = act;
    net.layers.push_back(Layer::from_triplets(1, 1, {{0, 0, info.a}}, {0.0}));
    net.layers.push_back(Layer::from_triplets(1, 1, {{0, 0, 1.0}}, {0.0}));
    net.check();
    info.net = std::move(net);
    return info;
  }

  // Linear-tail smooth unit: g_s = eta(a x + 1/2) - eta(a x - 1/2); the
  // squared error is a^{-1} * int (eta(u + 1/2) - eta(u - 1/2) - 1_{u>=0})^2.
  const auto profile = [&act](double u) {
    const double v = act(u + 0.5) - act(u - 0.5) - (u >= 0.0 ? 1.0 : 0.0);
    return v * v;
  };
  const double i1 = quad::simpson(-60.0, 0.0, 20000, profile) +
                    quad::simpson(0.0, 60.0, 20000, profile);
  info.a = i1 / (margin * eps * margin * eps);
  info.claimed = margin * eps;
  info.closed_form = std::sqrt(i1 / info.a);
  Network net;
  net.act = act;
  net.layers.push_back(Layer::from_triplets(
      2, 1, {{0, 0, info.a}, {1, 0, info.a}}, {0.5, -0.5}));
  net.layers.push_back(
      Layer::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}}, {0.0}));
  net.check();
  info.net = std::move(net);
  return info;
}

double teeth_closed_form(double x) { return x <= 0.5 ? 2.0 * x : 2.0 - 2.0 * x; }

double sawtooth_closed_form(int t, double x) {
  const double u = std::ldexp(x, t);
  const double m = std::fmod(u, 2.0);
  return m <= 1.0 ? m : 2.0 - m;
}

double square_closed_form(int m, double x) {
  double v = x;
  for (int t = 1; t <= m; ++t)
    v -= std::ldexp(sawtooth_closed_form(t, x), -2 * t);
  return v;
}

double square_error_bound(int m) { return std::ldexp(1.0, -2 - 2 * m); }

double mult_error_bound(int m, double T) {
  return T * T * std::ldexp(1.0, -2 * m);
}

double mult_scaled_error_bound(int m, double Tv, double Tw) {
  return Tv * Tw * std::ldexp(1.0, -2 * m);
}

double multi_mult_error_bound(int m, double T, int Dp) {
  return Dp * T * T * std::ldexp(1.0, -2 * m);
}

double step_ramp_l2(double a, double delta) {
  return std::sqrt(delta / 12.0) / a;
}

}  // namespace singlab::ctor
