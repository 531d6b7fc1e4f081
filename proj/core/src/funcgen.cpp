// SPDX-License-Identifier: MIT
#include "singlab/funcgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "singlab/errors.hpp"
#include "singlab/rng.hpp"

namespace singlab::fgen {

namespace {

constexpr double kPi = std::numbers::pi;

double falling_factorial(int k, int o) {
  if (o > k) return 0.0;
  double r = 1.0;
  for (int j = 0; j < o; ++j) r *= static_cast<double>(k - j);
  return r;
}

int total_order(std::span<const int> order) {
  int t = 0;
  for (int o : order) {
    if (o < 0) throw ConfigError("derivative order must be non-negative");
    t += o;
  }
  return t;
}

}  // namespace

double HolderFn::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != D)
    throw ShapeError("HolderFn::eval: point dimension mismatch");
  if (family == FnFamily::Named) {
    if (!named_eval) throw ConfigError("named HolderFn without an evaluator");
    return named_eval(x);
  }
  double sum = 0.0;
  for (const Term& t : terms) {
    double prod = t.a;
    for (int d = 0; d < D; ++d) {
      const double ph = t.phase.empty() ? 0.0 : t.phase[d];
      if (family == FnFamily::Cosine) {
        prod *= std::cos(kPi * t.k[d] * x[d] + ph);
      } else {
        double p = 1.0;
        for (int j = 0; j < t.k[d]; ++j) p *= x[d];
        prod *= p;
      }
    }
    sum += prod;
  }
  return sum;
}

double HolderFn::deriv(std::span<const int> order,
                       std::span<const double> x) const {
  if (static_cast<int>(order.size()) != D)
    throw ShapeError("HolderFn::deriv: order dimension mismatch");
  const int tot = total_order(order);
  if (tot == 0) return eval(x);
  if (family == FnFamily::Named) {
    if (tot > 1)
      throw UnsupportedConstruction(
          "named HolderFn exposes first derivatives only");
    int axis = 0;
    while (order[axis] == 0) ++axis;
    if (named_grad.empty())
      throw UnsupportedConstruction("named HolderFn without gradient data");
    return named_grad.at(axis)(x);
  }
  double sum = 0.0;
  for (const Term& t : terms) {
    double prod = t.a;
    for (int d = 0; d < D && prod != 0.0; ++d) {
      const int o = order[d];
      const double ph = t.phase.empty() ? 0.0 : t.phase[d];
      if (family == FnFamily::Cosine) {
        // d/dx cos(pi k x + ph) = pi k cos(pi k x + ph + pi/2)
        double f = 1.0;
        for (int j = 0; j < o; ++j) f *= kPi * t.k[d];
        prod *= f * std::cos(kPi * t.k[d] * x[d] + ph + o * kPi / 2.0);
      } else {
        const double ff = falling_factorial(t.k[d], o);
        double p = 1.0;
        for (int j = 0; j < t.k[d] - o; ++j) p *= x[d];
        prod *= ff * p;
      }
    }
    sum += prod;
  }
  return sum;
}

double HolderFn::deriv_sup_bound(std::span<const int> order) const {
  if (static_cast<int>(order.size()) != D)
    throw ShapeError("HolderFn::deriv_sup_bound: order dimension mismatch");
  if (family == FnFamily::Named)
    throw UnsupportedConstruction(
        "named HolderFn has no closed-form derivative bound");
  total_order(order);
  double sum = 0.0;
  for (const Term& t : terms) {
    double prod = std::abs(t.a);
    for (int d = 0; d < D && prod != 0.0; ++d) {
      const int o = order[d];
      if (family == FnFamily::Cosine) {
        for (int j = 0; j < o; ++j) prod *= kPi * t.k[d];
      } else {
        prod *= falling_factorial(t.k[d], o);  // |x| <= 1 on the lab boxes
      }
    }
    sum += prod;
  }
  return sum;
}

HolderFn HolderFn::constant(int D, double value) {
  HolderFn f;
  f.family = FnFamily::Cosine;
  f.D = D;
  f.beta = 1e6;  // constants are as smooth as anything downstream asks for
  f.F = std::max(1.0, std::abs(value));
  f.terms.push_back(Term{std::vector<int>(D, 0), {}, value});
  return f;
}

HolderFn HolderFn::plus_constant(double c) const {
  if (family == FnFamily::Named)
    throw UnsupportedConstruction("cannot shift a named HolderFn");
  HolderFn out = *this;
  for (Term& t : out.terms) {
    const bool zero_k =
        std::all_of(t.k.begin(), t.k.end(), [](int k) { return k == 0; });
    const bool zero_ph = t.phase.empty() ||
                         std::all_of(t.phase.begin(), t.phase.end(),
                                     [](double p) { return p == 0.0; });
    if (zero_k && zero_ph) {
      t.a += c;
      out.F += std::abs(c);
      return out;
    }
  }
  out.terms.push_back(Term{std::vector<int>(D, 0), {}, c});
  out.F += std::abs(c);
  return out;
}

unsigned PieceSpec::code_of(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != D)
    throw ShapeError("PieceSpec::code_of: point dimension mismatch");
  unsigned code = 0;
  std::vector<double> rest(static_cast<std::size_t>(D) - 1);
  for (int j = 0; j < J(); ++j) {
    const Boundary& b = boundaries[static_cast<std::size_t>(j)];
    int w = 0;
    for (int d = 0; d < D; ++d)
      if (d != b.axis) rest[static_cast<std::size_t>(w++)] = x[d];
    const double h = b.h.eval(std::span<const double>(rest.data(),
                                                      rest.size()));
    if (x[b.axis] >= h) code |= 1u << j;
  }
  return code;
}

int PieceSpec::piece_of(std::span<const double> x) const {
  const unsigned code = code_of(x);
  for (int m = 0; m < M(); ++m) {
    const auto& g = groups[static_cast<std::size_t>(m)];
    if (std::find(g.begin(), g.end(), code) != g.end()) return m;
  }
  throw ConfigError("PieceSpec: sign code not covered by any group");
}

void PieceSpec::validate() const {
  if (D < 1) throw ConfigError("PieceSpec: dimension must be positive");
  if (J() > 16) throw ConfigError("PieceSpec: too many boundaries");
  for (const Boundary& b : boundaries) {
    if (b.axis < 0 || b.axis >= D)
      throw ConfigError("PieceSpec: boundary axis out of range");
    if (b.h.D != D - 1)
      throw ConfigError("PieceSpec: boundary function dimension mismatch");
  }
  const unsigned n_codes = 1u << J();
  std::vector<int> owner(n_codes, -1);
  for (int m = 0; m < M(); ++m) {
    const auto& g = groups[static_cast<std::size_t>(m)];
    if (g.empty()) throw ConfigError("PieceSpec: empty sign group");
    for (unsigned code : g) {
      if (code >= n_codes) throw ConfigError("PieceSpec: sign code too large");
      if (owner[code] != -1)
        throw ConfigError("PieceSpec: sign code listed in two groups");
      owner[code] = m;
    }
  }
  for (unsigned c = 0; c < n_codes; ++c)
    if (owner[c] == -1)
      throw ConfigError("PieceSpec: sign code not covered by any group");
}

double PiecewiseSmoothFn::eval(std::span<const double> x) const {
  return fs.at(static_cast<std::size_t>(pieces.piece_of(x))).eval(x);
}

HolderFn sample_holder(std::uint64_t seed, double beta, double F, int D) {
  if (beta <= 0.0 || F <= 0.0 || D < 1)
    throw ConfigError("sample_holder: beta, F, D must be positive");
  constexpr int kMaxWave = 8;
  rng::Counter coef(seed, "fn-coef");

  HolderFn f;
  f.family = FnFamily::Cosine;
  f.D = D;
  f.beta = beta;
  f.F = F;

  std::vector<int> k(static_cast<std::size_t>(D), 0);
  const double decay_pow = beta + 0.5 * D + 1.0;
  for (;;) {
    double norm2 = 0.0;
    for (int kd : k) norm2 += static_cast<double>(kd) * kd;
    const double decay = std::pow(1.0 + std::sqrt(norm2), -decay_pow);
    f.terms.push_back(Term{k, {}, coef.next_uniform(-1.0, 1.0) * decay});
    int d = 0;
    while (d < D && k[static_cast<std::size_t>(d)] == kMaxWave) {
      k[static_cast<std::size_t>(d)] = 0;
      ++d;
    }
    if (d == D) break;
    ++k[static_cast<std::size_t>(d)];
  }

  // Normalize so the Halton-probe sup norm equals F exactly.
  constexpr std::uint64_t kProbe = 10000;
  double sup = 0.0;
  std::vector<double> p(static_cast<std::size_t>(D));
  for (std::uint64_t i = 1; i <= kProbe; ++i) {
    quad::halton_point(i, D, p);
    sup = std::max(sup, std::abs(f.eval(p)));
  }
  const double scale = F / std::max(sup, 1e-14);
  for (Term& t : f.terms) t.a *= scale;
  return f;
}

PieceSpec make_pieces(std::uint64_t seed, double alpha, double F, int J, int M,
                      int D) {
  if (J < 1 || D < 2) throw ConfigError("make_pieces: need J >= 1 and D >= 2");
  if (M < 1 || M > (1 << J))
    throw ConfigError("make_pieces: need 1 <= M <= 2^J");
  rng::Counter pick(seed, "pieces");

  PieceSpec spec;
  spec.D = D;
  for (int j = 0; j < J; ++j) {
    Boundary b;
    b.axis = static_cast<int>(pick.next_below(static_cast<std::uint64_t>(D)));
    b.h = sample_holder(rng::derive_seed(seed, static_cast<std::uint64_t>(j) + 1),
                        alpha, F, D - 1);
    // Affine rescale of [-F, F] into [0.2, 0.8] keeps every piece nonempty.
    const double s = 0.3 / F;
    for (Term& t : b.h.terms) t.a *= s;
    b.h = b.h.plus_constant(0.5);
    b.h.F = 0.8;
    spec.boundaries.push_back(std::move(b));
  }

  const unsigned n_codes = 1u << J;
  std::vector<unsigned> codes(n_codes);
  for (unsigned c = 0; c < n_codes; ++c) codes[c] = c;
  for (unsigned i = n_codes - 1; i > 0; --i) {
    const auto j = pick.next_below(static_cast<std::uint64_t>(i) + 1);
    std::swap(codes[i], codes[static_cast<unsigned>(j)]);
  }
  spec.groups.assign(static_cast<std::size_t>(M), {});
  for (unsigned i = 0; i < n_codes; ++i) {
    const std::size_t m =
        i < static_cast<unsigned>(M)
            ? i
            : static_cast<std::size_t>(
                  pick.next_below(static_cast<std::uint64_t>(M)));
    spec.groups[m].push_back(codes[i]);
  }
  spec.validate();
  return spec;
}

PiecewiseSmoothFn sample_piecewise(std::uint64_t seed, double alpha,
                                   double beta, double F, int J, int M,
                                   int D) {
  PiecewiseSmoothFn f;
  f.name = "sampled";
  f.domain = quad::Box::unit(D);
  f.pieces = make_pieces(rng::derive_seed(seed, 1), alpha, F, J, M, D);
  for (int m = 0; m < M; ++m)
    f.fs.push_back(sample_holder(
        rng::derive_seed(seed, 2, static_cast<std::uint64_t>(m)), beta, F, D));
  f.alpha = alpha;
  f.beta = beta;
  f.F = F;
  return f;
}

namespace {

PiecewiseSmoothFn graph_indicator_target() {
  PiecewiseSmoothFn f;
  f.name = "graph-indicator";
  f.domain = quad::Box::unit(2);

  HolderFn h;  // 0.4 + 0.2 sin(2 pi x) = 0.4 + 0.2 cos(2 pi x - pi/2)
  h.family = FnFamily::Cosine;
  h.D = 1;
  // The boundary network is sized by the class smoothness alpha = 1, not by
  // the sine's true regularity, so size-vs-error scans track the alpha rate.
  h.beta = 1.0;
  h.F = 2.0;
  h.terms.push_back(Term{{0}, {0.0}, 0.4});
  h.terms.push_back(Term{{2}, {-kPi / 2.0}, 0.2});

  f.pieces.D = 2;
  f.pieces.boundaries.push_back(Boundary{1, std::move(h)});
  f.pieces.groups = {{1u}, {0u}};
  f.fs = {HolderFn::constant(2, 1.0), HolderFn::constant(2, 0.0)};
  f.alpha = 1.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

PiecewiseSmoothFn rectangle_target(int D) {
  if (D < 1) throw ConfigError("rectangle target: D must be positive");
  PiecewiseSmoothFn f;
  f.name = "rectangle-(2/3)^" + std::to_string(D);
  f.domain = quad::Box::unit(D);
  f.pieces.D = D;
  std::vector<unsigned> outside;
  for (int d = 0; d < D; ++d)
    f.pieces.boundaries.push_back(
        Boundary{d, HolderFn::constant(D - 1, 2.0 / 3.0)});
  for (unsigned c = 1; c < (1u << D); ++c) outside.push_back(c);
  f.pieces.groups = {{0u}};
  if (!outside.empty()) f.pieces.groups.push_back(std::move(outside));
  f.fs = {HolderFn::constant(D, 1.0)};
  if (f.pieces.groups.size() == 2) f.fs.push_back(HolderFn::constant(D, 0.0));
  f.alpha = 2.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

PiecewiseSmoothFn quadrant_target() {
  PiecewiseSmoothFn f;
  f.name = "quadrant-[-1,1]^2";
  f.domain = quad::Box::symmetric(2);
  f.pieces.D = 2;
  f.pieces.boundaries.push_back(Boundary{0, HolderFn::constant(1, 0.0)});
  f.pieces.boundaries.push_back(Boundary{1, HolderFn::constant(1, 0.0)});
  f.pieces.groups = {{3u}, {0u, 1u, 2u}};
  f.fs = {HolderFn::constant(2, 1.0), HolderFn::constant(2, 0.0)};
  f.alpha = 2.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

HolderFn semicircle_boundary(double cx, double cy, double r, double sign) {
  HolderFn h;
  h.family = FnFamily::Named;
  h.D = 1;
  h.beta = 2.0;
  h.F = cy + r;
  h.label = sign > 0 ? "disk-upper" : "disk-lower";
  h.named_eval = [=](std::span<const double> x) {
    const double dx = x[0] - cx;
    return cy + sign * std::sqrt(std::max(0.0, r * r - dx * dx));
  };
  h.named_grad = {[=](std::span<const double> x) {
    const double dx = x[0] - cx;
    const double g = std::sqrt(std::max(0.0, r * r - dx * dx));
    return g > 0.0 ? -sign * dx / g : 0.0;
  }};
  return h;
}

PiecewiseSmoothFn disk_target() {
  PiecewiseSmoothFn f;
  f.name = "disk";
  f.domain = quad::Box::unit(2);
  f.pieces.D = 2;
  f.pieces.boundaries.push_back(
      Boundary{1, semicircle_boundary(0.5, 0.5, 0.3, -1.0)});
  f.pieces.boundaries.push_back(
      Boundary{1, semicircle_boundary(0.5, 0.5, 0.3, +1.0)});
  // Inside the disk: above the lower arc (bit 0), below the upper arc.
  f.pieces.groups = {{1u}, {0u, 2u, 3u}};
  f.fs = {HolderFn::constant(2, 1.0), HolderFn::constant(2, 0.0)};
  f.alpha = 2.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

/// Multi-scale triangle-wave zigzag: Lipschitz but not differentiable, so it
/// genuinely sits in the alpha = 1 Holder class and no smoother.
HolderFn zigzag_boundary() {
  HolderFn h;
  h.family = FnFamily::Named;
  h.D = 1;
  h.beta = 1.0;
  h.F = 0.6;
  h.label = "zigzag";
  auto tri = [](double u) {
    const double fr = u - std::floor(u);
    return 2.0 * std::abs(fr - 0.5);
  };
  h.named_eval = [tri](std::span<const double> x) {
    double s = 0.5;
    double scale = 1.0;
    for (int k = 1; k <= 5; ++k) {
      scale *= 0.25;
      s += 0.05 * scale * tri(std::pow(4.0, k) * x[0]);
    }
    return s;
  };
  h.named_grad = {[](std::span<const double> x) {
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double u = std::pow(4.0, k) * x[0];
      const double fr = u - std::floor(u);
      s += 0.05 * (fr >= 0.5 ? 2.0 : -2.0);
    }
    return s;
  }};
  return h;
}

PiecewiseSmoothFn zigzag_indicator_target() {
  PiecewiseSmoothFn f;
  f.name = "zigzag-indicator";
  f.domain = quad::Box::unit(2);
  f.pieces.D = 2;
  f.pieces.boundaries.push_back(Boundary{1, zigzag_boundary()});
  f.pieces.groups = {{1u}, {0u}};
  f.fs = {HolderFn::constant(2, 1.0), HolderFn::constant(2, 0.0)};
  f.alpha = 1.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

PiecewiseSmoothFn beta3_jump_target() {
  PiecewiseSmoothFn f;
  f.name = "beta3-jump";
  f.domain = quad::Box::unit(2);
  f.pieces.D = 2;
  f.pieces.boundaries.push_back(Boundary{1, zigzag_boundary()});
  f.pieces.groups = {{1u}, {0u}};
  const HolderFn s = sample_holder(rng::derive_seed(20260815, 7), 3.0, 0.5, 2);
  f.fs = {s.plus_constant(1.0), s};
  f.alpha = 1.0;
  f.beta = 3.0;
  f.F = 1.5;
  return f;
}

PiecewiseSmoothFn weier_smooth_target() {
  PiecewiseSmoothFn f;
  f.name = "weier-smooth";
  f.domain = quad::Box::unit(2);
  f.pieces.D = 2;
  f.pieces.groups = {{0u}};

  HolderFn w;
  w.family = FnFamily::Cosine;
  w.D = 2;
  w.beta = 2.0;
  w.F = 1.0;
  rng::Counter ph(99, "weier");
  for (int j = 0; j <= 6; ++j) {
    const int wave = 1 << j;
    const double amp = std::pow(0.25, j);
    w.terms.push_back(Term{{wave, wave},
                           {ph.next_uniform(0.0, 2.0 * kPi),
                            ph.next_uniform(0.0, 2.0 * kPi)},
                           amp});
  }
  // Normalize the probe sup to 1 like sample_holder does.
  double sup = 0.0;
  std::vector<double> p(2);
  for (std::uint64_t i = 1; i <= 10000; ++i) {
    quad::halton_point(i, 2, p);
    sup = std::max(sup, std::abs(w.eval(p)));
  }
  for (Term& t : w.terms) t.a /= std::max(sup, 1e-14);

  f.fs = {std::move(w)};
  f.alpha = 2.0;
  f.beta = 2.0;
  f.F = 1.0;
  return f;
}

}  // namespace

PiecewiseSmoothFn named_target(const std::string& name, int D) {
  if (name == "graph-indicator") return graph_indicator_target();
  if (name == "rectangle" || name == "rectangle-(2/3)^D")
    return rectangle_target(D);
  if (name == "rectangle-(2/3)^2" || name == "rectangle-(2/3)²")
    return rectangle_target(2);
  if (name == "quadrant" || name == "quadrant-[-1,1]^2" ||
      name == "quadrant-[−1,1]²")
    return quadrant_target();
  if (name == "disk") return disk_target();
  throw ConfigError("unknown named target: " + name);
}

PiecewiseSmoothFn make_extra_target(const std::string& name) {
  if (name == "zigzag-indicator") return zigzag_indicator_target();
  if (name == "beta3-jump") return beta3_jump_target();
  if (name == "weier-smooth") return weier_smooth_target();
  throw ConfigError("unknown extra target: " + name);
}

Dataset gen_dataset(const PiecewiseSmoothFn& f, std::size_t n, double sigma,
                    std::uint64_t seed) {
  if (n < 1) throw ConfigError("gen_dataset: n must be positive");
  if (sigma < 0.0) throw ConfigError("gen_dataset: sigma must be >= 0");
  const int D = f.domain.dim();
  Dataset ds;
  ds.D = D;
  ds.sigma = sigma;
  ds.seed = seed;
  ds.domain = f.domain;
  ds.X.resize(n * static_cast<std::size_t>(D));
  ds.Y.resize(n);

  rng::Counter design(seed, "design");
  for (std::size_t i = 0; i < n; ++i)
    for (int d = 0; d < D; ++d)
      ds.X[i * static_cast<std::size_t>(D) + static_cast<std::size_t>(d)] =
          design.next_uniform(f.domain.lo[static_cast<std::size_t>(d)],
                              f.domain.hi[static_cast<std::size_t>(d)]);

  rng::Counter noise(seed, "noise");
  for (std::size_t i = 0; i < n; ++i)
    ds.Y[i] = f.eval(ds.x(i)) + sigma * noise.next_normal();
  return ds;
}

}  // namespace singlab::fgen
