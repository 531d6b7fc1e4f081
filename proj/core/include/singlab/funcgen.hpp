// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "singlab/quadrature.hpp"

namespace singlab::fgen {

enum class FnFamily { Polynomial, Cosine, Named };

/// One term of a coefficient table. Cosine family:
///   a * prod_d cos(pi * k_d * x_d + phase_d);
/// Polynomial family: a * prod_d x_d^{k_d} (phase unused).
struct Term {
  std::vector<int> k;
  std::vector<double> phase;  // empty means all-zero phases
  double a = 0.0;
};

/// A smooth component function on a box with analytic derivatives.
/// `beta` and `F` are the declared smoothness and sup-norm radius used by
/// downstream builders and rate predictions; the coefficient table itself is
/// what gets evaluated. The Named family wraps closures (value and first
/// partials) for shapes outside the two series families, e.g. circle arcs.
class HolderFn {
 public:
  FnFamily family = FnFamily::Cosine;
  int D = 1;
  double beta = 1.0;
  double F = 1.0;
  std::vector<Term> terms;
  std::function<double(std::span<const double>)> named_eval;
  std::vector<std::function<double(std::span<const double>)>> named_grad;
  std::string label;

  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }
  double eval1(double x) const { return eval(std::span<const double>(&x, 1)); }

  /// Mixed partial with per-axis orders (order.size() == D, entries >= 0).
  /// Named family supports total order <= 1 only.
  double deriv(std::span<const int> order, std::span<const double> x) const;

  /// Closed-form upper bound on sup |D^order f| valid on [-1,1]^D (hence on
  /// any sub-box). Series families only.
  double deriv_sup_bound(std::span<const int> order) const;

  static HolderFn constant(int D, double value);
  /// Same function plus a constant (adds to the all-zero-k term).
  HolderFn plus_constant(double c) const;
};

/// One boundary graph: the coordinate `axis` is compared against h evaluated
/// on the remaining D-1 coordinates (in increasing index order).
struct Boundary {
  int axis = 0;
  HolderFn h;
};

/// Horizon geometry: J boundary graphs and a partition of the 2^J sign codes
/// into M groups. Bit j of a code is set iff x_{axis_j} >= h_j(x_rest).
struct PieceSpec {
  int D = 0;
  std::vector<Boundary> boundaries;
  std::vector<std::vector<unsigned>> groups;

  int J() const { return static_cast<int>(boundaries.size()); }
  int M() const { return static_cast<int>(groups.size()); }

  unsigned code_of(std::span<const double> x) const;
  /// Index of the group containing code_of(x); groups are scanned in order,
  /// so ties on a boundary resolve to the lowest group index.
  int piece_of(std::span<const double> x) const;
  /// Throws ConfigError unless the groups are disjoint, nonempty, and
  /// exhaust all 2^J codes.
  void validate() const;
};

struct PiecewiseSmoothFn {
  std::string name;
  quad::Box domain;
  PieceSpec pieces;
  std::vector<HolderFn> fs;  // one per group
  double alpha = 1.0;
  double beta = 1.0;
  double F = 1.0;

  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }
};

struct Dataset {
  int D = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  quad::Box domain;
  std::vector<double> X;  // row-major, n x D
  std::vector<double> Y;

  std::size_t n() const { return Y.size(); }
  std::span<const double> x(std::size_t i) const {
    return std::span<const double>(X.data() + i * static_cast<std::size_t>(D),
                                   static_cast<std::size_t>(D));
  }
};

/// Random cosine series with coefficient decay (1+|k|_2)^{-(beta+D/2+1)},
/// |k|_inf <= 8, normalized so the 10^4-point Halton probe sup equals F.
HolderFn sample_holder(std::uint64_t seed, double beta, double F, int D);

/// Random horizon geometry: J boundaries sampled on I^{D-1} and rescaled
/// into [0.2, 0.8], random axes, random partition of sign codes into M
/// nonempty groups.
PieceSpec make_pieces(std::uint64_t seed, double alpha, double F, int J, int M,
                      int D);

/// Random piecewise-smooth function: make_pieces geometry with M independent
/// sample_holder components of smoothness beta and radius F.
PiecewiseSmoothFn sample_piecewise(std::uint64_t seed, double alpha,
                                   double beta, double F, int J, int M, int D);

/// Closed-form reference targets:
///   graph-indicator   1 above the graph of 0.4 + 0.2 sin(2 pi x1) on I^2
///   rectangle-(2/3)^D 1 on [0, 2/3]^D (ASCII alias: rectangle)
///   quadrant          1 on {x1 >= 0, x2 >= 0} in [-1,1]^2
///   disk              1 on the disk of radius 0.3 centered at (0.5, 0.5)
/// `D` applies to the rectangle family; the others fix their dimension.
PiecewiseSmoothFn named_target(const std::string& name, int D = 2);

/// Additional in-repo lab targets:
///   zigzag-indicator  jump across a genuinely Lipschitz multi-scale zigzag
///   beta3-jump        smooth beta=3 field plus a unit jump across the zigzag
///   weier-smooth      globally smooth two-dimensional cosine multi-scale sum
PiecewiseSmoothFn make_extra_target(const std::string& name);

/// X_i i.i.d. uniform on f.domain (stream "design"), Y_i = f(X_i) + sigma*xi
/// with xi i.i.d. standard normal (stream "noise"). Fully determined by seed.
Dataset gen_dataset(const PiecewiseSmoothFn& f, std::size_t n, double sigma,
                    std::uint64_t seed);

}  // namespace singlab::fgen
