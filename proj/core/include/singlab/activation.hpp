// SPDX-License-Identifier: MIT
#pragma once

#include <string>

namespace singlab {

enum class ActKind { Sigmoid, SoftPlus, Swish, ReLU, LeakyReLU, AffinePiecewise };

/// A scalar activation together with the classification data the builders
/// need: either a smooth unit with polynomially-bounded tails (class
/// "smooth", with tail polynomial degree k in {0,1} and an analytic
/// derivative oracle up to `deriv_budget`), or an exact piecewise-linear
/// unit eta(x) = c1*x for x >= 0 and c2*x for x < 0 with c1 > c2 >= 0.
struct Activation {
  ActKind kind = ActKind::ReLU;
  double c1 = 1.0;       // piecewise-linear slope, x >= 0
  double c2 = 0.0;       // piecewise-linear slope, x <  0
  int k = 0;             // tail polynomial degree (smooth class only)
  int deriv_budget = 0;  // highest analytic derivative order available
  double tail_order = 0; // declared polynomial tail-decay order q (reporting)

  /// True for the exact piecewise-linear class (ReLU, LeakyReLU,
  /// AffinePiecewise); false for the smooth class (Sigmoid, SoftPlus, Swish).
  bool piecewise_linear() const {
    return kind == ActKind::ReLU || kind == ActKind::LeakyReLU ||
           kind == ActKind::AffinePiecewise;
  }

  double operator()(double x) const;

  /// order-th derivative at x (order 0 = value). For the piecewise-linear
  /// class: order 1 returns the one-sided slope (c1 at x >= 0), higher
  /// orders return 0. For the smooth class the result is analytic, via the
  /// sigmoid polynomial recursion.
  double deriv(int order, double x) const;

  std::string name() const;
  bool same_as(const Activation& o) const {
    return kind == o.kind && c1 == o.c1 && c2 == o.c2;
  }

  static Activation sigmoid();
  static Activation softplus();
  static Activation swish();
  static Activation relu();
  static Activation leaky_relu(double negative_slope = 0.2);
  static Activation affine_piecewise(double c1, double c2);

  /// Parse a CLI/config name: relu, leaky-relu, sigmoid, softplus, swish.
  static Activation parse(const std::string& name);
};

}  // namespace singlab
