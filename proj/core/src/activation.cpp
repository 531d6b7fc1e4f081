// SPDX-License-Identifier: MIT
#include "singlab/activation.hpp"

#include <array>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {
namespace {

constexpr int kMaxDeriv = 12;

double stable_sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  // log(1 + e^x) without overflow; for large x this is x + log1p(e^-x).
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  if (x < -30.0) return std::log1p(std::exp(x));
  return std::log1p(std::exp(x));
}

// n-th derivative of the logistic function written as a polynomial in
// s = sigmoid(x): d/dx s^k = k (s^k - s^{k+1}). Coefficient table built once.
struct SigmoidDerivTable {
  // coef[n][k] multiplies s^k in sigmoid^{(n)}; k ranges 1..n+1.
  std::array<std::array<double, kMaxDeriv + 3>, kMaxDeriv + 2> coef{};
  SigmoidDerivTable() {
    coef[0][1] = 1.0;
    for (int n = 0; n < kMaxDeriv + 1; ++n) {
      for (int k = 1; k <= n + 1; ++k) {
        const double c = coef[n][k];
        if (c == 0.0) continue;
        coef[n + 1][k] += c * k;
        coef[n + 1][k + 1] -= c * k;
      }
    }
  }
};

double sigmoid_deriv(int order, double x) {
  static const SigmoidDerivTable table;
  if (order == 0) return stable_sigmoid(x);
  const double s = stable_sigmoid(x);
  double sk = s;  // s^1
  double acc = 0.0;
  for (int k = 1; k <= order + 1; ++k) {
    acc += table.coef[order][k] * sk;
    sk *= s;
  }
  return acc;
}

}  // namespace

double Activation::operator()(double x) const {
  switch (kind) {
    case ActKind::Sigmoid:
      return stable_sigmoid(x);
    case ActKind::SoftPlus:
      return stable_softplus(x);
    case ActKind::Swish:
      return x * stable_sigmoid(x);
    case ActKind::ReLU:
    case ActKind::LeakyReLU:
    case ActKind::AffinePiecewise:
      return x >= 0 ? c1 * x : c2 * x;
  }
  return 0.0;
}

double Activation::deriv(int order, double x) const {
  if (order < 0) throw ConfigError("activation derivative order must be >= 0");
  if (order == 0) return (*this)(x);
  if (piecewise_linear()) {
    return order == 1 ? (x >= 0 ? c1 : c2) : 0.0;
  }
  if (order > deriv_budget) {
    throw ConfigError("activation '" + name() + "' exposes derivatives up to order " +
                      std::to_string(deriv_budget) + ", got " + std::to_string(order));
  }
  switch (kind) {
    case ActKind::Sigmoid:
      return sigmoid_deriv(order, x);
    case ActKind::SoftPlus:
      // d/dx softplus = sigmoid, so order j >= 1 is sigmoid^{(j-1)}.
      return sigmoid_deriv(order - 1, x);
    case ActKind::Swish:
      // (x*s)^{(j)} = x*s^{(j)} + j*s^{(j-1)}.
      return x * sigmoid_deriv(order, x) + order * sigmoid_deriv(order - 1, x);
    default:
      return 0.0;
  }
}

std::string Activation::name() const {
  switch (kind) {
    case ActKind::Sigmoid:
      return "sigmoid";
    case ActKind::SoftPlus:
      return "softplus";
    case ActKind::Swish:
      return "swish";
    case ActKind::ReLU:
      return "relu";
    case ActKind::LeakyReLU:
      return "leaky-relu";
    case ActKind::AffinePiecewise:
      return "affine-piecewise";
  }
  return "?";
}

Activation Activation::sigmoid() {
  Activation a;
  a.kind = ActKind::Sigmoid;
  a.c1 = a.c2 = 0.0;
  a.k = 0;
  a.deriv_budget = kMaxDeriv;
  a.tail_order = 4.0;  // exponential tails satisfy any polynomial order
  return a;
}

Activation Activation::softplus() {
  Activation a;
  a.kind = ActKind::SoftPlus;
  a.c1 = a.c2 = 0.0;
  a.k = 1;
  a.deriv_budget = kMaxDeriv;
  a.tail_order = 4.0;
  return a;
}

Activation Activation::swish() {
  Activation a;
  a.kind = ActKind::Swish;
  a.c1 = a.c2 = 0.0;
  a.k = 1;
  a.deriv_budget = kMaxDeriv;
  a.tail_order = 4.0;
  return a;
}

Activation Activation::relu() {
  Activation a;
  a.kind = ActKind::ReLU;
  a.c1 = 1.0;
  a.c2 = 0.0;
  return a;
}

Activation Activation::leaky_relu(double negative_slope) {
  if (!(negative_slope >= 0.0 && negative_slope < 1.0)) {
    throw ConfigError("leaky-relu negative slope must lie in [0, 1)");
  }
  Activation a;
  a.kind = ActKind::LeakyReLU;
  a.c1 = 1.0;
  a.c2 = negative_slope;
  return a;
}

Activation Activation::affine_piecewise(double c1, double c2) {
  if (!(c1 > c2 && c2 >= 0.0)) {
    throw ConfigError("affine-piecewise slopes must satisfy c1 > c2 >= 0");
  }
  Activation a;
  a.kind = ActKind::AffinePiecewise;
  a.c1 = c1;
  a.c2 = c2;
  return a;
}

Activation Activation::parse(const std::string& name) {
  if (name == "relu") return relu();
  if (name == "leaky-relu") return leaky_relu();
  if (name == "sigmoid") return sigmoid();
  if (name == "softplus") return softplus();
  if (name == "swish") return swish();
  throw ConfigError("unknown activation '" + name +
                    "' (expected relu, leaky-relu, sigmoid, softplus, swish)");
}

}  // namespace singlab
