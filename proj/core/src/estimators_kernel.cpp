// SPDX-License-Identifier: MIT
#include <cmath>

#include <Eigen/Dense>

#include "estimators_internal.hpp"
#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"

namespace singlab::est {

namespace detail {

double eval_krr(const KernelRidgeState& s, std::span<const double> x) {
  const double inv = 1.0 / (2.0 * s.bandwidth * s.bandwidth);
  const auto D = static_cast<std::size_t>(s.D);
  double acc = 0.0;
  const std::size_t n = s.a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = s.X.data() + i * D;
    double d2 = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double t = x[d] - xi[d];
      d2 += t * t;
    }
    acc += s.a[i] * std::exp(-d2 * inv);
  }
  return acc;
}

}  // namespace detail

Predictor fit_kernel_ridge(const fgen::Dataset& data, const FitConfig& cfg) {
  const KernelRidgeConfig& kc = cfg.kernel;
  if (kc.kernel != "gaussian") {
    throw ConfigError("kernel ridge: unknown kernel family '" + kc.kernel +
                      "'");
  }
  if (kc.lambda <= 0.0) {
    throw ConfigError("kernel ridge: lambda must be positive");
  }
  if (kc.bandwidth <= 0.0) {
    throw ConfigError("kernel ridge: bandwidth must be positive");
  }
  const std::size_t n = data.n();
  if (n == 0) throw ConfigError("kernel ridge: empty dataset");

  const auto ni = static_cast<Eigen::Index>(n);
  const double inv = 1.0 / (2.0 * kc.bandwidth * kc.bandwidth);
  Eigen::MatrixXd K(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    K(i, i) = 1.0;
    const auto xi = data.x(static_cast<std::size_t>(i));
    for (Eigen::Index j = i + 1; j < ni; ++j) {
      const auto xj = data.x(static_cast<std::size_t>(j));
      double d2 = 0.0;
      for (int d = 0; d < data.D; ++d) {
        const double t = xi[static_cast<std::size_t>(d)] -
                         xj[static_cast<std::size_t>(d)];
        d2 += t * t;
      }
      const double v = std::exp(-d2 * inv);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  Eigen::MatrixXd A = K;
  A.diagonal().array() += static_cast<double>(n) * kc.lambda;
  const Eigen::Map<const Eigen::VectorXd> Y(data.Y.data(), ni);
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("kernel ridge: Gram system is not positive definite");
  }
  const Eigen::VectorXd a = llt.solve(Y);

  Predictor p;
  p.kind = PredictorKind::KernelRidge;
  p.domain = data.domain;
  p.krr.D = data.D;
  p.krr.bandwidth = kc.bandwidth;
  p.krr.lambda = kc.lambda;
  p.krr.X = data.X;
  p.krr.a.assign(a.data(), a.data() + a.size());
  p.meta.bandwidth = kc.bandwidth;
  p.meta.lambda = kc.lambda;
  p.meta.final_loss = (K * a - Y).squaredNorm() / static_cast<double>(n);
  return p;
}

}  // namespace singlab::est
