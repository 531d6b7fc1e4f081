// SPDX-License-Identifier: MIT
#include "singlab/quadrature.hpp"

#include <array>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab::quad {

namespace {
constexpr std::array<int, 8> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19};
constexpr int kShards = 64;
}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= hi[d] - lo[d];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int d = 0; d < dim(); ++d) {
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  }
  return true;
}

Box Box::unit(int d) {
  Box b;
  b.lo.assign(d, 0.0);
  b.hi.assign(d, 1.0);
  return b;
}

Box Box::symmetric(int d) {
  Box b;
  b.lo.assign(d, -1.0);
  b.hi.assign(d, 1.0);
  return b;
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double x = 0.0;
  while (i > 0) {
    x += static_cast<double>(i % base) * f;
    i /= base;
    f *= inv;
  }
  return x;
}

void halton_point(std::uint64_t i, int d, std::span<double> out) {
  if (d > static_cast<int>(kPrimes.size())) {
    throw ConfigError("halton_point: dimension exceeds the prime table");
  }
  for (int k = 0; k < d; ++k) out[k] = radical_inverse(i, kPrimes[k]);
}

double qmc_mean(const Box& box, std::uint64_t points,
                const std::function<double(std::span<const double>)>& f) {
  if (points == 0) throw ConfigError("qmc_mean: need at least one point");
  const int d = box.dim();
  std::array<double, kShards> sums{};
  std::vector<double> u(d), x(d);
  for (int s = 0; s < kShards; ++s) {
    double acc = 0.0;
    for (std::uint64_t i = static_cast<std::uint64_t>(s); i < points; i += kShards) {
      halton_point(i + 1, d, u);
      for (int k = 0; k < d; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * u[k];
      acc += f(x);
    }
    sums[s] = acc;
  }
  for (int width = kShards; width > 1; width /= 2) {
    for (int s = 0; s < width / 2; ++s) sums[s] = sums[2 * s] + sums[2 * s + 1];
  }
  return sums[0] / static_cast<double>(points);
}

double simpson(double a, double b, int panels,
               const std::function<double(double)>& f) {
  if (!(b > a)) throw ConfigError("simpson: need b > a");
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < panels; i += 2) odd += f(a + i * h);
  for (int i = 2; i < panels; i += 2) even += f(a + i * h);
  return (f(a) + f(b) + 4.0 * odd + 2.0 * even) * h / 3.0;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  return g;
}

}  // namespace singlab::quad
