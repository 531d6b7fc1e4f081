// SPDX-License-Identifier: MIT
#include <cmath>
#include <cstdint>

#include "estimators_internal.hpp"
#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"

namespace singlab::est {

namespace {

constexpr int kMaxDim = 16;

bool is_unit_box(const quad::Box& b) {
  for (int d = 0; d < b.dim(); ++d) {
    const auto i = static_cast<std::size_t>(d);
    if (b.lo[i] != 0.0 || b.hi[i] != 1.0) return false;
  }
  return true;
}

std::size_t table_size(int D, int tau) {
  const auto m = static_cast<std::size_t>(1) << (tau + 1);
  std::size_t total = 1;
  for (int d = 0; d < D; ++d) {
    if (total > (static_cast<std::size_t>(1) << 24) / m) {
      throw ConfigError("wavelet: coefficient table exceeds the 2^24 budget");
    }
    total *= m;
  }
  return total;
}

/// Writes the tau+2 active per-axis slots at x into the scratch arrays
/// starting at `base`. Slot 0 is the scaling function; level j contributes
/// slot 2^j + k with k the (clamped) cell of x.
void active_slots(int tau, double x, int* slots, double* values) {
  slots[0] = 0;
  values[0] = 1.0;
  for (int j = 0; j <= tau; ++j) {
    const double scaled = std::ldexp(x, j);  // 2^j x
    int k = static_cast<int>(scaled);
    const int top = (1 << j) - 1;
    if (k > top) k = top;  // x == 1 belongs to the last cell
    const double frac = scaled - k;
    const double mag = std::ldexp(1.0, j / 2) * (j % 2 ? std::sqrt(2.0) : 1.0);
    values[j + 1] = frac < 0.5 ? mag : -mag;
    slots[j + 1] = (1 << j) + k;
  }
}

}  // namespace

double haar_slot_value(int slot, double x) {
  if (slot == 0) return x >= 0.0 && x <= 1.0 ? 1.0 : 0.0;
  int j = 0;
  while ((2 << j) <= slot) ++j;
  const int k = slot - (1 << j);
  const double t = std::ldexp(x, j) - k;
  if (t < 0.0 || t > 1.0 || (t == 1.0 && k != (1 << j) - 1)) return 0.0;
  const double mag = std::ldexp(1.0, j / 2) * (j % 2 ? std::sqrt(2.0) : 1.0);
  return t < 0.5 ? mag : -mag;
}

void haar_active_slots(int tau, double x, std::vector<int>& slots,
                       std::vector<double>& values) {
  slots.resize(static_cast<std::size_t>(tau) + 2);
  values.resize(static_cast<std::size_t>(tau) + 2);
  active_slots(tau, x, slots.data(), values.data());
}

namespace detail {

double eval_wavelet(const WaveletState& s, std::span<const double> x) {
  const int D = s.D;
  const int per = s.tau + 2;
  const int m = s.per_axis();
  thread_local std::vector<int> slots;
  thread_local std::vector<double> values;
  slots.resize(static_cast<std::size_t>(D) * static_cast<std::size_t>(per));
  values.resize(slots.size());
  for (int d = 0; d < D; ++d) {
    active_slots(s.tau, x[static_cast<std::size_t>(d)],
                 slots.data() + static_cast<std::size_t>(d) * per,
                 values.data() + static_cast<std::size_t>(d) * per);
  }
  int c[kMaxDim] = {0};
  double total = 0.0;
  for (;;) {
    std::size_t flat = 0;
    double v = 1.0;
    for (int d = 0; d < D; ++d) {
      const auto at = static_cast<std::size_t>(d) * per +
                      static_cast<std::size_t>(c[d]);
      flat = flat * static_cast<std::size_t>(m) +
             static_cast<std::size_t>(slots[at]);
      v *= values[at];
    }
    total += s.w[flat] * v;
    int d = D - 1;
    while (d >= 0 && ++c[d] == per) c[d--] = 0;
    if (d < 0) break;
  }
  return total;
}

}  // namespace detail

Predictor fit_wavelet(const fgen::Dataset& data, const FitConfig& cfg) {
  const int tau = cfg.wavelet.tau;
  if (tau < 0) throw ConfigError("wavelet: truncation must be >= 0");
  if (data.D < 1 || data.D > kMaxDim) {
    throw ConfigError("wavelet: dimension out of range");
  }
  if (!is_unit_box(data.domain)) {
    throw ConfigError("wavelet: the series is defined on the unit cube");
  }
  const std::size_t n = data.n();
  if (n == 0) throw ConfigError("wavelet: empty dataset");

  Predictor p;
  p.kind = PredictorKind::Wavelet;
  p.domain = data.domain;
  p.wav.D = data.D;
  p.wav.tau = tau;
  p.wav.w.assign(table_size(data.D, tau), 0.0);
  p.meta.tau = tau;

  const int D = data.D;
  const int per = tau + 2;
  const int m = p.wav.per_axis();
  std::vector<int> slots(static_cast<std::size_t>(D) *
                         static_cast<std::size_t>(per));
  std::vector<double> values(slots.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.x(i);
    for (int d = 0; d < D; ++d) {
      active_slots(tau, xi[static_cast<std::size_t>(d)],
                   slots.data() + static_cast<std::size_t>(d) * per,
                   values.data() + static_cast<std::size_t>(d) * per);
    }
    const double yi = data.Y[i];
    int c[kMaxDim] = {0};
    for (;;) {
      std::size_t flat = 0;
      double v = 1.0;
      for (int d = 0; d < D; ++d) {
        const auto at = static_cast<std::size_t>(d) * per +
                        static_cast<std::size_t>(c[d]);
        flat = flat * static_cast<std::size_t>(m) +
               static_cast<std::size_t>(slots[at]);
        v *= values[at];
      }
      p.wav.w[flat] += yi * v;
      int d = D - 1;
      while (d >= 0 && ++c[d] == per) c[d--] = 0;
      if (d < 0) break;
    }
  }
  const double invn = 1.0 / static_cast<double>(n);
  for (double& v : p.wav.w) v *= invn;

  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = detail::eval_wavelet(p.wav, data.x(i)) - data.Y[i];
    sse += r * r;
  }
  p.meta.final_loss = sse * invn;
  return p;
}

}  // namespace singlab::est
