// SPDX-License-Identifier: MIT
//
// The four regression estimators: gradient-trained networks, Gaussian
// kernel ridge, the tensor Haar series, and the two-dimensional curvelet
// frame. Coefficient formulas are checked against hand oracles, the three
// series/kernel estimators against exact superposition in the responses,
// and the curvelet frame against its partition-of-unity and a band-limited
// round trip through the production prediction path.
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "doctest.h"
#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"
#include "singlab/funcgen.hpp"
#include "singlab/netio.hpp"
#include "singlab/quadrature.hpp"

using namespace singlab;
using namespace singlab::est;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Halton probe points mapped into `box`.
std::vector<double> probe_points(const quad::Box& box, std::size_t count) {
  const int D = box.dim();
  std::vector<double> pts(count * static_cast<std::size_t>(D));
  std::vector<double> unit(static_cast<std::size_t>(D));
  for (std::size_t i = 0; i < count; ++i) {
    quad::halton_point(i + 1, D, unit);
    for (int d = 0; d < D; ++d) {
      pts[i * D + d] =
          box.lo[static_cast<std::size_t>(d)] +
          unit[static_cast<std::size_t>(d)] *
              (box.hi[static_cast<std::size_t>(d)] -
               box.lo[static_cast<std::size_t>(d)]);
    }
  }
  return pts;
}

std::span<const double> point(const std::vector<double>& pts, int D,
                              std::size_t i) {
  return std::span<const double>(pts.data() + i * static_cast<std::size_t>(D),
                                 static_cast<std::size_t>(D));
}

/// Exact-superposition harness: fits Y, Y', and Y + 2 Y' on one design and
/// returns the largest |p(Y + 2Y') - p(Y) - 2 p(Y')| over a Halton probe.
template <typename Fit>
double superposition_defect(const fgen::Dataset& base, Fit&& fit) {
  fgen::Dataset alt = base;
  for (std::size_t i = 0; i < alt.n(); ++i) {
    const auto x = alt.x(i);
    alt.Y[i] = std::sin(3.0 * x[0]) - 0.5 * x[x.size() - 1];
  }
  fgen::Dataset mix = base;
  for (std::size_t i = 0; i < mix.n(); ++i) {
    mix.Y[i] = base.Y[i] + 2.0 * alt.Y[i];
  }
  const Predictor pa = fit(base);
  const Predictor pb = fit(alt);
  const Predictor pc = fit(mix);
  const auto pts = probe_points(base.domain, 64);
  double worst = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const auto x = point(pts, base.D, i);
    worst = std::max(worst, std::abs(pc.predict(x) - pa.predict(x) -
                                     2.0 * pb.predict(x)));
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kernel ridge
// ---------------------------------------------------------------------------

TEST_CASE("kernel ridge interpolates a single observation") {
  fgen::Dataset d;
  d.D = 2;
  d.domain = quad::Box::unit(2);
  d.X = {0.3, 0.4};
  d.Y = {2.0};
  FitConfig fc;
  fc.kernel.lambda = 1e-3;
  const Predictor p = fit_kernel_ridge(d, fc);
  // With one point the Gram matrix is the scalar 1, so the dual weight is
  // y / (1 + lambda) and the prediction at the point equals it.
  const double x[2] = {0.3, 0.4};
  CHECK(p.predict(std::span<const double>(x, 2)) ==
        doctest::Approx(2.0 / (1.0 + 1e-3)).epsilon(1e-12));
  CHECK(p.meta.lambda == 1e-3);
  CHECK(p.meta.bandwidth == fc.kernel.bandwidth);
}

TEST_CASE("kernel ridge reproduces a constant response") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 32, 0.0, 3);
  for (auto& y : d.Y) y = 0.8;
  FitConfig fc;
  fc.kernel.bandwidth = 0.3;
  fc.kernel.lambda = 1e-8;
  const Predictor p = fit_kernel_ridge(d, fc);
  for (std::size_t i = 0; i < d.n(); ++i) {
    CHECK(p.predict(d.x(i)) == doctest::Approx(0.8).epsilon(1e-4));
  }
}

TEST_CASE("kernel ridge validates its configuration") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 8, 0.0, 3);
  FitConfig fc;
  fc.kernel.lambda = 0.0;
  CHECK_THROWS_AS(fit_kernel_ridge(d, fc), ConfigError);
  fc.kernel.lambda = 1e-3;
  fc.kernel.kernel = "triangular";
  CHECK_THROWS_AS(fit_kernel_ridge(d, fc), ConfigError);
  fc.kernel.kernel = "gaussian";
  fc.kernel.bandwidth = 0.0;
  CHECK_THROWS_AS(fit_kernel_ridge(d, fc), ConfigError);
}

TEST_CASE("kernel ridge satisfies superposition in the responses") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("graph-indicator", 2), 64, 0.1, 7);
  FitConfig fc;
  const double defect = superposition_defect(
      d, [&](const fgen::Dataset& data) { return fit_kernel_ridge(data, fc); });
  CHECK(defect <= 1e-8);
}

// ---------------------------------------------------------------------------
// Tensor Haar series
// ---------------------------------------------------------------------------

TEST_CASE("per-axis Haar slots match the dyadic layout") {
  // Slot 0: the scaling function.
  CHECK(haar_slot_value(0, 0.0) == 1.0);
  CHECK(haar_slot_value(0, 0.999) == 1.0);
  // Slot 2^j + k at level j, translate k; positive half first.
  CHECK(haar_slot_value(1, 0.25) == 1.0);    // j=0: +1 on [0, 1/2)
  CHECK(haar_slot_value(1, 0.75) == -1.0);   // j=0: -1 on [1/2, 1)
  CHECK(haar_slot_value(2, 0.1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(haar_slot_value(2, 0.3) == doctest::Approx(-std::sqrt(2.0)));
  CHECK(haar_slot_value(2, 0.6) == 0.0);     // outside [0, 1/2)
  CHECK(haar_slot_value(5, 0.3) == 2.0);     // j=2, k=1: + on [1/4, 3/8)
  // The closed right edge belongs to the last translate of each level.
  CHECK(haar_slot_value(3, 1.0) == -std::sqrt(2.0));
  CHECK(haar_slot_value(2, 0.5) == 0.0);

  std::vector<int> slots;
  std::vector<double> values;
  haar_active_slots(2, 0.3, slots, values);
  REQUIRE(slots.size() == 4);  // scaling + levels 0..2
  for (std::size_t i = 0; i < slots.size(); ++i) {
    CHECK(values[i] == haar_slot_value(slots[i], 0.3));
    CHECK(values[i] != 0.0);
  }
}

TEST_CASE("wavelet fit recovers the exact scaling coefficient") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 512, 0.0, 5);
  for (auto& y : d.Y) y = 1.0;
  FitConfig fc;
  fc.wavelet.tau = 2;
  const Predictor p = fit_wavelet(d, fc);
  // The tensor scaling function is identically one, so its empirical
  // coefficient is the exact mean of the responses.
  CHECK(p.wav.w[0] == 1.0);
  CHECK(p.meta.tau == 2);
}

TEST_CASE("wavelet straddle coefficient approaches the population value") {
  // One-dimensional indicator of [0, 2/3]: at level j=2 the discontinuity
  // falls inside translate k=2, where the population coefficient is
  // 2 (5/8 - 1/2) - 2 (2/3 - 5/8) = 1/6, i.e. (1/3) 2^{-j/2}.
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 1), 4096, 0.0, 21);
  FitConfig fc;
  fc.wavelet.tau = 2;
  const Predictor p = fit_wavelet(d, fc);
  const int slot = (1 << 2) + 2;
  const double expect = 1.0 / 6.0;
  CHECK(std::abs(p.wav.w[static_cast<std::size_t>(slot)] - expect) <= 0.05);
  // Same statement in the scale-normalized form c 2^{-j/2}.
  CHECK(std::abs(p.wav.w[static_cast<std::size_t>(slot)] * 2.0 - 1.0 / 3.0) <=
        0.1);
}

TEST_CASE("wavelet coefficients respect the empirical energy budget") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 4096, 0.0, 9);
  FitConfig fc;
  fc.wavelet.tau = 2;
  const Predictor p = fit_wavelet(d, fc);
  double lhs = 0.0;
  for (double w : p.wav.w) lhs += w * w;
  double rhs = 0.0;
  for (double y : d.Y) rhs += y * y;
  rhs /= static_cast<double>(d.n());
  CHECK(lhs <= rhs * 1.05);
}

TEST_CASE("wavelet fit validates domain, dimension, and table size") {
  FitConfig fc;
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("quadrant"), 16, 0.0, 3);
  CHECK_THROWS_AS(fit_wavelet(d, fc), ConfigError);  // not the unit cube
  fgen::Dataset u =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 16, 0.0, 3);
  fc.wavelet.tau = -1;
  CHECK_THROWS_AS(fit_wavelet(u, fc), ConfigError);
  fc.wavelet.tau = 13;  // 2^{14 * 2} slots: over the table budget
  CHECK_THROWS_AS(fit_wavelet(u, fc), ConfigError);
}

TEST_CASE("wavelet satisfies superposition in the responses") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 64, 0.1, 11);
  FitConfig fc;
  fc.wavelet.tau = 3;
  const double defect = superposition_defect(
      d, [&](const fgen::Dataset& data) { return fit_wavelet(data, fc); });
  CHECK(defect <= 1e-12);
}

// ---------------------------------------------------------------------------
// Gradient-trained networks
// ---------------------------------------------------------------------------

TEST_CASE("dnn fit drives a noiseless constant to zero loss") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 64, 0.0, 3);
  for (auto& y : d.Y) y = 0.7;
  FitConfig fc;
  fc.dnn.widths = {8, 8};
  fc.dnn.iters = 200;
  fc.dnn.restarts = 2;
  const Predictor p = fit_dnn_erm(d, fc, 17);
  CHECK(p.meta.final_loss <= 1e-6);
  CHECK(p.meta.net.L == 3);
  // Best-iterate tracking makes the recorded checkpoints non-increasing.
  for (std::size_t i = 1; i < p.meta.checkpoints.size(); ++i) {
    CHECK(p.meta.checkpoints[i] <= p.meta.checkpoints[i - 1]);
  }
}

TEST_CASE("dnn fit reaches the noise floor on the graph indicator") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("graph-indicator", 2), 2048, 0.1,
                        11);
  FitConfig fc;
  fc.dnn.widths = {64, 64, 64};
  fc.dnn.iters = 800;
  fc.dnn.restarts = 5;
  const Predictor p = fit_dnn_erm(d, fc, 99);
  // Training MSE below sigma^2 + 0.05; the pinned build lands near 0.018.
  CHECK(p.meta.final_loss < 0.01 + 0.05);
  CHECK(p.meta.net.L == 4);
  CHECK(p.meta.restarts == 5);
  // Predictions honor the clip.
  const auto pts = probe_points(d.domain, 128);
  for (std::size_t i = 0; i < 128; ++i) {
    CHECK(std::abs(p.predict(point(pts, 2, i))) <= fc.dnn.clip + 1e-12);
  }
}

TEST_CASE("dnn fit is bit-identical under a repeated seed") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("graph-indicator", 2), 256, 0.1, 5);
  FitConfig fc;
  fc.dnn.widths = {16, 16};
  fc.dnn.iters = 300;
  fc.dnn.restarts = 3;
  const Predictor a = fit_dnn_erm(d, fc, 42);
  const Predictor b = fit_dnn_erm(d, fc, 42);
  CHECK(network_to_json(a.net) == network_to_json(b.net));
  CHECK(a.meta.final_loss == b.meta.final_loss);
  const Predictor c = fit_dnn_erm(d, fc, 43);
  CHECK(network_to_json(c.net) != network_to_json(a.net));
}

TEST_CASE("dnn fit reports divergence with the last stable iterate") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("graph-indicator", 2), 256, 0.1, 5);
  FitConfig fc;
  fc.dnn.widths = {16, 16};
  fc.dnn.iters = 400;
  fc.dnn.restarts = 1;
  fc.dnn.learning_rate = 1e8;
  try {
    fit_dnn_erm(d, fc, 42);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(!e.last_stable_params.empty());
    for (double v : e.last_stable_params) CHECK(std::isfinite(v));
  }
}

// ---------------------------------------------------------------------------
// Curvelet frame
// ---------------------------------------------------------------------------

TEST_CASE("curvelet windows form an exact partition on their plateaus") {
  const auto frame = CurveletFrame::get(2, 1.0, 1.0, 64);
  // Low-pass region, the low-pass/first-annulus seam, and every annular
  // plateau (rho in [1.25, 1.75]) must sum to one; dead zones between
  // annuli are inherent to 4x radial steps of a [1,2]-supported window.
  for (double r : {0.5, 2.0, 4.0, 4.5, 5.0, 6.0, 7.0, 20.0, 24.0, 28.0}) {
    for (int t = 0; t < 41; ++t) {
      const double th = 2.0 * kPi * t / 41.0;
      double sum = 0.0;
      for (const auto& w : frame->wedges()) {
        const double c = frame->chi(w, r * std::cos(th), r * std::sin(th));
        sum += c * c;
      }
      CAPTURE(r);
      CAPTURE(th);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("curvelet truncation must stay below the grid Nyquist index") {
  CHECK_THROWS_AS(CurveletFrame::get(4, 1.0, 1.0, 256), ConfigError);
  CHECK_THROWS_AS(CurveletFrame::get(2, 1.0, 1.0, 48), ConfigError);
  CHECK_THROWS_AS(CurveletFrame::get(-1, 1.0, 1.0, 256), ConfigError);
  CHECK_NOTHROW(CurveletFrame::get(3, 1.0, 1.0, 256));
}

TEST_CASE("curvelet fit validates the domain and zero responses") {
  FitConfig fc;
  fc.curvelet.tau = 1;
  fc.curvelet.grid = 64;
  fgen::Dataset unit =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 16, 0.0, 3);
  CHECK_THROWS_AS(fit_curvelet(unit, fc), ConfigError);  // not [-1,1]^2

  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("quadrant"), 16, 0.0, 3);
  for (auto& y : d.Y) y = 0.0;
  const Predictor p = fit_curvelet(d, fc);
  for (double w : p.cur.w) CHECK(w == 0.0);
  const auto pts = probe_points(d.domain, 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(p.predict(point(pts, 2, i)) == 0.0);
  }
}

TEST_CASE("curvelet satisfies superposition in the responses") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("quadrant"), 64, 0.1, 13);
  FitConfig fc;
  fc.curvelet.tau = 1;
  fc.curvelet.grid = 64;
  const double defect = superposition_defect(
      d, [&](const fgen::Dataset& data) { return fit_curvelet(data, fc); });
  CHECK(defect <= 1e-12);
}

TEST_CASE("curvelet frame round-trips a band-limited ridge profile") {
  const int tau = 3, N = 256;
  const auto frame = CurveletFrame::get(tau, 1.0, 1.0, N);

  // A radial Gaussian ring centered on the second annular plateau:
  // fhat(k) = exp(-(|k| - 24)^2 / 2), real and even, so f is real.
  std::vector<std::array<int, 2>> ks;
  std::vector<double> fh;
  for (int k1 = -N / 2; k1 < N / 2; ++k1) {
    for (int k2 = -N / 2; k2 < N / 2; ++k2) {
      const double r = std::hypot(k1, k2);
      const double v = std::exp(-0.5 * (r - 24.0) * (r - 24.0));
      if (v < 1e-14) continue;
      ks.push_back({k1, k2});
      fh.push_back(v);
    }
  }

  // Analysis coefficients, computed spectrally (exactly): for lattice point
  // u = ((a+1/2) d1, b d2), w_u = (M1 M2)^{-1/2} sum_k fhat chi e^{i pi k u}.
  Predictor p;
  p.kind = PredictorKind::Curvelet;
  p.domain = quad::Box::symmetric(2);
  p.cur.tau = tau;
  p.cur.grid = N;
  p.cur.frame = frame;
  p.cur.w.assign(frame->coefficient_count(), 0.0);
  for (const auto& w : frame->wedges()) {
    const std::size_t M1 = static_cast<std::size_t>(w.M1);
    const std::size_t M2 = static_cast<std::size_t>(w.M2);
    std::vector<std::complex<double>> acc(M1 * M2, 0.0);
    std::vector<std::complex<double>> ph1(M1), ph2(M2);
    bool any = false;
    for (std::size_t i = 0; i < fh.size(); ++i) {
      const double c = frame->chi(w, ks[i][0], ks[i][1]);
      if (c == 0.0) continue;
      any = true;
      const std::complex<double> s1 = std::polar(1.0, kPi * ks[i][0] * w.d1);
      const std::complex<double> s2 = std::polar(1.0, kPi * ks[i][1] * w.d2);
      std::complex<double> cur = std::polar(1.0, kPi * ks[i][0] * 0.5 * w.d1);
      for (std::size_t a = 0; a < M1; ++a) {
        ph1[a] = cur;
        cur *= s1;
      }
      cur = 1.0;
      for (std::size_t b = 0; b < M2; ++b) {
        ph2[b] = cur;
        cur *= s2;
      }
      const double fv = fh[i] * c;
      for (std::size_t a = 0; a < M1; ++a) {
        const std::complex<double> row = fv * ph1[a];
        for (std::size_t b = 0; b < M2; ++b) acc[a * M2 + b] += row * ph2[b];
      }
    }
    if (!any) continue;
    const double s = 1.0 / std::sqrt(static_cast<double>(M1 * M2));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      p.cur.w[w.offset + i] = s * acc[i].real();
      CHECK(std::abs(acc[i].imag()) * s <= 1e-9);
    }
  }

  // Synthesis through the production prediction path on an off-grid
  // lattice, against the directly summed series.
  double num = 0.0, den = 0.0;
  for (int g1 = 0; g1 < 40; ++g1) {
    for (int g2 = 0; g2 < 40; ++g2) {
      const double x[2] = {-1.0 + 2.0 * (g1 + 0.37) / 40.0,
                           -1.0 + 2.0 * (g2 + 0.71) / 40.0};
      double ft = 0.0;
      for (std::size_t i = 0; i < fh.size(); ++i) {
        ft += fh[i] * std::cos(kPi * (ks[i][0] * x[0] + ks[i][1] * x[1]));
      }
      const double fr = p.predict(std::span<const double>(x, 2));
      num += (fr - ft) * (fr - ft);
      den += ft * ft;
    }
  }
  CHECK(std::sqrt(num / den) <= 0.05);
}

// ---------------------------------------------------------------------------
// Shared prediction and serialization behavior
// ---------------------------------------------------------------------------

TEST_CASE("predictor kinds parse and print consistently") {
  for (PredictorKind k :
       {PredictorKind::Dnn, PredictorKind::KernelRidge, PredictorKind::Wavelet,
        PredictorKind::Curvelet}) {
    CHECK(kind_parse(kind_name(k)) == k);
  }
  CHECK_THROWS_AS(kind_parse("spline"), ConfigError);
}

TEST_CASE("prediction validates dimension and domain membership") {
  fgen::Dataset d =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 32, 0.0, 3);
  FitConfig fc;
  const Predictor p = fit_wavelet(d, fc);
  const double bad3[3] = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(p.predict(std::span<const double>(bad3, 3)), ShapeError);
  const double outside[2] = {1.2, 0.5};
  CHECK_THROWS_AS(p.predict(std::span<const double>(outside, 2)), ConfigError);
  // Batch evaluation is exactly the per-point loop.
  const auto pts = probe_points(d.domain, 16);
  const auto batch = p.predict_batch(pts, 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(batch[i] == p.predict(point(pts, 2, i)));
  }
}

TEST_CASE("predictors of every kind survive a serialization round trip") {
  FitConfig fc;
  fc.dnn.widths = {8, 8};
  fc.dnn.iters = 100;
  fc.dnn.restarts = 1;
  fc.wavelet.tau = 2;
  fc.curvelet.tau = 1;
  fc.curvelet.grid = 64;

  fgen::Dataset unit =
      fgen::gen_dataset(fgen::named_target("rectangle", 2), 48, 0.1, 19);
  fgen::Dataset sym =
      fgen::gen_dataset(fgen::named_target("quadrant"), 48, 0.1, 19);

  std::vector<Predictor> fitted;
  fitted.push_back(fit_dnn_erm(unit, fc, 23));
  fitted.push_back(fit_kernel_ridge(unit, fc));
  fitted.push_back(fit_wavelet(unit, fc));
  fitted.push_back(fit_curvelet(sym, fc));

  for (const Predictor& p : fitted) {
    const std::string text = predictor_to_json(p);
    const Predictor q = predictor_from_json(text);
    CHECK(q.kind == p.kind);
    CHECK(q.meta.tau == p.meta.tau);
    const auto pts = probe_points(p.domain, 24);
    for (std::size_t i = 0; i < 24; ++i) {
      const auto x = point(pts, 2, i);
      CHECK(std::abs(q.predict(x) - p.predict(x)) <= 1e-12);
    }
  }
}
