// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"

namespace singlab::est {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Envelope tables are sampled this many times finer than the frequency
/// grid so the bicubic lookup error stays far below the crop threshold.
constexpr int kUpsample = 2;

/// Catmull-Rom cubic interpolation weights for fractional offset t.
void cubic_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

/// C^2 quintic blender: 0 below 0, 1 above 1, t^3(10 - 15t + 6t^2) between.
/// Symmetric: blend(t) + blend(1 - t) = 1.
double blend(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double rise(double t) { return std::sin(0.5 * kPi * blend(t)); }
double fall(double t) { return std::cos(0.5 * kPi * blend(t)); }

/// Radial annulus window, supported on [1,2]: C^2 ramps into a flat
/// plateau over [1.25, 1.75].
double omega_annulus(double rho) {
  if (rho <= 1.0 || rho >= 2.0) return 0.0;
  if (rho < 1.25) return rise((rho - 1.0) / 0.25);
  if (rho <= 1.75) return 1.0;
  return fall((rho - 1.75) / 0.25);
}

/// Isotropic low-pass window: flat to the start of the first annulus, then
/// the complementary ramp so core^2 + annulus_1^2 = 1 across the seam.
double omega_core(double r) {
  if (r <= 4.0) return 1.0;
  if (r >= 5.0) return 0.0;
  return fall((r / 4.0 - 1.0) / 0.25);
}

/// Angular mother window on s in [-3pi/2, pi/2]:
/// cos(pi/2 * B(s/pi + 1/2)) with B the staircase extension of the blender
/// (B(u) = blend(u) on [0,1], blend(u+1) - 1 on [-1,0]), which gives the
/// exact two-window partition |nu(s)|^2 + |nu(s - pi)|^2 = 1 for every s.
double nu_mother(double s) {
  const double u = s / kPi + 0.5;
  if (u <= -1.0 || u >= 1.0) return 0.0;
  const double B = u < 0.0 ? blend(u + 1.0) - 1.0 : blend(u);
  return std::cos(0.5 * kPi * B);
}

double wrap2(double v) {  // torus representative in [-1, 1)
  v = std::remainder(v, 2.0);
  return v == 1.0 ? -1.0 : v;
}

struct FrameKey {
  int tau;
  double d1, d2;
  int grid;
  bool operator<(const FrameKey& o) const {
    return std::tie(tau, d1, d2, grid) < std::tie(o.tau, o.d1, o.d2, o.grid);
  }
};

std::mutex g_frame_mutex;
std::map<FrameKey, std::weak_ptr<const CurveletFrame>>& frame_cache() {
  static std::map<FrameKey, std::weak_ptr<const CurveletFrame>> cache;
  return cache;
}

}  // namespace

double CurveletFrame::chi(const CurveletWedge& w, double k1, double k2) const {
  const double r = std::hypot(k1, k2);
  if (w.j == 0) return omega_core(r);
  const double rho = std::ldexp(r, -2 * w.j);
  const double rad = omega_annulus(rho);
  if (rad == 0.0) return 0.0;
  const double theta = std::atan2(k2, k1);
  const int n = 1 << w.j;  // wedges per half-turn at this scale
  const double center = kPi * w.l / n;
  const double a = nu_mother(n * std::remainder(theta - center, 2.0 * kPi));
  const double b =
      nu_mother(n * std::remainder(theta + kPi - center, 2.0 * kPi));
  return rad * (a + b);
}

void CurveletFrame::build(int tau, double delta1, double delta2, int grid) {
  tau_ = tau;
  grid_ = grid;
  delta1_ = delta1;
  delta2_ = delta2;
  const int N = grid;
  const int Nu = kUpsample * N;
  const std::size_t cells = static_cast<std::size_t>(Nu) *
                            static_cast<std::size_t>(Nu);

  // Wedge list: the isotropic low-pass core, then 2^j two-sided wedges per
  // annular scale j = 1..tau (window nu(2^j theta - pi l)).
  wedges_.clear();
  {
    CurveletWedge core;
    core.j = 0;
    core.l = 0;
    core.theta = 0.0;
    wedges_.push_back(core);
  }
  for (int j = 1; j <= tau; ++j) {
    const int n = 1 << j;
    for (int l = 0; l < n; ++l) {
      CurveletWedge w;
      w.j = j;
      w.l = l;
      w.theta = kPi * (2 * l - 1) / (2 * n);  // mother peak direction
      const double rc = 1.5 * std::ldexp(1.0, 2 * j);
      w.kc1 = std::round(rc * std::cos(w.theta));
      w.kc2 = std::round(rc * std::sin(w.theta));
      wedges_.push_back(w);
    }
  }

  fftw_complex* buf = fftw_alloc_complex(cells);
  if (buf == nullptr) throw ConfigError("curvelet: table allocation failed");
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(g_frame_mutex);
    plan = fftw_plan_dft_2d(Nu, Nu, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) {
    fftw_free(buf);
    throw ConfigError("curvelet: FFT plan creation failed");
  }

  tables_.assign(wedges_.size(), Table{});
  total_ = 0;
  for (std::size_t wi = 0; wi < wedges_.size(); ++wi) {
    CurveletWedge& w = wedges_[wi];

    // Pass 1: tabulate the single-lobe window chi+ over the frequency grid
    // (the full real window for the core), demodulated to the wedge center,
    // and record the axis-aligned support extent of the full window. The
    // window is even, so one lobe determines the two-sided extent.
    std::fill_n(&buf[0][0], 2 * cells, 0.0);
    int kmax1 = 0, kmax2 = 0;
    for (int k1 = -N / 2; k1 < N / 2; ++k1) {
      for (int k2 = -N / 2; k2 < N / 2; ++k2) {
        double v = 0.0;
        if (w.j == 0) {
          v = omega_core(std::hypot(k1, k2));
        } else {
          const double rho = std::ldexp(std::hypot(k1, k2), -2 * w.j);
          const double rad = omega_annulus(rho);
          if (rad == 0.0) continue;
          const int n = 1 << w.j;
          const double center = kPi * w.l / n;
          v = rad * nu_mother(n * std::remainder(std::atan2(k2, k1) - center,
                                                 2.0 * kPi));
        }
        if (v == 0.0) continue;
        kmax1 = std::max(kmax1, std::abs(k1));
        kmax2 = std::max(kmax2, std::abs(k2));
        const auto m1 = static_cast<long long>(k1 - w.kc1);
        const auto m2 = static_cast<long long>(k2 - w.kc2);
        if (m1 <= -Nu / 2 || m1 >= Nu / 2 || m2 <= -Nu / 2 || m2 >= Nu / 2) {
          throw ConfigError(
              "curvelet: envelope bandwidth exceeds the table grid");
        }
        const auto i1 = static_cast<std::size_t>((m1 + Nu) % Nu);
        const auto i2 = static_cast<std::size_t>((m2 + Nu) % Nu);
        const double sign = ((m1 + m2) % 2 == 0) ? 1.0 : -1.0;
        buf[i1 * static_cast<std::size_t>(Nu) + i2][0] = v * sign;
      }
    }

    // Location lattice: exponentials on the axis-aligned rectangle covering
    // the two-sided support, i.e. Nyquist counts 2 kmax + 1 scaled by the
    // spacing multipliers. At delta <= 1 distinct frequencies never alias
    // through the lattice, which makes the frame reproduction exact.
    w.M1 = std::max(1, static_cast<int>(std::ceil((2 * kmax1 + 1) / delta1)));
    w.M2 = std::max(1, static_cast<int>(std::ceil((2 * kmax2 + 1) / delta2)));
    w.d1 = 2.0 / w.M1;
    w.d2 = 2.0 / w.M2;
    w.offset = total_;
    total_ += static_cast<std::size_t>(w.M1) * static_cast<std::size_t>(w.M2);

    // Pass 2: the demodulated spatial envelope
    // env(y) = sum_k chi+(k) e^{i pi (k - kc) y} on the upsampled spatial
    // grid via one zero-padded inverse FFT, cropped to the region where
    // |env| exceeds a small fraction of its peak.
    fftw_execute(plan);
    double amax = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      amax = std::max(amax, std::hypot(buf[c][0], buf[c][1]));
    }
    const double tol = 2e-3 * amax;
    double r1 = 0.0, r2 = 0.0;
    int lo1 = Nu, hi1 = -1, lo2 = Nu, hi2 = -1;
    for (int g1 = 0; g1 < Nu; ++g1) {
      const double y1 = -1.0 + 2.0 * g1 / Nu;
      for (int g2 = 0; g2 < Nu; ++g2) {
        const std::size_t c = static_cast<std::size_t>(g1) *
                                  static_cast<std::size_t>(Nu) +
                              static_cast<std::size_t>(g2);
        if (std::hypot(buf[c][0], buf[c][1]) <= tol) continue;
        const double y2 = -1.0 + 2.0 * g2 / Nu;
        r1 = std::max(r1, std::abs(y1));
        r2 = std::max(r2, std::abs(y2));
        lo1 = std::min(lo1, g1);
        hi1 = std::max(hi1, g1);
        lo2 = std::min(lo2, g2);
        hi2 = std::max(hi2, g2);
      }
    }
    if (hi1 < lo1) {  // degenerate window; keep a single zero cell
      lo1 = lo2 = 0;
      hi1 = hi2 = 0;
    }
    lo1 = std::max(lo1 - 3, 0);
    lo2 = std::max(lo2 - 3, 0);
    hi1 = std::min(hi1 + 3, Nu - 1);
    hi2 = std::min(hi2 + 3, Nu - 1);

    Table& t = tables_[wi];
    t.lo1 = lo1;
    t.lo2 = lo2;
    t.n1 = hi1 - lo1 + 1;
    t.n2 = hi2 - lo2 + 1;
    t.re.resize(static_cast<std::size_t>(t.n1) * t.n2);
    t.im.resize(static_cast<std::size_t>(t.n1) * t.n2);
    for (int g1 = lo1; g1 <= hi1; ++g1) {
      for (int g2 = lo2; g2 <= hi2; ++g2) {
        const std::size_t src = static_cast<std::size_t>(g1) *
                                    static_cast<std::size_t>(Nu) +
                                static_cast<std::size_t>(g2);
        const std::size_t dst = static_cast<std::size_t>(g1 - lo1) * t.n2 +
                                static_cast<std::size_t>(g2 - lo2);
        t.re[dst] = buf[src][0];
        t.im[dst] = buf[src][1];
      }
    }

    w.r1 = std::min(r1 + std::max(w.d1, 4.0 / Nu), 1.0);
    w.r2 = std::min(r2 + std::max(w.d2, 4.0 / Nu), 1.0);
  }

  {
    std::lock_guard<std::mutex> lock(g_frame_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

std::shared_ptr<const CurveletFrame> CurveletFrame::get(int tau, double delta1,
                                                        double delta2,
                                                        int grid) {
  if (tau < 0) throw ConfigError("curvelet: truncation must be >= 0");
  if (delta1 <= 0.0 || delta2 <= 0.0) {
    throw ConfigError("curvelet: location spacings must be positive");
  }
  if (grid < 16 || (grid & (grid - 1)) != 0) {
    throw ConfigError("curvelet: frequency grid must be a power of two >= 16");
  }
  // The top annulus support reaches 2^{2 tau + 1}; it must fit below the
  // Nyquist index of the grid.
  if (tau > 14 || (1LL << (2 * tau + 1)) > grid / 2) {
    throw ConfigError(
        "curvelet: truncation " + std::to_string(tau) +
        " needs frequencies past Nyquist of the " + std::to_string(grid) +
        "-point grid");
  }

  const FrameKey key{tau, delta1, delta2, grid};
  {
    std::lock_guard<std::mutex> lock(g_frame_mutex);
    auto it = frame_cache().find(key);
    if (it != frame_cache().end()) {
      if (auto hit = it->second.lock()) return hit;
    }
  }
  std::shared_ptr<CurveletFrame> frame(new CurveletFrame());
  frame->build(tau, delta1, delta2, grid);
  std::shared_ptr<const CurveletFrame> out = frame;
  {
    std::lock_guard<std::mutex> lock(g_frame_mutex);
    frame_cache()[key] = out;
  }
  return out;
}

double CurveletFrame::envelope(const CurveletWedge& w, double y1, double y2,
                               double& im) const {
  const int Nu = kUpsample * grid_;
  const Table& t = tables_[static_cast<std::size_t>(&w - wedges_.data())];
  const double g1 = (y1 + 1.0) * 0.5 * Nu;
  const double g2 = (y2 + 1.0) * 0.5 * Nu;
  const double f1 = std::floor(g1), f2 = std::floor(g2);
  double wu[4], wv[4];
  cubic_weights(g1 - f1, wu);
  cubic_weights(g2 - f2, wv);
  const int base1 = static_cast<int>(f1) - 1;
  const int base2 = static_cast<int>(f2) - 1;
  double re = 0.0;
  im = 0.0;
  for (int i = 0; i < 4; ++i) {
    int g = base1 + i;
    g = ((g % Nu) + Nu) % Nu;
    const int r = g - t.lo1;
    if (r < 0 || r >= t.n1) continue;  // cropped away: below threshold
    const std::size_t row = static_cast<std::size_t>(r) * t.n2;
    for (int q = 0; q < 4; ++q) {
      int h = base2 + q;
      h = ((h % Nu) + Nu) % Nu;
      const int c = h - t.lo2;
      if (c < 0 || c >= t.n2) continue;
      const double wgt = wu[i] * wv[q];
      re += wgt * t.re[row + c];
      im += wgt * t.im[row + c];
    }
  }
  return re;
}

double CurveletFrame::gamma(const CurveletWedge& w, int a, int b,
                            std::span<const double> x) const {
  const double y1 = wrap2(x[0] - (a + 0.5) * w.d1);
  const double y2 = wrap2(x[1] - b * w.d2);
  double im = 0.0;
  const double re = envelope(w, y1, y2, im);
  const double phase = kPi * (w.kc1 * y1 + w.kc2 * y2);
  const double scale = (w.j == 0 ? 1.0 : 2.0) /
                       std::sqrt(static_cast<double>(w.M1) *
                                 static_cast<double>(w.M2));
  return scale * (re * std::cos(phase) - im * std::sin(phase));
}

template <typename Sink>
void CurveletFrame::for_each_slot(const CurveletWedge& w,
                                  std::span<const double> x,
                                  Sink&& sink) const {
  const double scale = (w.j == 0 ? 1.0 : 2.0) /
                       std::sqrt(static_cast<double>(w.M1) *
                                 static_cast<double>(w.M2));
  // Lattice points are u = ((a + 1/2) d1, b d2); candidates come from the
  // axis-aligned window |x + shift - u| <= r per axis, one torus image at
  // a time. Window radii below half the period keep the images disjoint.
  const bool full = 2.0 * w.r1 >= 2.0 - w.d1 || 2.0 * w.r2 >= 2.0 - w.d2;
  for (int sh1 = -2; sh1 <= 2; sh1 += 2) {
    for (int sh2 = -2; sh2 <= 2; sh2 += 2) {
      const double p1 = x[0] + sh1;
      const double p2 = x[1] + sh2;
      int alo, ahi, blo, bhi;
      if (full) {
        if (sh1 != 0 || sh2 != 0) continue;
        alo = 0;
        ahi = w.M1 - 1;
        blo = 0;
        bhi = w.M2 - 1;
      } else {
        alo = static_cast<int>(std::ceil((p1 - w.r1) / w.d1 - 0.5));
        ahi = static_cast<int>(std::floor((p1 + w.r1) / w.d1 - 0.5));
        blo = static_cast<int>(std::ceil((p2 - w.r2) / w.d2));
        bhi = static_cast<int>(std::floor((p2 + w.r2) / w.d2));
        alo = std::max(alo, 0);
        ahi = std::min(ahi, w.M1 - 1);
        blo = std::max(blo, 0);
        bhi = std::min(bhi, w.M2 - 1);
        if (alo > ahi || blo > bhi) continue;
      }
      for (int a = alo; a <= ahi; ++a) {
        const double ya = full ? wrap2(x[0] - (a + 0.5) * w.d1)
                               : p1 - (a + 0.5) * w.d1;
        for (int b = blo; b <= bhi; ++b) {
          const double yb =
              full ? wrap2(x[1] - b * w.d2) : p2 - b * w.d2;
          double im = 0.0;
          const double re = envelope(w, wrap2(ya), wrap2(yb), im);
          const double phase = kPi * (w.kc1 * ya + w.kc2 * yb);
          const double g =
              scale * (re * std::cos(phase) - im * std::sin(phase));
          sink(w.offset + static_cast<std::size_t>(a) *
                              static_cast<std::size_t>(w.M2) +
                   static_cast<std::size_t>(b),
               g);
        }
      }
    }
  }
}

void CurveletFrame::scatter(std::span<const double> x, double s,
                            std::span<double> coeff) const {
  for (const CurveletWedge& w : wedges_) {
    for_each_slot(w, x,
                  [&](std::size_t slot, double g) { coeff[slot] += s * g; });
  }
}

double CurveletFrame::synth(std::span<const double> x,
                            std::span<const double> coeff) const {
  double total = 0.0;
  for (const CurveletWedge& w : wedges_) {
    for_each_slot(
        w, x, [&](std::size_t slot, double g) { total += coeff[slot] * g; });
  }
  return total;
}

Predictor fit_curvelet(const fgen::Dataset& data, const FitConfig& cfg) {
  const CurveletConfig& cc = cfg.curvelet;
  if (data.D != 2) {
    throw ConfigError("curvelet: the frame is two-dimensional");
  }
  const quad::Box want = quad::Box::symmetric(2);
  if (data.domain.lo != want.lo || data.domain.hi != want.hi) {
    throw ConfigError("curvelet: the frame is defined on [-1,1]^2");
  }
  const std::size_t n = data.n();
  if (n == 0) throw ConfigError("curvelet: empty dataset");

  Predictor p;
  p.kind = PredictorKind::Curvelet;
  p.domain = data.domain;
  p.cur.tau = cc.tau;
  p.cur.delta1 = cc.delta1;
  p.cur.delta2 = cc.delta2;
  p.cur.grid = cc.grid;
  p.cur.frame = CurveletFrame::get(cc.tau, cc.delta1, cc.delta2, cc.grid);
  p.cur.w.assign(p.cur.frame->coefficient_count(), 0.0);
  p.meta.tau = cc.tau;

  const double invn = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.cur.frame->scatter(data.x(i), data.Y[i] * invn, p.cur.w);
  }

  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = p.cur.frame->synth(data.x(i), p.cur.w) - data.Y[i];
    sse += r * r;
  }
  p.meta.final_loss = sse * invn;
  return p;
}

}  // namespace singlab::est
