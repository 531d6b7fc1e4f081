// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "singlab/activation.hpp"
#include "singlab/funcgen.hpp"
#include "singlab/network.hpp"
#include "singlab/quadrature.hpp"

namespace singlab::est {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class PredictorKind { Dnn, KernelRidge, Wavelet, Curvelet };

std::string kind_name(PredictorKind kind);
PredictorKind kind_parse(const std::string& name);

struct DnnConfig {
  std::vector<int> widths = {64, 64, 64};  // hidden widths; L = widths+1 maps
  Activation act = Activation::relu();
  double clip = 2.0;            // predictions clamped to [-clip, clip]
  double learning_rate = 0.05;  // base step size (decays late in the run)
  double momentum = 0.9;
  long long iters = 2000;       // full-batch gradient steps
  int restarts = 5;             // random restarts, best kept
  double explore_fraction = 0.2;  // share of iters each restart runs before
                                  // the best one is trained to completion
  double gap_target = 1e-6;  // stop once the trailing-5% loss decrease
                             // falls below this (only past half budget)
};

struct KernelRidgeConfig {
  std::string kernel = "gaussian";
  double bandwidth = 0.25;
  double lambda = 1e-3;
};

struct WaveletConfig {
  int tau = 3;  // detail levels 0..tau per axis, plus the scaling level
};

struct CurveletConfig {
  int tau = 2;          // annular scales 1..tau (plus the isotropic core)
  double delta1 = 1.0;  // location spacing multiplier, ridge direction
  double delta2 = 1.0;  // location spacing multiplier, across the ridge
  int grid = 256;       // frequency / table grid size N (power of two)
};

/// One bundle for all four fitters; each reads only its own section.
struct FitConfig {
  DnnConfig dnn;
  KernelRidgeConfig kernel;
  WaveletConfig wavelet;
  CurveletConfig curvelet;
};

// ---------------------------------------------------------------------------
// Fitted state
// ---------------------------------------------------------------------------

struct FitMeta {
  double final_loss = 0.0;   // training MSE of the returned parameters
  long long iterations = 0;  // optimizer steps taken on the winning path
  double gap = 0.0;          // loss decrease over the last 5% of iterations
  int tau = -1;              // series truncation (wavelet / curvelet)
  double lambda = 0.0;       // ridge parameter (kernel ridge)
  double bandwidth = 0.0;    // kernel bandwidth (kernel ridge)
  std::uint64_t seed = 0;    // training seed (dnn)
  int restarts = 0;          // random restarts run (dnn)
  SizeMetrics net;           // L, S, B of the fitted network (dnn)
  std::vector<double> checkpoints;  // best-loss snapshots, non-increasing
};

struct KernelRidgeState {
  int D = 0;
  double bandwidth = 0.0;
  double lambda = 0.0;
  std::vector<double> X;  // stored design, row-major n x D
  std::vector<double> a;  // dual weights, length n
};

/// Tensor Haar coefficients. Per-axis indices are laid out dyadically:
/// slot 0 is the scaling function on [0,1]; slot 2^j + k (j in [0,tau],
/// k in [0,2^j)) is the Haar wavelet at level j, translate k. The flat
/// table has stride 2^{tau+1} per axis.
struct WaveletState {
  int D = 0;
  int tau = 0;
  std::vector<double> w;

  int per_axis() const { return 1 << (tau + 1); }
};

/// Precomputed frequency tiling shared by curvelet predictors: polar
/// windows on an N x N integer frequency grid, one complex demodulated
/// spatial envelope table per wedge, and the per-wedge location lattice.
/// Immutable after construction; rebuilt deterministically on load.
class CurveletFrame;

struct CurveletWedge {
  int j = 0;      // 0 = isotropic core, 1..tau = annular scales
  int l = 0;      // angular index within the scale
  double theta = 0.0;   // wedge axis direction
  double kc1 = 0.0, kc2 = 0.0;  // integer center frequency (demodulation)
  int M1 = 1, M2 = 1;           // location lattice counts per axis
  double d1 = 0.0, d2 = 0.0;    // lattice spacings; u = ((a+1/2) d1, b d2)
  double r1 = 0.0, r2 = 0.0;    // axis-aligned envelope gather radii
  std::size_t offset = 0;       // first coefficient slot of this wedge
};

struct CurveletState {
  int tau = 0;
  double delta1 = 1.0, delta2 = 1.0;
  int grid = 256;
  std::vector<double> w;  // flat over all wedges' location lattices
  std::shared_ptr<const CurveletFrame> frame;
};

/// A fitted estimator of one of the four kinds. Exactly the state matching
/// `kind` is populated. Evaluation is deterministic; the kernel-ridge,
/// wavelet, and curvelet kinds are linear in the training responses.
struct Predictor {
  PredictorKind kind = PredictorKind::Wavelet;
  quad::Box domain;
  FitMeta meta;

  Network net;  // dnn
  KernelRidgeState krr;
  WaveletState wav;
  CurveletState cur;

  double predict(std::span<const double> x) const;
  /// Row-major batch evaluation; exactly the per-point loop.
  std::vector<double> predict_batch(std::span<const double> X,
                                    std::size_t n) const;
};

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Approximate empirical risk minimization: full-batch gradient descent
/// with momentum on the mean squared error, `restarts` random starts each
/// explored for a fraction of the budget, the best continued to the end.
/// The best iterate seen is kept, so recorded checkpoint losses are
/// non-increasing; the decrease over the last 5% of iterations is recorded
/// as the optimization-gap estimate. A non-finite loss raises
/// DivergenceError carrying the last stable parameters.
Predictor fit_dnn_erm(const fgen::Dataset& data, const FitConfig& cfg,
                      std::uint64_t seed);

/// Dual weights a = (K + n lambda I)^{-1} Y for the Gaussian kernel;
/// prediction sum_i a_i k(x, X_i). Requires lambda > 0.
Predictor fit_kernel_ridge(const fgen::Dataset& data, const FitConfig& cfg);

/// Truncated tensor Haar series on I^D: each coefficient is the empirical
/// mean n^{-1} sum_i Y_i Phi(X_i).
Predictor fit_wavelet(const fgen::Dataset& data, const FitConfig& cfg);

/// Truncated curvelet frame sum on [-1,1]^2: empirical coefficients
/// n^{-1} sum_i Y_i gamma_mu(X_i) over all wedges and location lattices.
/// Raises ConfigError when 2^{2 tau + 1} exceeds the grid Nyquist index.
Predictor fit_curvelet(const fgen::Dataset& data, const FitConfig& cfg);

/// Pointwise evaluation; throws ShapeError on dimension mismatch and
/// ConfigError when x lies outside the predictor's domain.
double predict(const Predictor& p, std::span<const double> x);

// ---------------------------------------------------------------------------
// Serialization: one JSON document per predictor. The network rides in the
// network-file format; coefficient tables and the stored design ride as
// embedded CSV blocks (index columns + value).
// ---------------------------------------------------------------------------

std::string predictor_to_json(const Predictor& p);
Predictor predictor_from_json(const std::string& text);
void save_predictor(const Predictor& p, const std::string& path);
Predictor load_predictor(const std::string& path);

// ---------------------------------------------------------------------------
// Internals shared with tests
// ---------------------------------------------------------------------------

/// Value of the per-axis Haar basis slot (see WaveletState) at x in [0,1].
double haar_slot_value(int slot, double x);

/// The (up to tau+2) per-axis slots active at x, with their values.
void haar_active_slots(int tau, double x, std::vector<int>& slots,
                       std::vector<double>& values);

class CurveletFrame {
 public:
  /// Builds the tiling for the given truncation and grid. Throws
  /// ConfigError when the top annulus does not fit below Nyquist.
  static std::shared_ptr<const CurveletFrame> get(int tau, double delta1,
                                                  double delta2, int grid);

  const std::vector<CurveletWedge>& wedges() const { return wedges_; }
  std::size_t coefficient_count() const { return total_; }
  int grid_size() const { return grid_; }

  /// Polar window of wedge w at integer frequency (k1, k2).
  double chi(const CurveletWedge& w, double k1, double k2) const;

  /// gamma_mu(x) for the wedge's lattice point (a, b); x in [-1,1]^2.
  double gamma(const CurveletWedge& w, int a, int b,
               std::span<const double> x) const;

  /// Accumulates s * gamma_mu(x) into every coefficient slot mu whose
  /// envelope window reaches x (the gather used by fit and predict).
  void scatter(std::span<const double> x, double s,
               std::span<double> coeff) const;

  /// sum_mu coeff_mu * gamma_mu(x), gathered the same way.
  double synth(std::span<const double> x,
               std::span<const double> coeff) const;

 private:
  CurveletFrame() = default;
  void build(int tau, double delta1, double delta2, int grid);

  struct Table {  // complex envelope, upsampled and cropped spatial grid
    int lo1 = 0, lo2 = 0;  // first stored row / column (upsampled index)
    int n1 = 0, n2 = 0;    // stored extent per axis
    std::vector<double> re, im;  // row-major n1 x n2
  };
  double envelope(const CurveletWedge& w, double y1, double y2, double& im)
      const;
  /// Visits every coefficient slot of wedge w whose envelope window
  /// reaches x, handing (slot, gamma_mu(x)) to the sink.
  template <typename Sink>
  void for_each_slot(const CurveletWedge& w, std::span<const double> x,
                     Sink&& sink) const;

  int tau_ = 0, grid_ = 0;
  double delta1_ = 1.0, delta2_ = 1.0;
  std::vector<CurveletWedge> wedges_;
  std::vector<Table> tables_;
  std::size_t total_ = 0;
};

}  // namespace singlab::est
