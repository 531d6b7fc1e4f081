// SPDX-License-Identifier: MIT
//
// Experiment harness: L2 error measurement against a known target,
// convergence-rate sweeps over the sample size, approximation sweeps over
// the parameter count of the explicit constructions, log-log slope fitting,
// and the closed-form rate/entropy calculators the sweeps are compared to.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "singlab/activation.hpp"
#include "singlab/estimators.hpp"
#include "singlab/funcgen.hpp"
#include "singlab/quadrature.hpp"

namespace singlab::harness {

// ---------------------------------------------------------------------------
// Closed-form calculators
// ---------------------------------------------------------------------------

/// Squared-error convergence exponents for a piecewise-smooth target with
/// piece smoothness beta, boundary smoothness alpha, in dimension D, plus
/// the parameter-regime flags that say which floors bind.
struct TheoreticalRates {
  double dnn = 0.0;          ///< min(2b/(2b+D), a/(a+D-1))
  double linear_floor = 0.0; ///< a/(2a+D-1), best exponent any linear
                             ///< smoother can achieve on the class
  double wavelet_floor = 0.5;        ///< binding when its flag is set
  double curvelet_floor = 1.0 / 3.0; ///< binding when its flag is set
  bool wavelet_floor_active = false;  ///< beta > D/2 and alpha > D-1
  bool curvelet_floor_active = false; ///< D=2, beta > D/4, alpha > (D-1)/2
  bool linear_suboptimal = false;     ///< alpha < 2 beta (D-1)/D: no linear
                                      ///< method can match the dnn exponent
};

/// Throws ConfigError unless alpha >= 1, beta >= 1, D >= 2.
TheoreticalRates theoretical_rates(double alpha, double beta, int D);

/// log covering number bound for the network class with L affine maps,
/// S nonzero parameters, and magnitude bound B at radius eps:
/// S log(2 L B^L (S+1)^L / eps), evaluated in log space.
double covering_bound(double L, double S, double B, double eps);

/// Order-of-magnitude packing count eps^{-D/beta} + eps^{-2 alpha/(D-1)}.
/// Throws ConfigError unless eps in (0,1], alpha >= 2, beta >= 2, D >= 2.
double packing_rate(double eps, double alpha, double beta, int D);

// ---------------------------------------------------------------------------
// Error measurement
// ---------------------------------------------------------------------------

/// QMC (Halton) estimate of the squared L2 error E[(pred(X) - f(X))^2]
/// under the uniform design on `domain`. Deterministic for fixed points.
/// Throws ConfigError if points < 2^10 or if the predictor, the target,
/// and `domain` do not all agree on the integration region.
double l2_error(const est::Predictor& pred, const fgen::PiecewiseSmoothFn& f,
                const quad::Box& domain, std::uint64_t points);

// ---------------------------------------------------------------------------
// Rate tables and slope fitting
// ---------------------------------------------------------------------------

/// One aggregated sweep cell. `n` is the sample size (rate sweeps) or the
/// nonzero-parameter count of the built network (approximation sweeps).
struct RateRow {
  std::uint64_t n = 0;
  int reps = 0;    ///< replicates that completed and were aggregated
  int failed = 0;  ///< replicates that threw (excluded from the mean)
  double mean_sq_err = 0.0;
  double std_err = 0.0;  ///< standard error of the mean over replicates
};

/// Ordinary least squares of log(mean error) on log(n).
struct SlopeFit {
  bool ok = false;
  double slope = 0.0;
  double std_err = 0.0;  ///< from residuals (0 for an exact power law)
  double intercept = 0.0;
  int used = 0;      ///< rows entering the regression
  int excluded = 0;  ///< rows dropped: no successful reps or error <= 0
};

/// Sweep result. Rate sweeps store squared L2 error, so slopes compare to
/// the negated exponents in TheoreticalRates; approximation sweeps store
/// the unsquared L2 error, so slopes compare to -beta/D (smooth) or
/// -alpha/(2(D-1)) (indicator), as recorded in `theoretical_exponent`.
struct RateTable {
  std::string estimator;
  std::string target;
  double alpha = 1.0;
  double beta = 1.0;
  int D = 2;
  std::vector<RateRow> rows;  ///< sorted by n
  SlopeFit slope;
  double theoretical_exponent = 0.0;
  std::string exponent_source;
  TheoreticalRates rates;
  bool monotone = true;    ///< mean error at largest n below smallest n
  bool degenerate = false; ///< too few usable rows to fit a slope
  std::vector<std::string> warnings;
};

/// OLS on (log n, log mean_sq_err) over rows with reps >= 1 and positive
/// mean error; other rows are counted in `excluded`. Throws ConfigError
/// when fewer than 3 usable rows remain.
SlopeFit fit_slope(const std::vector<RateRow>& rows);

// ---------------------------------------------------------------------------
// Convergence-rate sweeps over n
// ---------------------------------------------------------------------------

/// Estimator choice plus the automatic per-n policies of a sweep. With
/// `auto_policy` set (the default), sweeps derive per-n settings:
///   - dnn: hidden widths sized so the dense parameter count tracks the
///     budget scale * (M n^{D/(2b+D)} + n^{(D-1)/(a+D-1)}) log2(n)^2;
///   - wavelet/curvelet: truncation tuned per n over `tau_grid` on a
///     held-out tuning replicate against the true target;
///   - kernel-ridge: bandwidth and ridge tuned per replicate over the two
///     grids, fitting on a subsample capped at `tune_subsample`, scored
///     against the true target, then refit at full n.
/// Tuning scores and the final per-cell errors use `tune_points` and
/// `l2_points` QMC points respectively; l2_points = 0 selects 2^16 for
/// one-piece targets, 2^17 for discontinuous ones, and 2^13 for curvelet
/// predictors (whose synthesis cost per point is milliseconds).
struct SweepConfig {
  est::PredictorKind kind = est::PredictorKind::Dnn;
  est::FitConfig fit;
  bool auto_policy = true;
  std::vector<int> tau_grid = {0, 1, 2, 3, 4, 5};
  std::vector<double> bandwidth_grid = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> lambda_grid = {1e-5, 1e-3, 1e-1};
  double dnn_budget_scale = 0.25;
  int dnn_min_width = 8;
  int dnn_max_width = 64;
  std::uint64_t l2_points = 0;
  std::uint64_t tune_points = 1 << 12;
  std::size_t tune_subsample = 2048;
  int workers = 1;
};

/// For each n in `ns` (strictly increasing) and each replicate: draw a
/// fresh dataset with the cell seed derived from (master_seed, n, rep),
/// fit, and measure the squared L2 error. Cells whose fit throws are
/// recorded as failed, not fatal. Results are independent of the worker
/// count and identical for identical inputs.
RateTable rate_sweep(const SweepConfig& cfg,
                     const fgen::PiecewiseSmoothFn& target,
                     const std::vector<std::uint64_t>& ns, int reps,
                     double sigma, std::uint64_t master_seed);

// ---------------------------------------------------------------------------
// Approximation sweeps over S
// ---------------------------------------------------------------------------

/// Which explicit construction an approximation sweep drives:
///   "smooth"    - grid-of-cubes Taylor net for the target's first piece
///                 function on the whole domain; slope target -beta/D;
///   "indicator" - smoothed indicator of the target's first piece; slope
///                 target -alpha/(2(D-1));
///   "piecewise" - full piecewise-smooth assembly; slope target
///                 min(beta/D, alpha/(2(D-1))).
struct ApproxSweepConfig {
  std::string builder = "smooth";
  Activation act = Activation::parse("relu");
  std::uint64_t points = 1 << 16;  ///< QMC budget for the measured error
};

/// Builds the construction at every tolerance in `eps_grid` (strictly
/// decreasing), measures the unsquared L2 error against the target by QMC,
/// and regresses it on the measured nonzero-parameter count.
RateTable approx_sweep(const ApproxSweepConfig& cfg,
                       const fgen::PiecewiseSmoothFn& target,
                       const std::vector<double>& eps_grid);

// ---------------------------------------------------------------------------
// Table output
// ---------------------------------------------------------------------------

/// CSV with the fixed column set
/// estimator,target,alpha,beta,D,n,reps,mean_sq_err,stderr
/// (one line per row, doubles at full round-trip precision).
std::string rate_csv(const RateTable& table);

/// JSON summary: slope, slope_stderr, theoretical exponent and source,
/// regime flags, failure counts, and warnings.
std::string rate_summary_json(const RateTable& table);

/// Minimal log-log SVG scatter with the fitted line and the theoretical
/// reference slope anchored at the first usable row.
std::string rate_svg(const RateTable& table);

}  // namespace singlab::harness
