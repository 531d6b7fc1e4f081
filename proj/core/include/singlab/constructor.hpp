// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "singlab/funcgen.hpp"
#include "singlab/network.hpp"
#include "singlab/quadrature.hpp"

namespace singlab::ctor {

/// What a composite builder did: the network, the bound it is entitled to
/// claim for its parameters, and the error actually measured on the declared
/// grid. `params` records every internal knob so a report is reproducible.
struct ApproxReport {
  Network net;
  std::string target;
  std::string metric;  // "sup" or "l2"
  double claimed = 0.0;
  double measured = 0.0;
  std::uint64_t grid = 0;
  std::map<std::string, double> params;
};

// ---------------------------------------------------------------------------
// Exact piecewise-linear unit constructions (require a piecewise-linear
// activation; smooth activations raise UnsupportedConstruction).
// ---------------------------------------------------------------------------

/// Tent map: 2x on [0,1/2], 2-2x on [1/2,1]. Exact; depth 2, S <= 6.
Network teeth_net(const Activation& act);

/// t-fold composition of the tent map: 2^{t-1} tents over [0,1]. Exact.
Network sawtooth_net(int t, const Activation& act);

/// Approximate squarer on [0,1]: x - sum_{t<=m} sawtooth_t(x)/4^t, realized
/// with a constant-width carry chain. Sup error over [0,1] is exactly
/// 2^{-2-2m}.
Network square_net(int m, const Activation& act);

/// Two-input product on [-T,T]^2 via the polarization identity
/// vw = ((v+w)^2 - v^2 - w^2)/2 over three squarer chains; sup error
/// <= T^2 2^{-2m}. Exactly zero when either input is zero.
Network mult_net(int m, double T, const Activation& act);

/// Product for asymmetric ranges v in [-Tv,Tv], w in [-Tw,Tw]; sup error
/// <= Tv Tw 2^{-2m}.
Network mult_net_scaled(int m, double Tv, double Tw, const Activation& act);

/// Dp-input product on [-T,T]^Dp by left-nested pairing; sup error
/// <= Dp T^2 2^{-2m}. Dp = 2 returns mult_net verbatim.
Network multi_mult_net(int m, double T, int Dp, const Activation& act);

/// x^gamma on [-T,T] with sup error <= eps. Piecewise-linear activations:
/// gamma = 0 and 1 are exact, gamma >= 2 goes through multi_mult_net.
/// Smooth activations: one hidden layer of gamma+1 units realizing a scaled
/// finite difference of the activation (needs derivative order gamma+1).
Network monomial_net(int gamma, double eps, double T, const Activation& act);

struct StepNetInfo {
  Network net;
  double a = 0.0;        // steepness
  double kappa = 0.0;    // piecewise-linear unit-pair slope (0 on smooth path)
  double delta = 0.0;    // 1/kappa (0 on smooth path)
  double claimed = 0.0;  // L2 bound the construction guarantees (<= requested)
  double closed_form = 0.0;  // analytic L2 error of the built network
};

/// Heaviside approximation with ||g_s - 1_{x>=0}||_{L2[-T,T]} <= eps.
/// Piecewise-linear: an exact linear ramp of width delta/a^2 (exact 0 and 1
/// plateaus outside it), whose L2 error is delta^{1/2}/(12^{1/2} a). Smooth,
/// tail degree 0: eta(a x). Smooth, tail degree 1:
/// eta(a x + 1/2) - eta(a x - 1/2).
StepNetInfo step_net(double eps, double T, const Activation& act);

// Closed forms and bounds used by the builders and frozen in tests.
double teeth_closed_form(double x);
double sawtooth_closed_form(int t, double x);
double square_closed_form(int m, double x);
double square_error_bound(int m);
double mult_error_bound(int m, double T);
double mult_scaled_error_bound(int m, double Tv, double Tw);
double multi_mult_error_bound(int m, double T, int Dp);
double step_ramp_l2(double a, double delta);

// ---------------------------------------------------------------------------
// Composite constructions.
// ---------------------------------------------------------------------------

/// Smoothed indicator of the axis-aligned cube of the given side length
/// centered at `center`, built from per-axis step-net bands combined by the
/// multi-input product. L2 error vs the exact indicator is O(D eps) with the
/// band mass; bands of adjacent cubes on a grid sum to one exactly.
Network cube_indicator_net(std::span<const double> center, double side,
                           double eps, const Activation& act);

/// step(+-(x_axis - h(x_rest))) on I^D: a smoothed indicator of the region
/// above (above=true) or below the graph of h_net. h_net takes the D-1
/// non-axis coordinates in increasing index order.
Network halfspace_indicator_net(const Network& h_net, int axis, int D,
                                bool above, double eps, const Activation& act);

/// Smoothed indicator of piece `piece` of the horizon geometry: per-boundary
/// step composites, their complements, and a product per sign code, summed
/// over the piece's codes. Measured L2 error <= eps (internally verified,
/// up to 3 refinement retries); sup norm <= 1 + eps.
Network piece_indicator_net(const fgen::PieceSpec& spec, int piece, double eps,
                            const Activation& act);

/// Grid-of-cubes Taylor approximator for a smooth function on box R:
/// per-cube Taylor polynomials times cube indicators, summed. Claimed bound
/// vol(R) * delta; measured by QMC and internally retried with a finer grid
/// (up to 3 times) if above the claim.
ApproxReport smooth_net(const fgen::HolderFn& f, double beta, double delta,
                        const quad::Box& R, const Activation& act);

/// Full piecewise-smooth approximator: sum over pieces of
/// product(piece-function net, piece-indicator net). Claimed L2 bound
/// eps1 + eps2 on the target's domain.
ApproxReport piecewise_smooth_net(const fgen::PiecewiseSmoothFn& f,
                                  double eps1, double eps2,
                                  const Activation& act);

}  // namespace singlab::ctor
