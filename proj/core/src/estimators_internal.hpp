// SPDX-License-Identifier: MIT
#pragma once

#include <span>

#include "singlab/estimators.hpp"

namespace singlab::est::detail {

// Per-kind pointwise evaluation, no domain checks (the Predictor wrapper
// performs them once). Implemented next to each fitter.
double eval_krr(const KernelRidgeState& s, std::span<const double> x);
double eval_wavelet(const WaveletState& s, std::span<const double> x);

}  // namespace singlab::est::detail
