// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace singlab::quad {

/// Axis-aligned box domain.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(std::span<const double> x) const;

  static Box unit(int d);        // [0,1]^d
  static Box symmetric(int d);   // [-1,1]^d
};

/// Radical-inverse (van der Corput) value of index i in the given base.
double radical_inverse(std::uint64_t i, int base);

/// i-th Halton point (1-based index) in [0,1)^d, bases = first d primes.
void halton_point(std::uint64_t i, int d, std::span<double> out);

/// Deterministic sharded QMC mean of f over the box: indices are split into
/// 64 fixed shards, each accumulated in index order, then combined by a
/// pairwise tree. The result is independent of how callers schedule work.
double qmc_mean(const Box& box, std::uint64_t points,
                const std::function<double(std::span<const double>)>& f);

/// Composite Simpson rule with `panels` panels (panels made even internally).
double simpson(double a, double b, int panels,
               const std::function<double(double)>& f);

/// Uniform grid with n points including both endpoints.
std::vector<double> linspace(double a, double b, int n);

}  // namespace singlab::quad
