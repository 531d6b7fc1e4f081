// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace singlab {

/// Invalid parameters, malformed configuration, or unusable input files.
/// The CLI maps this family to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Shape mismatch when wiring or evaluating networks (input width, layer
/// chaining, combinator preconditions on dimensions).
class ShapeError : public ConfigError {
 public:
  explicit ShapeError(const std::string& what) : ConfigError(what) {}
};

/// A builder was asked for a construction that its activation class cannot
/// express (e.g. exact piecewise-linear closed forms with a smooth
/// activation, or deep identity carriers without a piecewise-linear unit).
class UnsupportedConstruction : public std::runtime_error {
 public:
  explicit UnsupportedConstruction(const std::string& what)
      : std::runtime_error(what) {}
};

/// Training lost numerical footing (non-finite loss). Carries the last
/// parameter vector that still evaluated to a finite loss so callers can
/// salvage the run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> last_stable)
      : std::runtime_error(what), last_stable_params(std::move(last_stable)) {}

  std::vector<double> last_stable_params;
};

}  // namespace singlab
