// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "singlab/activation.hpp"

namespace singlab {

/// Entries with |w| below this are treated as zero by the sparsity count S.
/// Absorbs float noise from closed-form coefficient arithmetic.
inline constexpr double kZeroTol = 1e-15;

struct SizeMetrics {
  int L = 0;           // number of affine maps
  long long S = 0;     // nonzero weights + biases (|w| > kZeroTol)
  double B = 0.0;      // largest absolute parameter
};

/// One affine map y = W x + b, stored sparsely by row (CSR). Exact zeros are
/// not stored; values below kZeroTol are stored but not counted in S.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<int> row_ptr;   // size out + 1
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> bias;   // size out

  struct Triplet {
    int row;
    int col;
    double value;
  };

  static Layer from_triplets(int out, int in, std::vector<Triplet> entries,
                             std::vector<double> bias);
  static Layer dense(int out, int in, const std::vector<double>& row_major,
                     std::vector<double> bias);
  static Layer identity(int n);

  /// y = W x + b
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Dense row-major copy (serialization and debugging).
  std::vector<double> to_dense() const;
};

/// Feed-forward network: a chain of affine maps with the activation applied
/// element-wise after every map except the last. An optional output clip
/// bound F clamps the final output to [-F, F].
class Network {
 public:
  Activation act;
  std::vector<Layer> layers;
  std::optional<double> clip;

  int input_width() const { return layers.empty() ? 0 : layers.front().in; }
  int output_width() const { return layers.empty() ? 0 : layers.back().out; }
  int depth() const { return static_cast<int>(layers.size()); }
  int max_width() const;

  /// Validate layer chaining; throws ShapeError on inconsistency.
  void check() const;

  std::vector<double> eval(std::span<const double> x) const;
  /// Evaluation with caller-owned scratch buffers (no allocation when the
  /// buffers have been used on this network before).
  void eval_into(std::span<const double> x, std::vector<double>& out,
                 std::vector<double>& scratch) const;
  /// Scalar-output conveniences.
  double eval1(std::span<const double> x) const;
  double eval1(double x) const;

  SizeMetrics metrics() const;
};

/// Workspace wrapper for tight evaluation loops over one network.
class Evaluator {
 public:
  explicit Evaluator(const Network& net) : net_(&net) {}
  Evaluator(Network&&) = delete;  // would dangle: the evaluator only observes
  double eval1(std::span<const double> x) {
    net_->eval_into(x, out_, scratch_);
    return out_.at(0);
  }
  double eval1(double x) { return eval1(std::span<const double>(&x, 1)); }
  const std::vector<double>& eval(std::span<const double> x) {
    net_->eval_into(x, out_, scratch_);
    return out_;
  }

 private:
  const Network* net_;
  std::vector<double> out_, scratch_;
};

/// outer(inner(x)). The inner net's final affine map fuses with the outer
/// net's first affine map (two adjacent affine maps are one affine map), so
/// the composite has depth La + Lb - 1 and needs no glue layer. Requires the
/// same activation on both sides and an unclipped inner net; the outer clip
/// bound, if any, is applied at the very end.
Network compose(const Network& outer, const Network& inner);

/// Concatenate outputs of several nets sharing one input vector. Depth
/// differences are equalized with exact identity-carrier layers, which exist
/// only for the piecewise-linear class; depth-mismatched smooth nets are
/// rejected (UnsupportedConstruction).
Network parallel(const std::vector<Network>& nets);

/// <weights, net(x)> + bias (merged into the final affine map).
Network affine_output(const Network& net, const std::vector<double>& weights,
                      double bias);

/// General affine post-map: A * net(x) + b.
Network postcompose_affine(const Network& net, const Layer& affine);

/// net(A x + b): folds an affine pre-map into the first layer.
Network precompose_affine(const Network& net, const Layer& affine);

/// Extends the net by `extra` layers without changing its function, using
/// (eta(u) - eta(-u))/(c1 + c2) = u identity pairs. Piecewise-linear only.
Network deepen(const Network& net, int extra);

/// x -> x with the requested depth (>= 1). Depth >= 2 requires the
/// piecewise-linear identity pair.
Network identity_net(const Activation& act, int depth = 1, int width = 1);

/// x -> c (constant; single affine layer, any input width).
Network constant_net(const Activation& act, double value, int in_width);

}  // namespace singlab
