// SPDX-License-Identifier: MIT
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "singlab/errors.hpp"
#include "singlab/netio.hpp"
#include "singlab/network.hpp"
#include "singlab/rng.hpp"

using namespace singlab;

namespace {

Network scalar_affine(const Activation& act, double w, double b) {
  Network n;
  n.act = act;
  n.layers.push_back(Layer::from_triplets(1, 1, {{0, 0, w}}, {b}));
  return n;
}

/// max(x,0) - max(-x,0) = x as a two-layer ReLU net.
Network relu_identity() {
  Network n;
  n.act = Activation::relu();
  n.layers.push_back(
      Layer::from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, -1.0}}, {0.0, 0.0}));
  n.layers.push_back(
      Layer::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}}, {0.0}));
  return n;
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("identity network reproduces its input") {
  const auto id = scalar_affine(Activation::relu(), 1.0, 0.0);
  CHECK(id.eval1(0.7) == 0.7);
  const auto m = id.metrics();
  CHECK(m.L == 1);
  CHECK(m.S == 1);
  CHECK(m.B == 1.0);
}

TEST_CASE("two-layer ReLU identity evaluates max(x,0)-max(-x,0)") {
  const auto n = relu_identity();
  CHECK(n.eval1(-0.3) == -0.3);
  CHECK(n.eval1(0.45) == 0.45);
  CHECK(n.eval1(0.0) == 0.0);
}

TEST_CASE("activation is applied after every layer except the last") {
  // Single layer with negative bias: output may be negative (affine only).
  auto n = scalar_affine(Activation::relu(), 1.0, -2.0);
  CHECK(n.eval1(1.0) == -1.0);
  // Same map composed with identity in front: still affine at the end.
  auto c = compose(n, relu_identity());
  CHECK(c.eval1(1.0) == -1.0);
  CHECK(c.depth() == n.depth() + relu_identity().depth() - 1);
}

TEST_CASE("clipping clamps only the final output") {
  auto n = scalar_affine(Activation::relu(), 3.0, 0.0);
  n.clip = 1.5;
  CHECK(n.eval1(10.0) == 1.5);
  CHECK(n.eval1(-10.0) == -1.5);
  CHECK(n.eval1(0.1) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("metrics count only entries above the exact-zero threshold") {
  Network n;
  n.act = Activation::relu();
  n.layers.push_back(Layer::from_triplets(
      2, 2, {{0, 0, 0.5}, {0, 1, 1e-16}, {1, 1, -2.0}}, {0.0, 1e-20}));
  n.layers.push_back(Layer::from_triplets(1, 2, {{0, 0, 1.0}}, {3.0}));
  const auto m = n.metrics();
  CHECK(m.L == 2);
  CHECK(m.S == 4);  // 0.5, -2.0, 1.0, 3.0
  CHECK(m.B == 3.0);
  // Zeroing a parameter can only decrease S.
  Network z = n;
  z.layers[0] = Layer::from_triplets(2, 2, {{0, 0, 0.5}, {1, 1, -2.0}}, {0.0, 0.0});
  CHECK(z.metrics().S <= m.S);
}

TEST_CASE("dimension mismatches are input-shape errors") {
  const auto n = relu_identity();
  std::vector<double> x = {0.1, 0.2};
  CHECK_THROWS_AS(n.eval(x), ShapeError);
  CHECK_THROWS_AS(compose(n, parallel({n, n})), ShapeError);
}

TEST_CASE("compose matches mathematical composition on random inputs") {
  rng::Counter rnd(31337, "test");
  const auto inner = relu_identity();
  auto outer = scalar_affine(Activation::relu(), -1.7, 0.4);
  const auto c = compose(outer, inner);
  for (int i = 0; i < 1000; ++i) {
    const double x = rnd.next_uniform(-2, 2);
    const double want = outer.eval1(inner.eval1(x));
    CHECK(c.eval1(x) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("compose rejects mixed activations and clipped inner nets") {
  auto a = scalar_affine(Activation::relu(), 1.0, 0.0);
  auto b = scalar_affine(Activation::sigmoid(), 1.0, 0.0);
  CHECK_THROWS_AS(compose(a, b), UnsupportedConstruction);
  auto clipped = relu_identity();
  clipped.clip = 1.0;
  CHECK_THROWS_AS(compose(a, clipped), UnsupportedConstruction);
}

TEST_CASE("parallel concatenates member outputs") {
  const auto id = relu_identity();
  const auto p = parallel({id, id});
  const auto y = p.eval(std::vector<double>{0.4});
  REQUIRE(y.size() == 2);
  CHECK(y[0] == 0.4);
  CHECK(y[1] == 0.4);
  CHECK_THROWS_AS(parallel({}), ShapeError);
}

TEST_CASE("parallel pads depth with exact identity carriers") {
  const auto shallow = scalar_affine(Activation::leaky_relu(0.2), 2.0, -0.25);
  const auto deep = deepen(relu_identity(), 3);
  CHECK(deep.depth() == 5);
  // Piecewise-linear identity carriers are exact for all signs.
  for (double x : {-1.3, -0.2, 0.0, 0.7, 2.5}) {
    CHECK(deep.eval1(x) == doctest::Approx(x).epsilon(1e-15));
  }
  const auto leaky_deep = deepen(shallow, 4);
  for (double x : {-1.3, 0.7}) {
    CHECK(leaky_deep.eval1(x) == doctest::Approx(2.0 * x - 0.25).epsilon(1e-14));
  }
  // Smooth activations cannot pad depth.
  const auto s1 = scalar_affine(Activation::sigmoid(), 1.0, 0.0);
  Network s2 = s1;
  s2.layers.push_back(Layer::identity(1));
  CHECK_THROWS_AS(parallel({s1, s2}), UnsupportedConstruction);
}

TEST_CASE("affine_output forms weighted sums and constants") {
  const auto id = relu_identity();
  const auto p = parallel({id, id, id});
  const auto sum = affine_output(p, {1.0, 1.0, 1.0}, 0.0);
  CHECK(sum.eval1(0.2) == doctest::Approx(0.6).epsilon(1e-15));
  const auto constant = affine_output(p, {0.0, 0.0, 0.0}, 5.0);
  CHECK(constant.eval1(0.9) == 5.0);
  const auto two_minus_one = affine_output(relu_identity(), {2.0}, -1.0);
  CHECK(two_minus_one.eval1(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(affine_output(p, {1.0}, 0.0), ShapeError);
}

TEST_CASE("combinators preserve semantics on random nets") {
  rng::Counter rnd(555, "test");
  // Random two-layer nets with shared input width 2.
  auto make = [&](int out) {
    Network n;
    n.act = Activation::leaky_relu(0.2);
    std::vector<Layer::Triplet> t1, t2;
    std::vector<double> b1(3), b2(out);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 2; ++c) t1.push_back({r, c, rnd.next_uniform(-1, 1)});
      b1[r] = rnd.next_uniform(-1, 1);
    }
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < 3; ++c) t2.push_back({r, c, rnd.next_uniform(-1, 1)});
      b2[r] = rnd.next_uniform(-1, 1);
    }
    n.layers.push_back(Layer::from_triplets(3, 2, std::move(t1), std::move(b1)));
    n.layers.push_back(Layer::from_triplets(out, 3, std::move(t2), std::move(b2)));
    return n;
  };
  const auto f = make(2);
  const auto g = make(1);
  const auto h = compose(g, parallel({affine_output(f, {1.0, 2.0}, 0.1),
                                      affine_output(f, {-1.0, 0.5}, -0.2)}));
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x = {rnd.next_uniform(-1, 1), rnd.next_uniform(-1, 1)};
    const auto fx = f.eval(x);
    const std::vector<double> mid = {fx[0] + 2.0 * fx[1] + 0.1,
                                     -fx[0] + 0.5 * fx[1] - 0.2};
    const double want = g.eval1(mid);
    CHECK(h.eval1(x) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("evaluation is deterministic within a process") {
  const auto n = deepen(relu_identity(), 2);
  const std::vector<double> x = {0.123456};
  const auto a = n.eval(x);
  const auto b = n.eval(x);
  CHECK(a == b);
}

TEST_CASE("serialization round-trips bit-exactly") {
  rng::Counter rnd(777, "test");
  Network n;
  n.act = Activation::leaky_relu(0.2);
  std::vector<Layer::Triplet> t;
  std::vector<double> bias;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) {
      // Nasty values: subnormal-adjacent, irrational-looking, huge/small.
      const double v = std::ldexp(rnd.next_uniform(-1, 1), static_cast<int>(rnd.next_below(60)) - 30);
      t.push_back({r, c, v});
    }
    bias.push_back(rnd.next_uniform(-1, 1) * 1e-13);
  }
  n.layers.push_back(Layer::from_triplets(4, 3, std::move(t), std::move(bias)));
  n.layers.push_back(Layer::from_triplets(1, 4, {{0, 0, 0.1}, {0, 2, -1.0 / 3.0}}, {M_PI}));
  n.clip = 2.5;

  const std::string text = network_to_json(n);
  const Network back = network_from_json(text);
  REQUIRE(back.depth() == n.depth());
  CHECK(back.act.same_as(n.act));
  REQUIRE(back.clip.has_value());
  CHECK(*back.clip == *n.clip);
  for (int l = 0; l < n.depth(); ++l) {
    CHECK(back.layers[l].to_dense() == n.layers[l].to_dense());
    CHECK(back.layers[l].bias == n.layers[l].bias);
  }
  // And the round trip is a fixed point of serialization.
  CHECK(network_to_json(back) == text);
}

TEST_CASE("serialization rejects non-finite parameters") {
  Network n = scalar_affine(Activation::relu(), 1.0, 0.0);
  n.layers[0].bias[0] = std::nan("");
  CHECK_THROWS_AS(network_to_json(n), ConfigError);
}

}  // TEST_SUITE
