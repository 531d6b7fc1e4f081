// SPDX-License-Identifier: MIT
//
// Composite constructions: cube and halfspace indicators, piece indicators
// for horizon geometries, the grid-of-cubes smooth approximator, and the
// piecewise-smooth assembly. Error claims are re-measured here with the same
// deterministic QMC integration the builders use internally.
#include <cmath>
#include <span>
#include <vector>

#include "doctest.h"
#include "singlab/constructor.hpp"
#include "singlab/errors.hpp"
#include "singlab/funcgen.hpp"
#include "singlab/netio.hpp"
#include "singlab/network.hpp"
#include "singlab/quadrature.hpp"

using namespace singlab;
using namespace singlab::ctor;

namespace {

double l2_against(const Network& net,
                  const std::function<double(std::span<const double>)>& f,
                  const quad::Box& box, std::uint64_t points) {
  Evaluator ev(net);
  const double ms = quad::qmc_mean(box, points, [&](std::span<const double> x) {
    const double d = ev.eval1(x) - f(x);
    return d * d;
  });
  return std::sqrt(std::max(0.0, ms) * box.volume());
}

fgen::PieceSpec quadrant_spec() {
  fgen::PieceSpec spec;
  spec.D = 2;
  const fgen::HolderFn half = fgen::HolderFn::constant(1, 0.5);
  spec.boundaries = {{0, half}, {1, half}};
  spec.groups = {{3u}, {0u, 1u, 2u}};
  return spec;
}

}  // namespace

TEST_CASE("cube indicator: one-dimensional band reduction") {
  const Activation act = Activation::relu();
  const std::vector<double> center = {0.5};
  const Network cube = cube_indicator_net(center, 0.5, 0.05, act);
  Evaluator ev(cube);
  CHECK(ev.eval1(0.5) == 1.0);
  CHECK(ev.eval1(0.05) == 0.0);  // below-band: the ReLU side is exactly zero
  CHECK(std::abs(ev.eval1(0.95)) <= 1e-12);  // above: two saturated steps cancel
  CHECK(ev.eval1(0.25) == doctest::Approx(0.5).epsilon(1e-12));

  // The band is literally the difference of two step nets at the cube faces.
  const double eps_edge = 0.05 / std::sqrt(2.0);
  const Network lo = step_net(eps_edge, 1.0, act).net;
  Evaluator el(lo);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    const double want = el.eval1(x - 0.25) - el.eval1(x - 0.75);
    CHECK(std::abs(ev.eval1(x) - want) <= 1e-12);
  }
  CHECK(cube.metrics().L == 2);
}

TEST_CASE("cube indicator: interior, exterior, and L2 bound") {
  for (const Activation& act :
       {Activation::relu(), Activation::leaky_relu(0.2)}) {
    CAPTURE(act.name());
    const std::vector<double> center = {0.625, 0.625};
    const double eps = 0.05;
    const Network cube = cube_indicator_net(center, 0.25, eps, act);
    Evaluator ev(cube);
    const std::vector<double> deep = {0.625, 0.6};
    const std::vector<double> far = {0.05, 0.05};
    CHECK(std::abs(ev.eval1(deep) - 1.0) <= 2.0 * eps);
    CHECK(std::abs(ev.eval1(far)) <= 2.0 * eps);
    // Piecewise-linear steps vanish identically away from the transition, and
    // a zero factor propagates exactly through the product network.
    if (act.c2 == 0.0) CHECK(ev.eval1(far) == 0.0);
    const double bound = 2.0 * eps * (1.0 + 0.25);  // D eps (1 + 1/ell)
    const double err = l2_against(
        cube,
        [](std::span<const double> x) {
          return x[0] >= 0.5 && x[0] <= 0.75 && x[1] >= 0.5 && x[1] <= 0.75
                     ? 1.0
                     : 0.0;
        },
        quad::Box::unit(2), 1ull << 16);
    CHECK(err <= bound);
  }
}

TEST_CASE("cube indicator: domain-wall transitions stay outside") {
  const Activation act = Activation::relu();
  const std::vector<double> low_corner = {0.125, 0.125};
  const Network cube = cube_indicator_net(low_corner, 0.25, 0.05, act);
  Evaluator ev(cube);
  const std::vector<double> on_wall = {0.0, 0.125};
  const std::vector<double> corner = {0.0, 0.0};
  CHECK(std::abs(ev.eval1(on_wall) - 1.0) <= 1e-9);
  CHECK(std::abs(ev.eval1(corner) - 1.0) <= 1e-9);
  const std::vector<double> hi_corner = {0.875, 0.875};
  const Network cube2 = cube_indicator_net(hi_corner, 0.25, 0.05, act);
  Evaluator e2(cube2);
  const std::vector<double> one = {1.0, 1.0};
  CHECK(std::abs(e2.eval1(one) - 1.0) <= 1e-9);

  CHECK_THROWS_AS(cube_indicator_net(low_corner, 0.25, 1.5, act), ConfigError);
  CHECK_THROWS_AS(cube_indicator_net(low_corner, -0.1, 0.05, act),
                  ConfigError);
}

TEST_CASE("halfspace indicator: constant boundary plateaus and complement") {
  const Activation act = Activation::relu();
  const Network h = constant_net(act, 0.5, 1);
  const Network up = halfspace_indicator_net(h, 1, 2, true, 0.05, act);
  const Network dn = halfspace_indicator_net(h, 1, 2, false, 0.05, act);
  Evaluator eu(up), ed(dn);
  const std::vector<double> above = {0.3, 0.9};
  const std::vector<double> below = {0.3, 0.1};
  CHECK(std::abs(eu.eval1(above) - 1.0) <= 1e-12);
  CHECK(eu.eval1(below) == 0.0);
  CHECK(ed.eval1(above) == 0.0);
  CHECK(std::abs(ed.eval1(below) - 1.0) <= 1e-12);
  // The two sides are exact complements: the ramp is symmetric about the
  // boundary, so their sum is one everywhere.
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const std::vector<double> x = {0.7, t};
    CHECK(std::abs(eu.eval1(x) + ed.eval1(x) - 1.0) <= 1e-12);
  }

  // Smooth activations work when the boundary net is affine.
  const Activation sig = Activation::sigmoid();
  const Network hs = constant_net(sig, 0.5, 1);
  const Network ups = halfspace_indicator_net(hs, 1, 2, true, 0.1, sig);
  Evaluator es(ups);
  CHECK(std::abs(es.eval1(above) - 1.0) <= 1e-6);
  CHECK(std::abs(es.eval1(below)) <= 1e-6);

  CHECK_THROWS_AS(halfspace_indicator_net(h, 2, 2, true, 0.05, act),
                  ConfigError);
  CHECK_THROWS_AS(halfspace_indicator_net(h, 0, 3, true, 0.05, act),
                  ShapeError);
  CHECK_THROWS_AS(halfspace_indicator_net(h, 1, 2, true, 0.05, sig),
                  ConfigError);
}

TEST_CASE("piece indicator: quadrant geometry meets its budget") {
  const Activation act = Activation::relu();
  const fgen::PieceSpec spec = quadrant_spec();
  spec.validate();
  const Network g = piece_indicator_net(spec, 0, 0.05, act);
  const double err = l2_against(
      g,
      [](std::span<const double> x) {
        return x[0] >= 0.5 && x[1] >= 0.5 ? 1.0 : 0.0;
      },
      quad::Box::unit(2), 1ull << 16);
  CHECK(err <= 0.05);
  // Bounded overshoot: sup over a Halton cloud stays within 1 + eps.
  Evaluator ev(g);
  double sup = 0.0;
  for (std::uint64_t i = 1; i <= 10000; ++i) {
    double p[2];
    quad::halton_point(i, 2, p);
    sup = std::max(sup, std::abs(ev.eval1(std::span<const double>(p, 2))));
  }
  CHECK(sup <= 1.05);

  // The complement piece sums the three remaining sign codes.
  const Network gc = piece_indicator_net(spec, 1, 0.05, act);
  const double errc = l2_against(
      gc,
      [](std::span<const double> x) {
        return x[0] >= 0.5 && x[1] >= 0.5 ? 0.0 : 1.0;
      },
      quad::Box::unit(2), 1ull << 16);
  CHECK(errc <= 0.05);
}

TEST_CASE("piece indicator: single constant boundary is the halfspace form") {
  const Activation act = Activation::relu();
  fgen::PieceSpec spec;
  spec.D = 2;
  spec.boundaries = {{1, fgen::HolderFn::constant(1, 0.5)}};
  spec.groups = {{1u}, {0u}};
  const double eps = 0.05;
  const Network above = piece_indicator_net(spec, 0, eps, act);
  const Network want = halfspace_indicator_net(constant_net(act, 0.5, 1), 1, 2,
                                               true, 0.4 * eps, act);
  CHECK(network_to_json(above) == network_to_json(want));
}

TEST_CASE("piece indicator: validation and smooth-activation propagation") {
  const Activation act = Activation::relu();
  const fgen::PieceSpec spec = quadrant_spec();
  CHECK_THROWS_AS(piece_indicator_net(spec, 2, 0.05, act), ConfigError);
  CHECK_THROWS_AS(piece_indicator_net(spec, 0, 1.0, act), ConfigError);
  // Products of halfspace composites need the piecewise-linear multiplier.
  CHECK_THROWS_AS(piece_indicator_net(spec, 0, 0.05, Activation::sigmoid()),
                  UnsupportedConstruction);
}

TEST_CASE("smooth approximator: product target meets the claim") {
  fgen::HolderFn f;
  f.family = fgen::FnFamily::Polynomial;
  f.D = 2;
  f.beta = 2.0;
  f.F = 1.0;
  f.label = "x1*x2";
  f.terms = {{{1, 1}, {}, 1.0}};
  const auto rep =
      smooth_net(f, 2.0, 0.1, quad::Box::unit(2), Activation::relu());
  CHECK(rep.claimed == 0.1);
  CHECK(rep.measured <= rep.claimed);
  CHECK(rep.params.at("attempt") == 0.0);
  CHECK(rep.metric == "l2");
  // Rebuilding is bit-identical.
  const auto again =
      smooth_net(f, 2.0, 0.1, quad::Box::unit(2), Activation::relu());
  CHECK(network_to_json(rep.net) == network_to_json(again.net));
  CHECK(rep.measured == again.measured);
}

TEST_CASE("smooth approximator: constants are exact up to product dust") {
  const auto f = fgen::HolderFn::constant(2, 0.7);
  const auto rep =
      smooth_net(f, 2.0, 0.1, quad::Box::unit(2), Activation::relu());
  CHECK(rep.measured <= 1e-9);
  CHECK(rep.params.at("m_pair") == 0.0);
}

TEST_CASE("smooth approximator: sine slice instantiates its claim") {
  fgen::HolderFn f;
  f.family = fgen::FnFamily::Cosine;
  f.D = 2;
  f.beta = 2.0;
  f.F = 1.0;
  f.label = "sin(pi x1)";
  // cos(pi x - pi/2) = sin(pi x)
  f.terms = {{{1, 0}, {-std::acos(-1.0) / 2.0, 0.0}, 1.0}};
  const auto rep =
      smooth_net(f, 2.0, 0.05, quad::Box::unit(2), Activation::relu());
  CHECK(rep.claimed == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(rep.measured <= 0.05);
}

TEST_CASE("smooth approximator: rejects bad inputs") {
  const auto f = fgen::HolderFn::constant(2, 0.5);
  const Activation act = Activation::relu();
  CHECK_THROWS_AS(smooth_net(f, 2.0, 1.0, quad::Box::unit(2), act),
                  ConfigError);
  CHECK_THROWS_AS(smooth_net(f, -1.0, 0.1, quad::Box::unit(2), act),
                  ConfigError);
  CHECK_THROWS_AS(smooth_net(f, 2.0, 0.1, quad::Box::unit(3), act),
                  ShapeError);
  quad::Box slab;
  slab.lo = {0.0, 0.0};
  slab.hi = {1.0, 2.0};
  CHECK_THROWS_AS(smooth_net(f, 2.0, 0.1, slab, act), UnsupportedConstruction);
}

TEST_CASE("piecewise assembly: rectangle target meets eps1 + eps2") {
  const auto f = fgen::named_target("rectangle", 2);
  const auto rep = piecewise_smooth_net(f, 0.1, 0.1, Activation::relu());
  CHECK(rep.claimed == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(rep.measured <= 0.2);
  CHECK(rep.grid == (1ull << 17));
  CHECK(rep.params.at("pieces") == 2.0);
}

TEST_CASE("piecewise assembly: single-piece degeneration") {
  fgen::PiecewiseSmoothFn f;
  f.name = "plateau";
  f.domain = quad::Box::unit(2);
  f.pieces.D = 2;
  f.pieces.groups = {{0u}};
  f.fs = {fgen::HolderFn::constant(2, 0.7)};
  f.alpha = 1.0;
  f.beta = 2.0;
  f.F = 0.7;
  const auto rep = piecewise_smooth_net(f, 0.1, 0.1, Activation::relu());
  CHECK(rep.params.at("m_pair") == 0.0);
  CHECK(rep.measured <= 1e-9);
}

TEST_CASE("piecewise assembly: unit-domain guard") {
  const auto f = fgen::named_target("quadrant", 2);
  CHECK_THROWS_AS(piecewise_smooth_net(f, 0.1, 0.1, Activation::relu()),
                  UnsupportedConstruction);
}
