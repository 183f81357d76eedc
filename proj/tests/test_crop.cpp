#include "bbcrop/crop.hpp"
#include "bbcrop/errors.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace bbcrop;

namespace {

const SpinSystem kRef = SpinSystem::from_aggregates(193.6, 193.6, 145.2);

}  // namespace

TEST_CASE("efficiency bound against the closed form") {
  std::mt19937 g(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double J = 20 + 400 * u(g), ka = 500 * u(g), kc = (2 * u(g) - 1) * ka;
    CHECK(efficiency_bound(SpinSystem::from_aggregates(J, ka, kc)) ==
          doctest::Approx(oracle::eta(J, ka, kc)).epsilon(1e-13));
  }
  CHECK(efficiency_bound(SpinSystem::from_aggregates(193.6, 193.6, 0)) ==
        doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
  CHECK(efficiency_bound(SpinSystem::from_aggregates(193.6, 80, 80)) == doctest::Approx(1.0));
  CHECK(efficiency_bound(SpinSystem::from_aggregates(193.6, 80, -80)) == doctest::Approx(1.0));
}

TEST_CASE("bound evaluation is fast") {
  const auto t0 = std::chrono::steady_clock::now();
  double acc = 0;
  for (int i = 0; i < 1000; ++i) acc += efficiency_bound(kRef);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  CHECK(acc > 0);
  CHECK(ms / 1000 < 1.0);
}

TEST_CASE("bound outside the domain") {
  CHECK_THROWS_AS(efficiency_bound(SpinSystem::from_aggregates(193.6, 100, 120)), DomainError);
  CHECK_THROWS_AS(solve_gamma(SpinSystem::from_aggregates(193.6, 100, -120)), DomainError);
}

TEST_CASE("bound is monotone in the rates") {
  double prev = 2.0;
  for (double ka = 0; ka <= 400; ka += 20) {
    const double e = efficiency_bound(SpinSystem::from_aggregates(193.6, ka, 0));
    CHECK(e <= prev + 1e-15);
    prev = e;
  }
  prev = 0.0;
  for (double kc = 0; kc <= 190; kc += 10) {
    const double e = efficiency_bound(SpinSystem::from_aggregates(193.6, 190, kc));
    CHECK(e >= prev - 1e-15);
    prev = e;
  }
}

TEST_CASE("gamma solves the stationarity condition") {
  std::mt19937 g(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double J = 50 + 300 * u(g), ka = 10 + 300 * u(g), kc = 0.99 * (2 * u(g) - 1) * ka;
    const CropConstants c = solve_gamma(SpinSystem::from_aggregates(J, ka, kc));
    CHECK(c.residual < 1e-9);
    CHECK(c.gamma > 0);
    CHECK(c.gamma <= oracle::kPi);
    // gamma maximizes (1/eta) cos(theta - g) + eta cos(theta + g).
    auto f = [&](double x) { return std::cos(c.theta - x) / c.eta + c.eta * std::cos(c.theta + x); };
    CHECK(f(c.gamma) >= f(c.gamma + 1e-3));
    CHECK(f(c.gamma) >= f(c.gamma - 1e-3));
  }
  CHECK(solve_gamma(SpinSystem::from_aggregates(193.6, 193.6, 0)).gamma ==
        doctest::Approx(oracle::kPi / 2).epsilon(1e-14));
  CHECK(solve_gamma(kRef).gamma == doctest::Approx(2.58399383).epsilon(1e-8));
}

TEST_CASE("reduce and expand are inverse") {
  std::mt19937 g(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec6 s;
    for (int i = 0; i < 6; ++i) s[i] = n(g);
    CHECK((expand(reduce(s)) - s).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("trajectory invariants") {
  for (double kc : {145.2, 50.0, 5.0, 0.0}) {
    CAPTURE(kc);
    const SpinSystem sys = SpinSystem::from_aggregates(193.6, 193.6, kc);
    const ReducedTrajectory tr = generate_crop(sys);
    REQUIRE(tr.size() > 100);
    CHECK_NOTHROW(tr.validate());
    CHECK(verify_orthogonality(tr) <= 1e-6);
    double ratio = 0, gam = 0;
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
      const auto& s = tr.states[i];
      ratio = std::max(ratio, std::abs(s.l2 / s.l1 - tr.eta));
      if (kc != 0.0) gam = std::max(gam, std::abs(s.gamma - tr.gamma));
      CHECK(tr.step(i) <= 1e-3 / 193.6 * (1 + 1e-12));
    }
    CHECK(ratio < 1e-9);
    CHECK(gam < 1e-9);
    CHECK(tr.states.back().z2 >= 0.995 * tr.eta);
    CHECK(tr.states.back().z2 <= tr.eta);
  }
}

TEST_CASE("the constraint product stays constant") {
  // J(t) = l1 l2 cos(gamma) + z1 z2 vanishes on the trajectory; its time
  // derivative is estimated by finite differences.
  const ReducedTrajectory tr = generate_crop(kRef);
  double worst = 0;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    auto prod = [&](const ReducedState& s) { return s.l1 * s.l2 * std::cos(s.gamma) + s.z1 * s.z2; };
    worst = std::max(worst, std::abs(prod(tr.states[i + 1]) - prod(tr.states[i])) / tr.step(i));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("full replay reaches the bound") {
  for (double kc : {145.2, 0.0}) {
    CAPTURE(kc);
    const SpinSystem sys = SpinSystem::from_aggregates(193.6, 193.6, kc);
    const ReducedTrajectory tr = generate_crop(sys);
    const double full = replay_full(tr, sys);
    CHECK(full >= 0.98 * tr.eta);
    CHECK(full <= tr.eta + 1e-9);
    CHECK(std::abs(full - replay_reduced(tr, sys)[5]) < 1e-3);
    CHECK(std::abs(full - tr.states.back().z2) < 1e-3);
  }
}

TEST_CASE("trajectory options are checked") {
  CropOptions o;
  o.dt = 1.0;
  CHECK_THROWS_AS(generate_crop(kRef, o), ParameterError);
  o = {};
  o.stop_fraction = 1.0;
  CHECK_THROWS_AS(generate_crop(kRef, o), ParameterError);
  o = {};
  o.epsilon = 0.0;
  CHECK_THROWS_AS(generate_crop(kRef, o), ParameterError);
  o = {};
  o.max_duration = 1e-4;
  CHECK_THROWS_AS(generate_crop(kRef, o), NumericError);
  CHECK_THROWS_AS(generate_crop(SpinSystem::from_aggregates(193.6, 100, 150)), DomainError);
  CHECK_THROWS_AS(generate_crop(SpinSystem::from_aggregates(193.6, 100, -60)), DomainError);
}

TEST_CASE("free evolution matches the full propagator") {
  const ReducedModel m = ReducedModel::from(kRef, 120.0);
  ControlSettings ctl;
  ctl.offset_I = 120.0;
  const Mat16 G = build_generator(kRef, ctl);
  std::mt19937 g(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec6 s;
    for (int i = 0; i < 6; ++i) s[i] = n(g);
    Vec16 full = Vec16::Zero();
    for (int i = 0; i < 3; ++i) {
      full[1 + i] = s[i];
      full[7 + 3 * i + 2] = s[3 + i];
    }
    const double t = 1e-3 * (trial + 1);
    const Vec16 out = propagate(LiouvilleState(full), G, t).coeffs();
    const Vec6 red = m.free_evolve(s, t);
    for (int i = 0; i < 3; ++i) {
      CHECK(red[i] == doctest::Approx(out[1 + i]).epsilon(1e-10));
      CHECK(red[3 + i] == doctest::Approx(out[7 + 3 * i + 2]).epsilon(1e-10));
    }
  }
}
