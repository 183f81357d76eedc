#include "bbcrop/dp.hpp"
#include "bbcrop/errors.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bbcrop;

namespace {

const SpinSystem kSys = SpinSystem::from_aggregates(193.6, 193.6, 0.0);

const DpPolicy& small_policy() {
  static const DpPolicy p = [] {
    DpOptions o;
    o.stages = 3;
    o.grid = 60;
    return value_iteration(kSys, o);
  }();
  return p;
}

}  // namespace

TEST_CASE("stage map agrees with the full propagator") {
  const Mat16 G = build_generator(kSys, {});
  std::mt19937 g(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double r1 = u(g), r2 = u(g), b1 = 1.5 * u(g), b2 = 1.5 * u(g), tau = u(g) / (2 * kSys.J);
    Vec16 x = Vec16::Zero();
    x[1] = r1 * std::cos(b1);   // Ix
    x[3] = r1 * std::sin(b1);   // Iz
    x[12] = r2 * std::cos(b2);  // 2IySz
    x[15] = r2 * std::sin(b2);  // 2IzSz
    const Vec16 y = propagate(LiouvilleState(x), G, tau).coeffs();
    const double n1 = std::sqrt(y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    const double n2 = std::sqrt(y[9] * y[9] + y[12] * y[12] + y[15] * y[15]);
    const auto [m1, m2] = stage_map(r1, r2, b1, b2, tau, kSys);
    CHECK(m1 == doctest::Approx(n1).epsilon(1e-10));
    CHECK(m2 == doctest::Approx(n2).epsilon(1e-10));
  }
}

TEST_CASE("one stage reproduces the INEPT optimum") {
  const DpPolicy& p = small_policy();
  CHECK(p.value(1, 1.0, 0.0) == doctest::Approx(oracle::inept_best(193.6, 193.6)).epsilon(5e-3));
  CHECK(p.value(0, 0.3, 0.7) == doctest::Approx(0.7));
}

TEST_CASE("value tables grow with the number of stages") {
  const DpPolicy& p = small_policy();
  for (std::size_t k = 0; k < p.stages(); ++k)
    for (std::size_t i = 0; i < p.grid(); ++i)
      for (std::size_t j = 0; j < p.grid(); ++j) CHECK(p.value_at(k + 1, i, j) >= p.value_at(k, i, j) - 1e-12);
  CHECK(p.value(p.stages(), 1.0, 0.0) <= std::sqrt(2.0) - 1 + 1e-3);
}

TEST_CASE("values scale linearly with r1 on the r2 = 0 axis") {
  const DpPolicy& p = small_policy();
  for (std::size_t k = 1; k <= p.stages(); ++k) {
    const double top = p.value(k, 1.0, 0.0);
    for (double r1 : {0.25, 0.5, 0.75}) CHECK(p.value(k, r1, 0.0) == doctest::Approx(r1 * top).epsilon(0.02));
  }
}

TEST_CASE("extracted sequence replays to the predicted value") {
  const DpExtraction ex = extract_sequence(small_policy());
  CHECK(ex.predicted == doctest::Approx(small_policy().value(3, 1.0, 0.0)));
  CHECK(ex.replayed == doctest::Approx(ex.predicted).epsilon(0.01));
  CHECK_NOTHROW(ex.sequence.validate());
  CHECK(ex.stages.size() == 3);
  // The pulse/delay sequence realizes the magnitudes in the reduced model.
  CHECK(dante_efficiency(ex.sequence, kSys) == doctest::Approx(ex.replayed).epsilon(1e-6));
}

TEST_CASE("policy validation") {
  DpOptions o;
  o.stages = 0;
  CHECK_THROWS_AS(value_iteration(kSys, o), ParameterError);
  o.stages = 1;
  o.grid = 1;
  CHECK_THROWS_AS(value_iteration(kSys, o), ParameterError);
  o.grid = 50;
  CHECK_THROWS_AS(value_iteration(SpinSystem::from_aggregates(193.6, 193.6, 20), o), ParameterError);
}
