#include "bbcrop/errors.hpp"
#include "bbcrop/liouville.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <random>

using namespace bbcrop;

namespace {

SpinSystem random_system(std::mt19937& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpinSystem s;
  s.J = 50 + 300 * u(g);
  s.kDD = 200 * u(g);
  s.kCSA_I = 100 * u(g);
  s.kCSA_S = 100 * u(g);
  s.kc_I = (2 * u(g) - 1) * (s.kDD + s.kCSA_I);
  s.kc_S = (2 * u(g) - 1) * (s.kDD + s.kCSA_S);
  return s;
}

ControlSettings random_controls(std::mt19937& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ControlSettings c;
  c.rfAmp_I = 5000 * (u(g) + 1);
  c.rfPhase_I = 3.2 * u(g);
  c.rfAmp_S = 5000 * (u(g) + 1);
  c.rfPhase_S = 3.2 * u(g);
  c.offset_I = 1000 * u(g);
  c.offset_S = 1000 * u(g);
  return c;
}

}  // namespace

TEST_CASE("basis labels map to indices") {
  CHECK(basis_index("Iz") == 3);
  CHECK(basis_index("2IxSz") == 9);
  CHECK(basis_index("2IySz") == 12);
  CHECK(basis_index("2IzSz") == 15);
  CHECK_THROWS_AS(basis_index("Qz"), ParameterError);
  CHECK(LiouvilleState::basis("Iz")[3] == 1.0);
}

TEST_CASE("generator matches the spin-matrix construction") {
  std::mt19937 g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SpinSystem s = random_system(g);
    const ControlSettings c = random_controls(g);
    const Mat16 a = build_generator(s, c), b = oracle::generator(s, c);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * (1 + b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("relaxation block on the in-phase / antiphase x pair") {
  const SpinSystem s = SpinSystem::from_aggregates(193.6, 120.0, 80.0);
  const Mat16 G = build_generator(s, {});
  CHECK(G(1, 1) == doctest::Approx(-oracle::kPi * 120.0));
  CHECK(G(9, 9) == doctest::Approx(-oracle::kPi * 120.0));
  CHECK(G(9, 1) == doctest::Approx(-oracle::kPi * 80.0));
  CHECK(G(1, 9) == doctest::Approx(-oracle::kPi * 80.0));
}

TEST_CASE("propagator agrees with a Taylor reference") {
  std::mt19937 g(5);
  std::uniform_real_distribution<double> u(1e-7, 2e-4);
  for (int trial = 0; trial < 25; ++trial) {
    const Mat16 G = build_generator(random_system(g), random_controls(g));
    const double dt = u(g);
    const Mat16 ref = oracle::expm_taylor(G * dt);
    CHECK((propagator(G, dt) - ref).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("trace preservation over event sequences") {
  std::mt19937 g(7);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  LiouvilleState st = LiouvilleState::basis("Iz");
  st.coeffs()[0] = 0.5;
  for (int k = 0; k < 200; ++k) {
    st = propagate(st, build_generator(random_system(g), random_controls(g)), u(g));
    if (k % 7 == 0) st.coeffs() = rotation_superop(Channel::I, Vec3(1, 2, 3), 1.1) * st.coeffs();
  }
  CHECK(std::abs(st[0] - 0.5) < 1e-12);
}

TEST_CASE("dissipativity without rf") {
  std::mt19937 g(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const SpinSystem s = random_system(g);
    ControlSettings c;
    c.offset_I = 500 * (u(g) - 0.5);
    c.offset_S = 500 * (u(g) - 0.5);
    const Mat16 G = build_generator(s, c);
    Vec16 x;
    for (int i = 0; i < 16; ++i) x[i] = n(g);
    double prev = x.tail<15>().norm();
    for (int step = 0; step < 40; ++step) {
      x = propagate(LiouvilleState(x), G, 2e-4).coeffs();
      const double now = x.tail<15>().norm();
      CHECK(now <= prev * (1 + 1e-12));
      prev = now;
    }
  }
}

TEST_CASE("propagator composition") {
  std::mt19937 g(17);
  std::uniform_real_distribution<double> u(0.0, 2e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat16 G = build_generator(random_system(g), random_controls(g));
    const double t1 = u(g), t2 = u(g);
    const LiouvilleState s = LiouvilleState::basis("Ix");
    const Vec16 a = propagate(s, G, t1 + t2).coeffs();
    const Vec16 b = propagate(propagate(s, G, t1), G, t2).coeffs();
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("rotation superoperator matches the unitary") {
  std::mt19937 g(23);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 axis(n(g), n(g), n(g));
    const double angle = 2 * n(g);
    for (Channel ch : {Channel::I, Channel::S}) {
      const Mat16 R = rotation_superop(ch, axis, angle);
      CHECK((R - oracle::rotation(ch, axis, angle)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((R.transpose() * R - Mat16::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("hard pulse limit: rf-only generator reproduces the rotation") {
  ControlSettings c;
  c.rfAmp_I = 10000;
  c.rfPhase_I = 0.3;
  SpinSystem s;
  const double t = 0.25 / 10000;  // 90 degrees
  const Mat16 P = propagator(build_generator(s, c), t);
  const Mat16 R = rotation_superop(Channel::I, Vec3(std::cos(0.3), std::sin(0.3), 0), oracle::kPi / 2);
  CHECK((P - R).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("propagator cache reuses entries") {
  PropagatorCache cache;
  const Mat16 G = build_generator(SpinSystem::from_aggregates(193.6, 193.6, 145.2), {});
  const Mat16& a = cache.get(G, 1e-4);
  const Mat16& b = cache.get(G, 1e-4);
  CHECK(&a == &b);
  CHECK(cache.size() == 1);
  cache.get(G, 2e-4);
  CHECK(cache.size() == 2);
  CHECK((cache.get(G, 2e-4) - propagator(G, 2e-4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid inputs") {
  SpinSystem s = SpinSystem::from_aggregates(193.6, 100, 0);
  s.kDD = -1;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  CHECK_THROWS_AS(SpinSystem::from_aggregates(193.6, 100, 150).validate(), DomainError);
  const Mat16 G = build_generator(SpinSystem::from_aggregates(193.6, 100, 0), {});
  CHECK_THROWS(propagate(LiouvilleState::basis("Iz"), G, -1.0));
}
