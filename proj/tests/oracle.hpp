#pragma once

// Independent references used by the tests: explicit 4x4 spin matrices,
// a Taylor-series matrix exponential and closed-form optima.

#include "bbcrop/liouville.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

using C = std::complex<double>;
using M4 = Eigen::Matrix<C, 4, 4>;
using M2 = Eigen::Matrix<C, 2, 2>;
constexpr double kPi = std::numbers::pi;

inline M4 kron(const M2& a, const M2& b) {
  M4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return r;
}

struct Spins {
  M4 E, Ix, Iy, Iz, Sx, Sy, Sz;
  std::array<M4, 16> basis;

  Spins() {
    M2 one = M2::Identity(), sx, sy, sz;
    sx << 0, 0.5, 0.5, 0;
    sy << 0, C(0, -0.5), C(0, 0.5), 0;
    sz << 0.5, 0, 0, -0.5;
    E = M4::Identity();
    Ix = kron(sx, one);
    Iy = kron(sy, one);
    Iz = kron(sz, one);
    Sx = kron(one, sx);
    Sy = kron(one, sy);
    Sz = kron(one, sz);
    const M4 I[3] = {Ix, Iy, Iz}, S[3] = {Sx, Sy, Sz};
    basis[0] = 0.5 * E;
    for (int a = 0; a < 3; ++a) {
      basis[1 + a] = I[a];
      basis[4 + a] = S[a];
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) basis[7 + 3 * a + b] = 2.0 * I[a] * S[b];
  }

  bbcrop::Vec16 coeffs(const M4& rho) const {
    bbcrop::Vec16 c;
    for (int i = 0; i < 16; ++i) c[i] = (basis[i] * rho).trace().real();
    return c;
  }

  bbcrop::Mat16 super(const std::function<M4(const M4&)>& L) const {
    bbcrop::Mat16 G;
    for (int j = 0; j < 16; ++j) G.col(j) = coeffs(L(basis[j]));
    return G;
  }
};

inline M4 comm(const M4& a, const M4& b) { return a * b - b * a; }

/// Generator assembled from the spin matrices.
inline bbcrop::Mat16 generator(const bbcrop::SpinSystem& s, const bbcrop::ControlSettings& c) {
  static const Spins sp;
  const M4 H = 2 * kPi *
               (s.J * sp.Iz * sp.Sz + c.offset_I * sp.Iz + c.offset_S * sp.Sz +
                c.rfAmp_I * (std::cos(c.rfPhase_I) * sp.Ix + std::sin(c.rfPhase_I) * sp.Iy) +
                c.rfAmp_S * (std::cos(c.rfPhase_S) * sp.Sx + std::sin(c.rfPhase_S) * sp.Sy));
  const M4 D = 2.0 * sp.Iz * sp.Sz;
  auto dbl = [](const M4& a, const M4& b, const M4& r) -> M4 { return 0.5 * (comm(a, comm(b, r)) + comm(b, comm(a, r))); };
  return sp.super([&](const M4& r) -> M4 {
    return C(0, -1) * comm(H, r) - kPi * s.kDD * comm(D, comm(D, r)) - kPi * s.kCSA_I * comm(sp.Iz, comm(sp.Iz, r)) -
           kPi * s.kCSA_S * comm(sp.Sz, comm(sp.Sz, r)) - kPi * s.kc_I * dbl(D, sp.Iz, r) -
           kPi * s.kc_S * dbl(D, sp.Sz, r);
  });
}

/// exp(-i angle n.I) on one channel, as a superoperator.
inline bbcrop::Mat16 rotation(bbcrop::Channel ch, bbcrop::Vec3 n, double angle) {
  static const Spins sp;
  n.normalize();
  const M4 nI = ch == bbcrop::Channel::I ? M4(n.x() * sp.Ix + n.y() * sp.Iy + n.z() * sp.Iz)
                                         : M4(n.x() * sp.Sx + n.y() * sp.Sy + n.z() * sp.Sz);
  // (2 n.I)^2 = 1 for spin 1/2.
  const M4 U = std::cos(angle / 2) * sp.E - C(0, 1) * std::sin(angle / 2) * 2.0 * nI;
  return sp.super([&](const M4& r) -> M4 { return U * r * U.adjoint(); });
}

/// Taylor series with scaling and squaring.
inline bbcrop::Mat16 expm_taylor(const bbcrop::Mat16& A, int order = 18) {
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.05) ++s;
  const bbcrop::Mat16 B = A / std::pow(2.0, s);
  bbcrop::Mat16 term = bbcrop::Mat16::Identity(), sum = bbcrop::Mat16::Identity();
  for (int k = 1; k <= order; ++k) {
    term = term * B / k;
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// max over t of exp(-pi ka t) sin(pi J t): tan(pi J t) = J / ka.
inline double inept_best(double J, double ka) {
  const double x = std::atan(J / ka);
  return std::exp(-ka / J * x) * std::sin(x);
}

/// max over T of exp(-pi ka T) sinh(pi kc T): tanh(pi kc T) = kc / ka.
inline double cript_best(double ka, double kc) {
  const double y = std::atanh(kc / ka);
  return std::exp(-ka / kc * y) * std::sinh(y);
}

/// sqrt(1 + zeta^2) - zeta, written out from the definition.
inline double eta(double J, double ka, double kc) {
  const double z = std::sqrt((ka * ka - kc * kc) / (J * J + kc * kc));
  return std::sqrt(1 + z * z) - z;
}

}  // namespace oracle
