#include "bbcrop/liouville.hpp"

#include "bbcrop/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>

namespace bbcrop {

namespace {

using cd = std::complex<double>;
using Op = Eigen::Matrix<cd, 4, 4>;
using Op2 = Eigen::Matrix<cd, 2, 2>;

constexpr double kPi = std::numbers::pi;

Op2 pauli(int k) {
  Op2 m = Op2::Zero();
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
  }
  return m;
}

Op kron(const Op2& a, const Op2& b) {
  Op out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

// Spin operators: I_k = sigma_k/2 (x) 1, S_k = 1 (x) sigma_k/2.
Op spinI(int k) { return kron(pauli(k) * 0.5, pauli(0)); }
Op spinS(int k) { return kron(pauli(0), pauli(k) * 0.5); }

struct Basis {
  std::array<Op, 16> ops;
  Basis() {
    ops[0] = kron(pauli(0), pauli(0)) * 0.5;
    for (int k = 1; k <= 3; ++k) {
      ops[k] = spinI(k);
      ops[3 + k] = spinS(k);
    }
    int idx = 7;
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) ops[idx++] = 2.0 * spinI(a) * spinS(b);
  }
};

const Basis& basis() {
  static const Basis b;
  return b;
}

Mat16 superop(const std::function<Op(const Op&)>& f) {
  const auto& B = basis().ops;
  Mat16 m;
  for (int j = 0; j < 16; ++j) {
    Op fj = f(B[j]);
    for (int i = 0; i < 16; ++i) m(i, j) = (B[i] * fj).trace().real();
  }
  return m;
}

Op comm(const Op& a, const Op& b) { return a * b - b * a; }

Mat16 coherent(const Op& h) {
  return superop([&](const Op& r) { return Op(cd(0, -1) * comm(h, r)); });
}

Mat16 double_comm(const Op& a, const Op& b) {
  return superop([&](const Op& r) {
    return Op(-kPi * 0.5 * (comm(a, comm(b, r)) + comm(b, comm(a, r))));
  });
}

struct Pieces {
  Mat16 J, offI, offS, xI, yI, xS, yS, dd, csaI, csaS, ccI, ccS;
  Pieces() {
    Op zz = 2.0 * spinI(3) * spinS(3);
    J = coherent(kPi * zz);
    offI = coherent(2 * kPi * spinI(3));
    offS = coherent(2 * kPi * spinS(3));
    xI = coherent(2 * kPi * spinI(1));
    yI = coherent(2 * kPi * spinI(2));
    xS = coherent(2 * kPi * spinS(1));
    yS = coherent(2 * kPi * spinS(2));
    dd = double_comm(zz, zz);
    csaI = double_comm(spinI(3), spinI(3));
    csaS = double_comm(spinS(3), spinS(3));
    ccI = double_comm(zz, spinI(3));
    ccS = double_comm(zz, spinS(3));
  }
};

const Pieces& pieces() {
  static const Pieces p;
  return p;
}

double wrap_phase(double p) {
  double r = std::fmod(p, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  if (r >= 2 * kPi) r = 0.0;
  return r;
}

}  // namespace

std::size_t basis_index(std::string_view label) {
  for (std::size_t i = 0; i < kBasisLabels.size(); ++i)
    if (kBasisLabels[i] == label) return i;
  if (label == "E/2") return 0;
  throw ParameterError("unknown basis operator '" + std::string(label) + "'");
}

void SpinSystem::validate() const {
  const double vals[] = {J, kDD, kCSA_I, kCSA_S, kc_I, kc_S};
  for (double v : vals)
    if (!std::isfinite(v)) throw ParameterError("spin system has non-finite entries");
  if (kDD < 0 || kCSA_I < 0 || kCSA_S < 0)
    throw ParameterError("auto-relaxation rates must be >= 0");
  if (std::abs(kc_I) > kDD + kCSA_I)
    throw DomainError("|kc_I| exceeds kDD + kCSA_I");
  if (std::abs(kc_S) > kDD + kCSA_S)
    throw DomainError("|kc_S| exceeds kDD + kCSA_S");
}

SpinSystem SpinSystem::from_aggregates(double J, double ka, double kc) {
  SpinSystem s;
  s.J = J;
  s.kDD = ka;
  s.kc_I = kc;
  return s;
}

ControlSettings ControlSettings::normalized() const {
  if (!(rfAmp_I >= 0) || !(rfAmp_S >= 0))
    throw ParameterError("rf amplitudes must be >= 0");
  ControlSettings c = *this;
  c.rfPhase_I = wrap_phase(rfPhase_I);
  c.rfPhase_S = wrap_phase(rfPhase_S);
  return c;
}

LiouvilleState LiouvilleState::basis(std::string_view label) {
  LiouvilleState s;
  s.coeffs_[static_cast<Eigen::Index>(basis_index(label))] = 1.0;
  return s;
}

Mat16 build_generator(const SpinSystem& sys, const ControlSettings& ctl_in) {
  sys.validate();
  const ControlSettings ctl = ctl_in.normalized();
  const Pieces& p = pieces();
  Mat16 g = sys.J * p.J + ctl.offset_I * p.offI + ctl.offset_S * p.offS;
  if (ctl.rfAmp_I != 0.0)
    g += ctl.rfAmp_I * (std::cos(ctl.rfPhase_I) * p.xI + std::sin(ctl.rfPhase_I) * p.yI);
  if (ctl.rfAmp_S != 0.0)
    g += ctl.rfAmp_S * (std::cos(ctl.rfPhase_S) * p.xS + std::sin(ctl.rfPhase_S) * p.yS);
  g += sys.kDD * p.dd + sys.kCSA_I * p.csaI + sys.kCSA_S * p.csaS + sys.kc_I * p.ccI +
       sys.kc_S * p.ccS;
  return g;
}

Mat16 propagator(const Mat16& gen, double dt) {
  if (!(dt >= 0) || !std::isfinite(dt)) throw ParameterError("propagation time must be >= 0");
  if (!gen.allFinite()) throw NumericError("generator has non-finite entries");
  if (dt == 0.0) return Mat16::Identity();
  Mat16 scaled = gen * dt;
  Mat16 out = scaled.exp();
  if (!out.allFinite()) throw NumericError("matrix exponential overflowed");
  return out;
}

LiouvilleState propagate(const LiouvilleState& state, const Mat16& gen, double dt) {
  return LiouvilleState(propagator(gen, dt) * state.coeffs());
}

double expectation(const LiouvilleState& state, std::string_view label) {
  return state.coeffs()[static_cast<Eigen::Index>(basis_index(label))];
}

Mat16 rotation_superop(Channel channel, const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0) || !std::isfinite(n) || !std::isfinite(angle))
    throw ParameterError("rotation axis must be finite and nonzero");
  const Vec3 u = axis / n;
  auto op = [&](int k) { return channel == Channel::I ? spinI(k) : spinS(k); };
  Op nI = u.x() * op(1) + u.y() * op(2) + u.z() * op(3);
  // (2 n.I)^2 = 1 on the rotated spin, so exp(-i a n.I) = cos(a/2) - 2i sin(a/2) n.I
  Op U = std::cos(angle / 2) * Op::Identity() - cd(0, 2 * std::sin(angle / 2)) * nI;
  Op Ud = U.adjoint();
  return superop([&](const Op& r) { return Op(U * r * Ud); });
}

const Mat16& PropagatorCache::get(const Mat16& gen, double dt) {
  std::string_view bytes(reinterpret_cast<const char*>(gen.data()), sizeof(double) * 256);
  std::size_t h = std::hash<std::string_view>{}(bytes) ^ (std::hash<double>{}(dt) * 0x9e3779b97f4a7c15ULL);
  auto range = entries_.equal_range(h);
  for (auto it = range.first; it != range.second; ++it)
    if (it->second.dt == dt && it->second.gen == gen) return it->second.prop;
  auto it = entries_.emplace(h, Entry{gen, dt, propagator(gen, dt)});
  return it->second.prop;
}

}  // namespace bbcrop
