#include "bbcrop/crop.hpp"

#include "bbcrop/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pm_pi(double a) {
  a = std::remainder(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

void check_domain(const SpinSystem& sys) {
  const double ka = sys.ka(), kc = sys.kc();
  if (!std::isfinite(sys.J) || !std::isfinite(ka) || !std::isfinite(kc))
    throw ParameterError("spin system has non-finite entries");
  if (!(sys.J > 0)) throw ParameterError("J must be > 0");
  if (ka < std::abs(kc))
    throw DomainError(fmt::format("k_a = {} < |k_c| = {}: zeta^2 would be negative", ka, kc));
}

struct Control {
  double A;
  double phi;
};

// Control enforcing l2/l1 = eta and d(gamma)/dt = 0 at the current state.
Control crop_control(const Vec6& s, const CropConstants& c, const ReducedModel& m) {
  const double l1 = std::hypot(s[0], s[1]);
  const double l2 = std::hypot(s[3], s[4]);
  const double z1 = s[2], z2 = s[5];
  const double g = c.gamma;
  double phi = std::atan2(z1 / l1 - z2 / l2 * std::cos(g), z2 / l2 * std::sin(g));
  const double D1 = -kPi * m.ka * l1 + kPi * m.J * c.chi * l2 * std::cos(c.theta + g);
  const double D2 = -kPi * m.ka * l2 + kPi * m.J * c.chi * l1 * std::cos(c.theta - g);
  const double den = 2 * kPi * (l2 * z1 * std::sin(phi) + l1 * z2 * std::sin(g - phi));
  double A = (l1 * D2 - l2 * D1) / den;
  if (!std::isfinite(A) || !std::isfinite(phi))
    throw NumericError(fmt::format(
        "no real control at l1={:.6g} z1={:.6g} l2={:.6g} z2={:.6g} (denominator {:.3g})", l1, z1,
        l2, z2, den));
  if (A < 0) {
    A = -A;
    phi += kPi;
  }
  return {A, wrap_pm_pi(phi)};
}

Vec6 crop_rhs(const Vec6& s, const CropConstants& c, const ReducedModel& m) {
  const Control u = crop_control(s, c, m);
  return m.deriv(s, u.A, std::atan2(s[1], s[0]) + u.phi);
}

void project(Vec6& s, const CropConstants& c) {
  const double l1 = std::hypot(s[0], s[1]);
  const double psi = std::atan2(s[1], s[0]);
  s[3] = c.eta * l1 * std::cos(psi + c.gamma);
  s[4] = c.eta * l1 * std::sin(psi + c.gamma);
}

}  // namespace

double efficiency_bound(const SpinSystem& sys) {
  check_domain(sys);
  const double ka = sys.ka(), kc = sys.kc(), J = sys.J;
  const double zeta = std::sqrt((ka * ka - kc * kc) / (J * J + kc * kc));
  return std::sqrt(1 + zeta * zeta) - zeta;
}

CropConstants solve_gamma(const SpinSystem& sys) {
  CropConstants c;
  c.eta = efficiency_bound(sys);
  const double ka = sys.ka(), kc = sys.kc(), J = sys.J;
  c.zeta = std::sqrt((ka * ka - kc * kc) / (J * J + kc * kc));
  c.xi = ka / J;
  c.chi = std::sqrt(1 + kc * kc / (J * J));
  c.theta = std::atan2(J, -kc);
  const double e = c.eta;
  // The left side of (1/eta) cos(theta-gamma) + eta cos(theta+gamma) = 2 xi/chi
  // touches the right side at its maximum, so the root is the maximizer.
  c.gamma = std::atan2(std::sin(c.theta) * (1 / e - e), std::cos(c.theta) * (1 / e + e));
  c.residual = std::abs((1 / e) * std::cos(c.theta - c.gamma) + e * std::cos(c.theta + c.gamma) -
                        2 * c.xi / c.chi);
  if (!(c.gamma > 0) || c.gamma > kPi || !(c.residual <= 1e-9)) {
    std::string curve;
    for (int i = 1; i <= 8; ++i) {
      const double g = kPi * i / 8;
      curve += fmt::format(" {:.4f}:{:.3e}", g,
                           (1 / e) * std::cos(c.theta - g) + e * std::cos(c.theta + g) -
                               2 * c.xi / c.chi);
    }
    throw NumericError(fmt::format("no gamma in (0, pi]; residual {:.3e}; curve{}", c.residual, curve));
  }
  return c;
}

ReducedState reduce(const Vec6& s) {
  ReducedState r;
  r.l1 = std::hypot(s[0], s[1]);
  r.l2 = std::hypot(s[3], s[4]);
  r.z1 = s[2];
  r.z2 = s[5];
  r.psi1 = std::atan2(s[1], s[0]);
  r.gamma = wrap_pm_pi(std::atan2(s[4], s[3]) - r.psi1);
  return r;
}

Vec6 expand(const ReducedState& r) {
  Vec6 s;
  s << r.l1 * std::cos(r.psi1), r.l1 * std::sin(r.psi1), r.z1, r.l2 * std::cos(r.psi1 + r.gamma),
      r.l2 * std::sin(r.psi1 + r.gamma), r.z2;
  return s;
}

double ReducedTrajectory::total_flip() const {
  double f = epsilon;
  for (std::size_t i = 0; i + 1 < amplitude.size(); ++i) f += 2 * kPi * amplitude[i] * step(i);
  return f;
}

void ReducedTrajectory::validate() const {
  const std::size_t n = t.size();
  if (n < 2 || states.size() != n || amplitude.size() != n || phase.size() != n)
    throw ParameterError("trajectory arrays are empty or of unequal length");
  if (!(dt > 0)) throw ParameterError("trajectory time step must be > 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(t[i] > t[i - 1])) throw ParameterError("trajectory samples not time-ordered");
    if (!std::isfinite(amplitude[i]) || !std::isfinite(phase[i]))
      throw ParameterError("trajectory controls must be finite");
  }
}

ReducedTrajectory generate_crop(const SpinSystem& sys, const CropOptions& opts) {
  sys.validate();
  if (sys.kc() < 0)
    throw DomainError(fmt::format("k_c = {} < 0: the constrained trajectory ends at -eta; design for -k_c and "
                                  "invert S at the end",
                                  sys.kc()));
  const CropConstants c = solve_gamma(sys);
  const ReducedModel m = ReducedModel::from(sys);
  const double rate = std::max(sys.J, sys.ka());
  const double dt = opts.dt > 0 ? opts.dt : 1e-3 / rate;
  if (dt > 1.0 / (100 * rate) * (1 + 1e-12))
    throw ParameterError(fmt::format("dt = {} exceeds 1/(100 max(J, k_a))", dt));
  if (!(opts.stop_fraction > 0) || opts.stop_fraction >= 1)
    throw ParameterError("stop fraction must lie in (0, 1)");
  if (!(opts.epsilon > 0) || opts.epsilon > 0.1) throw ParameterError("epsilon must lie in (0, 0.1]");
  const double tmax = opts.max_duration > 0 ? opts.max_duration : 10.0 / sys.J;
  const double target = opts.stop_fraction * c.eta;

  ReducedTrajectory tr;
  tr.dt = dt;
  tr.epsilon = opts.epsilon;
  tr.bootstrap_phase = kPi / 2;
  tr.eta = c.eta;
  tr.gamma = c.gamma;

  // Start on the constraint manifold just after the tip by epsilon.
  const double e = opts.epsilon;
  Vec6 s;
  s << std::sin(e), 0, std::cos(e), c.eta * std::sin(e) * std::cos(c.gamma),
      c.eta * std::sin(e) * std::sin(c.gamma), 0;
  s[5] = -(s[0] * s[3] + s[1] * s[4]) / s[2];

  if (!(opts.max_angle > 0) || opts.max_angle > 0.1) throw ParameterError("max angle must lie in (0, 0.1]");
  // Without cross-correlation gamma = pi/2 forces z1 z2 = 0: z1 is driven to
  // zero first, then z2 grows. The control diverges like 1/z at the switch,
  // so steps shrink geometrically and the last sliver is crossed directly.
  const bool split = sys.kc() == 0.0;
  const double zfloor = 1e-7;
  bool second = false;
  double t = 0.0;
  auto record = [&](double A, double phi) {
    tr.amplitude.push_back(A);
    tr.phase.push_back(phi);
  };
  auto jump = [&](double phi, double angle) {
    // Short hard rotation about the in-plane axis at phi from l1.
    const double psi = std::atan2(s[1], s[0]) + phi;
    const double h = std::max(angle / (2 * kPi * 1e6), 1e-9 * dt);
    record(angle / (2 * kPi * h), phi);
    s = rotate_pair(s, Vec3(std::cos(psi), std::sin(psi), 0), angle);
    t += h;
    tr.t.push_back(t);
    tr.states.push_back(reduce(s));
  };

  for (std::size_t n = 0;; ++n) {
    if (n == 0) {
      tr.t.push_back(t);
      tr.states.push_back(reduce(s));
    }
    if (s[5] >= target) {
      record(0.0, 0.0);
      break;
    }
    if (t >= tmax || n > 100 * static_cast<std::size_t>(std::ceil(tmax / dt)))
      throw NumericError(fmt::format("trajectory did not reach {:.4f} eta within {:.4g} s (z2 = {:.6f})",
                                     opts.stop_fraction, tmax, s[5]));
    if (split && !second && s[2] < zfloor) {
      const double l1 = std::hypot(s[0], s[1]);
      jump(kPi / 2, std::atan2(s[2], l1));
      const double l2 = std::hypot(s[3], s[4]);
      jump(0.0, std::asin(std::min(1.0, zfloor / l2)));
      second = true;
      continue;
    }
    const Control u = crop_control(s, c, m);
    const Vec6 k1 = crop_rhs(s, c, m);
    double h = std::min(dt, opts.max_angle / (2 * kPi * u.A));
    if (split) {
      const int iz = second ? 5 : 2;
      if (std::abs(k1[iz]) > 0) h = std::min(h, 0.2 * std::abs(s[iz]) / std::abs(k1[iz]));
    }
    record(u.A, u.phi);
    const Vec6 k2 = crop_rhs(s + 0.5 * h * k1, c, m);
    const Vec6 k3 = crop_rhs(s + 0.5 * h * k2, c, m);
    const Vec6 k4 = crop_rhs(s + h * k3, c, m);
    s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (opts.project) project(s, c);
    if (split && second) s[2] = 0.0;
    if (!s.allFinite()) throw NumericError("trajectory state became non-finite");
    t += h;
    tr.t.push_back(t);
    tr.states.push_back(reduce(s));
  }
  return tr;
}

double verify_orthogonality(const ReducedTrajectory& traj) {
  double worst = 0.0;
  for (const auto& r : traj.states)
    worst = std::max(worst, std::abs(r.z1 * r.z2 + r.l1 * r.l2 * std::cos(r.gamma)));
  return worst;
}

Vec6 replay_reduced(const ReducedTrajectory& traj, const SpinSystem& sys) {
  traj.validate();
  const ReducedModel m = ReducedModel::from(sys);
  Vec6 s = Vec6::Zero();
  s[2] = 1.0;
  s = rotate_pair(s, Vec3(std::cos(traj.bootstrap_phase), std::sin(traj.bootstrap_phase), 0),
                  traj.epsilon);
  const int sub = 4;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double h = traj.step(i) / sub;
    const double A = traj.amplitude[i];
    const double psi = traj.absolute_phase(i);
    for (int k = 0; k < sub; ++k) {
      const Vec6 k1 = m.deriv(s, A, psi);
      const Vec6 k2 = m.deriv(s + 0.5 * h * k1, A, psi);
      const Vec6 k3 = m.deriv(s + 0.5 * h * k2, A, psi);
      const Vec6 k4 = m.deriv(s + h * k3, A, psi);
      s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return s;
}

double replay_full(const ReducedTrajectory& traj, const SpinSystem& sys) {
  traj.validate();
  LiouvilleState st = LiouvilleState::basis("Iz");
  const Vec3 n0(std::cos(traj.bootstrap_phase), std::sin(traj.bootstrap_phase), 0);
  Vec16 c = rotation_superop(Channel::I, n0, traj.epsilon) * st.coeffs();
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    ControlSettings ctl;
    ctl.rfAmp_I = traj.amplitude[i];
    ctl.rfPhase_I = traj.absolute_phase(i);
    c = propagator(build_generator(sys, ctl), traj.step(i)) * c;
  }
  return c[15];
}

}  // namespace bbcrop
