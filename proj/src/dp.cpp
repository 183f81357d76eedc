#include "bbcrop/dp.hpp"

#include "bbcrop/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

struct Tables {
  std::vector<double> beta, cb, sb;
  std::vector<double> tau, E, C, S;
};

Tables make_tables(const SpinSystem& sys, const DpOptions& o) {
  Tables t;
  const std::size_t nb = o.beta_samples, nt = o.tau_samples;
  for (std::size_t b = 0; b < nb; ++b) {
    const double beta = (kPi / 2) * static_cast<double>(b) / static_cast<double>(nb - 1);
    t.beta.push_back(beta);
    t.cb.push_back(b + 1 == nb ? 0.0 : std::cos(beta));
    t.sb.push_back(std::sin(beta));
  }
  for (std::size_t k = 0; k < nt; ++k) {
    const double tau = (0.5 / sys.J) * static_cast<double>(k) / static_cast<double>(nt - 1);
    t.tau.push_back(tau);
    t.E.push_back(std::exp(-kPi * sys.ka() * tau));
    t.C.push_back(std::cos(kPi * sys.J * tau));
    t.S.push_back(std::sin(kPi * sys.J * tau));
  }
  return t;
}

struct Interp {
  const double* v;
  std::size_t n;
  double scale;
  double operator()(double r1, double r2) const {
    const double x = std::min(r1, 1.0) * scale;
    const double y = std::min(r2, 1.0) * scale;
    std::size_t i = std::min(static_cast<std::size_t>(x), n - 2);
    std::size_t j = std::min(static_cast<std::size_t>(y), n - 2);
    const double fx = x - static_cast<double>(i), fy = y - static_cast<double>(j);
    const double* row0 = v + i * n + j;
    const double* row1 = row0 + n;
    const double a = row0[0] + fy * (row0[1] - row0[0]);
    const double b = row1[0] + fy * (row1[1] - row1[0]);
    return std::clamp(a + fx * (b - a), 0.0, 1.0);
  }
};

struct Choice {
  double value = -1.0;
  std::size_t beta = 0;
  int branch = 0;  // 0: beta1 = beta, beta2 = 0; 1: beta1 = 0, beta2 = beta
  std::size_t tau = 0;
};

// Exhaustive search over the sampled controls. Ties keep the first hit, and the
// loop order (tau ascending, then total flip ascending) implements the
// tie-break. With `direct` the return is r2' itself (stage 1).
Choice search(const Tables& t, const Interp* V, double r1, double r2) {
  Choice best;
  const std::size_t nb = t.beta.size(), nt = t.tau.size();
  const double tol = 1e-12;
  for (std::size_t k = 0; k < nt; ++k) {
    const double E = t.E[k], C = t.C[k], S = t.S[k];
    for (std::size_t b = 0; b < nb; ++b) {
      {
        const double p = r1 * t.cb[b], ps = r1 * t.sb[b];
        const double u = E * (p * C - r2 * S);
        const double r1n = std::sqrt(ps * ps + u * u);
        const double r2n = E * (r2 * C + p * S);
        const double v = V ? (*V)(r1n, r2n) : std::min(r2n, 1.0);
        if (v > best.value + tol) best = {v, b, 0, k};
      }
      if (b > 0) {
        const double q = r2 * t.cb[b], qs = r2 * t.sb[b];
        const double r1n = E * std::abs(r1 * C - q * S);
        const double w = E * (q * C + r1 * S);
        const double r2n = std::sqrt(qs * qs + w * w);
        const double v = V ? (*V)(r1n, r2n) : std::min(r2n, 1.0);
        if (v > best.value + tol) best = {v, b, 1, k};
      }
    }
  }
  return best;
}

DpControl to_control(const Tables& t, const Choice& c) {
  DpControl d;
  const double beta = t.beta[c.beta];
  d.beta1 = static_cast<float>(c.branch == 0 ? beta : 0.0);
  d.beta2 = static_cast<float>(c.branch == 1 ? beta : 0.0);
  d.tau = static_cast<float>(t.tau[c.tau]);
  return d;
}

double wrap_pm_pi(double a) {
  a = std::remainder(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

}  // namespace

std::pair<double, double> stage_map(double r1, double r2, double beta1, double beta2, double tau,
                                    const SpinSystem& sys) {
  const double E2 = std::exp(-2 * kPi * sys.ka() * tau);
  const double C = std::cos(kPi * sys.J * tau), S = std::sin(kPi * sys.J * tau);
  const double c1 = std::cos(beta1), c2 = std::cos(beta2);
  const double u = r1 * c1 * C - r2 * c2 * S;
  const double w = r2 * c2 * C + r1 * c1 * S;
  const double s1 = r1 * std::sin(beta1), s2 = r2 * std::sin(beta2);
  return {std::sqrt(E2 * u * u + s1 * s1), std::sqrt(E2 * w * w + s2 * s2)};
}

DpPolicy::DpPolicy(SpinSystem sys, DpOptions opts) : sys_(sys), opts_(opts) {
  const std::size_t cells = opts.grid * opts.grid;
  values_.assign(opts.stages + 1, std::vector<double>(cells, 0.0));
  controls_.assign(opts.stages + 1, std::vector<DpControl>(cells));
}

double DpPolicy::node(std::size_t i) const {
  return static_cast<double>(i) / static_cast<double>(opts_.grid - 1);
}

double& DpPolicy::value_at(std::size_t k, std::size_t i, std::size_t j) {
  return values_.at(k).at(i * opts_.grid + j);
}
double DpPolicy::value_at(std::size_t k, std::size_t i, std::size_t j) const {
  return values_.at(k).at(i * opts_.grid + j);
}
DpControl& DpPolicy::control_at(std::size_t k, std::size_t i, std::size_t j) {
  return controls_.at(k).at(i * opts_.grid + j);
}
const DpControl& DpPolicy::control_at(std::size_t k, std::size_t i, std::size_t j) const {
  return controls_.at(k).at(i * opts_.grid + j);
}

double DpPolicy::value(std::size_t k, double r1, double r2) const {
  if (k > opts_.stages) throw ParameterError(fmt::format("stage {} beyond policy", k));
  Interp I{values_[k].data(), opts_.grid, static_cast<double>(opts_.grid - 1)};
  return I(std::max(r1, 0.0), std::max(r2, 0.0));
}

void DpPolicy::validate() const {
  const std::size_t cells = opts_.grid * opts_.grid;
  if (opts_.grid < 2 || opts_.beta_samples < 2 || opts_.tau_samples < 2)
    throw ParameterError("degenerate DP grid");
  if (values_.size() != opts_.stages + 1 || controls_.size() != opts_.stages + 1)
    throw ParameterError("policy stage count does not match its tables");
  for (std::size_t k = 0; k <= opts_.stages; ++k)
    if (values_[k].size() != cells || controls_[k].size() != cells)
      throw ParameterError(fmt::format("policy table {} does not match the grid", k));
  if (!(sys_.J > 0)) throw ParameterError("policy has no valid spin system");
}

DpPolicy value_iteration(const SpinSystem& sys, const DpOptions& opts) {
  sys.validate();
  if (!(sys.J > 0)) throw ParameterError("J must be > 0");
  if (sys.kc() != 0.0) throw ParameterError("the grid dynamic program requires k_c = 0");
  if (opts.stages < 1) throw ParameterError("at least one stage is required");
  if (opts.grid < 50) throw ParameterError("grid needs at least 50 nodes per axis");
  if (opts.beta_samples < 2 || opts.tau_samples < 2)
    throw ParameterError("control sampling needs at least 2 points");
  DpPolicy pol(sys, opts);
  const Tables t = make_tables(sys, opts);
  const std::size_t n = opts.grid;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pol.value_at(0, i, j) = pol.node(j);
  for (std::size_t k = 1; k <= opts.stages; ++k) {
    Interp prev{pol.table(k - 1).data(), n, static_cast<double>(n - 1)};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Choice c = search(t, k == 1 ? nullptr : &prev, pol.node(i), pol.node(j));
        // tau = 0 keeps the state, so V_k never drops below V_{k-1} at a node.
        pol.value_at(k, i, j) = std::clamp(std::max(c.value, pol.value_at(k - 1, i, j)), 0.0, 1.0);
        pol.control_at(k, i, j) = to_control(t, c);
      }
  }
  return pol;
}

DpExtraction extract_sequence(const DpPolicy& policy) {
  policy.validate();
  const SpinSystem& sys = policy.system();
  const Tables t = make_tables(sys, policy.options());
  const std::size_t N = policy.stages();
  const std::size_t n = policy.grid();
  DpExtraction out;
  out.predicted = policy.value(N, 1.0, 0.0);

  // Signed components: r1 = (x1, 0, z1), r2 = (0, y2, z2).
  double x1 = 0, z1 = 1, y2 = 0, z2 = 0;
  const double tol = 1e-12;
  auto emit = [&](double angle, double phase) {
    angle = wrap_pm_pi(angle);
    if (std::abs(angle) < 1e-12) return;
    out.sequence.steps.push_back({angle, phase, 0.0});
  };
  auto rot_y = [&](double a) {  // z -> x
    const double c = std::cos(a), s = std::sin(a);
    const double nx = c * x1 + s * z1, nz = -s * x1 + c * z1;
    x1 = nx;
    z1 = nz;
    // r2 = (0, y2, z2): y2 stays, z2 rotates into x; only called when z2 == 0
    // or for a pi flip, where z2 -> -z2.
    z2 = c * z2;
    emit(a, kPi / 2);
  };
  auto rot_x = [&](double a) {  // y -> z
    const double c = std::cos(a), s = std::sin(a);
    const double ny = c * y2 - s * z2, nz = s * y2 + c * z2;
    y2 = ny;
    z2 = nz;
    z1 = c * z1;
    emit(a, 0.0);
  };

  double r1m = 1.0, r2m = 0.0;
  for (std::size_t k = N; k >= 1; --k) {
    const double r1 = std::hypot(x1, z1), r2 = std::hypot(y2, z2);
    Interp prev{policy.table(k - 1).data(), n, static_cast<double>(n - 1)};
    const Choice c = search(t, k == 1 ? nullptr : &prev, r1, r2);
    const DpControl u = to_control(t, c);
    const double b1 = u.beta1 == 0.0f ? 0.0 : t.beta[c.beta];
    const double b2 = u.beta2 == 0.0f ? 0.0 : t.beta[c.beta];
    const double tau = t.tau[c.tau];
    const std::size_t before = out.sequence.steps.size();
    if (std::abs(z2) <= tol) {
      rot_y(std::atan2(z1, x1) - b1);
      rot_x(b2 - std::atan2(z2, y2));
    } else {
      if (x1 < 0) rot_y(kPi);
      rot_x(b2 - std::atan2(z2, y2));
      rot_y(std::atan2(z1, x1) - b1);
    }
    if (out.sequence.steps.size() == before) out.sequence.steps.push_back({0.0, 0.0, 0.0});
    out.sequence.steps.back().delay = tau;
    const double E = std::exp(-kPi * sys.ka() * tau);
    const double C = std::cos(kPi * sys.J * tau), S = std::sin(kPi * sys.J * tau);
    const double nx = E * (x1 * C - y2 * S), ny = E * (y2 * C + x1 * S);
    x1 = nx;
    y2 = ny;
    out.stages.push_back({r1, r2, b1, b2, tau});
    std::tie(r1m, r2m) = stage_map(r1m, r2m, b1, b2, tau, sys);
  }
  rot_x(kPi / 2 - std::atan2(z2, y2));
  out.replayed = r2m;
  out.sequence = out.sequence.normalized();
  return out;
}

}  // namespace bbcrop
