#include "bbcrop/dante.hpp"

#include "bbcrop/errors.hpp"
#include "bfgs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_2pi(double p) {
  double r = std::fmod(p, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  if (r >= 2 * kPi) r = 0.0;
  return r;
}

// Cumulative flip F(t) of the trajectory at sample times, F(0) = epsilon.
std::vector<double> cumulative_flip(const ReducedTrajectory& tr) {
  std::vector<double> F(tr.size());
  F[0] = tr.epsilon;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i)
    F[i + 1] = F[i] + 2 * kPi * tr.amplitude[i] * tr.step(i);
  return F;
}

// Index i with t_i <= t < t_{i+1}, clamped to the last interval.
std::size_t interval_of(const ReducedTrajectory& tr, double t) {
  auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - tr.t.begin());
  return std::clamp<std::size_t>(j == 0 ? 0 : j - 1, 0, tr.size() - 2);
}

double flip_at(const ReducedTrajectory& tr, const std::vector<double>& F, double t) {
  if (t <= 0) return F.front();
  const std::size_t i = interval_of(tr, t);
  const double frac = std::clamp((t - tr.t[i]) / tr.step(i), 0.0, 1.0);
  return F[i] + frac * (F[i + 1] - F[i]);
}

double time_at_flip(const ReducedTrajectory& tr, const std::vector<double>& F, double target) {
  if (target <= F.front()) return 0.0;
  if (target >= F.back()) return tr.t.back();
  auto it = std::lower_bound(F.begin(), F.end(), target);
  const std::size_t j = static_cast<std::size_t>(it - F.begin());
  const std::size_t i = j - 1;
  const double span = F[j] - F[i];
  const double frac = span > 0 ? (target - F[i]) / span : 0.0;
  return tr.t[i] + frac * tr.step(i);
}

}  // namespace

double DanteSequence::total_flip() const {
  double f = 0;
  for (const auto& s : steps) f += s.flip;
  return f;
}

double DanteSequence::duration() const {
  double d = 0;
  for (const auto& s : steps) d += s.delay;
  return d;
}

void DanteSequence::validate() const {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& s = steps[k];
    if (!std::isfinite(s.flip) || !std::isfinite(s.phase) || !std::isfinite(s.delay))
      throw ParameterError(fmt::format("DANTE step {} has non-finite values", k + 1));
    if (s.delay < 0) throw ParameterError(fmt::format("DANTE step {} has a negative delay", k + 1));
    if (s.flip < 0 || s.flip > kPi + 1e-12)
      throw ParameterError(fmt::format("DANTE step {} flip outside [0, pi]", k + 1));
  }
}

DanteSequence DanteSequence::normalized() const {
  DanteSequence out = *this;
  for (auto& s : out.steps) {
    double a = std::remainder(s.flip, 2 * kPi);  // (-pi, pi]
    double p = s.phase;
    if (a < 0) {
      a = -a;
      p += kPi;
    }
    s.flip = a;
    s.phase = wrap_2pi(p);
  }
  return out;
}

DanteSequence dante_discretize(const ReducedTrajectory& traj, std::size_t periods,
                               Partition partition) {
  traj.validate();
  if (periods < 2) throw ParameterError("DANTE discretization needs at least 2 periods");
  const std::size_t intervals = traj.size() - 1;
  if (periods > intervals)
    throw ParameterError(
        fmt::format("{} periods exceed the {} trajectory intervals", periods, intervals));
  const auto F = cumulative_flip(traj);
  const double T = traj.t.back();
  std::vector<double> b(periods + 1);
  b[0] = 0.0;
  b[periods] = T;
  for (std::size_t k = 1; k < periods; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(periods);
    b[k] = partition == Partition::EqualFlip ? time_at_flip(traj, F, frac * F.back()) : frac * T;
  }
  DanteSequence seq;
  double prev = 0.0;
  for (std::size_t k = 0; k < periods; ++k) {
    const double Fend = k + 1 == periods ? F.back() : flip_at(traj, F, b[k + 1]);
    const std::size_t i = interval_of(traj, b[k] * (1 + 1e-12));
    seq.steps.push_back({Fend - prev, traj.absolute_phase(i), b[k + 1] - b[k]});
    prev = Fend;
  }
  return seq.normalized();
}

Vec6 replay_reduced(const DanteSequence& seq, const ReducedModel& model) {
  Vec6 s = Vec6::Zero();
  s[2] = 1.0;
  for (const auto& st : seq.steps) {
    if (st.flip != 0.0)
      s = rotate_pair(s, Vec3(std::cos(st.phase), std::sin(st.phase), 0.0), st.flip);
    if (st.delay != 0.0) s = model.free_evolve(s, st.delay);
  }
  return s;
}

double dante_efficiency(const DanteSequence& seq, const SpinSystem& sys) {
  return replay_reduced(seq, ReducedModel::from(sys))[5];
}

DanteSequence refine_dante(const DanteSequence& seed, const SpinSystem& sys,
                           const RefineOptions& opts) {
  seed.validate();
  if (seed.steps.empty()) throw ParameterError("cannot refine an empty sequence");
  sys.validate();
  DanteSequence base = seed;
  if (opts.closing_pulse && base.steps.back().delay > 0) base.steps.push_back({0.0, 0.0, 0.0});
  const std::size_t m = base.steps.size();
  // Delays of zero-delay closing steps stay fixed.
  std::vector<std::size_t> free_delay;
  for (std::size_t k = 0; k < m; ++k)
    if (base.steps[k].delay > 0) free_delay.push_back(k);
  const double scale = 1.0 / sys.J;
  const ReducedModel model = ReducedModel::from(sys);

  auto unpack = [&](const Eigen::VectorXd& x) {
    DanteSequence s = base;
    for (std::size_t k = 0; k < m; ++k) {
      s.steps[k].flip = x[static_cast<Eigen::Index>(k)];
      s.steps[k].phase = x[static_cast<Eigen::Index>(m + k)];
    }
    for (std::size_t q = 0; q < free_delay.size(); ++q)
      s.steps[free_delay[q]].delay = std::abs(x[static_cast<Eigen::Index>(2 * m + q)]) * scale;
    return s;
  };
  Eigen::VectorXd x0(static_cast<Eigen::Index>(2 * m + free_delay.size()));
  for (std::size_t k = 0; k < m; ++k) {
    x0[static_cast<Eigen::Index>(k)] = base.steps[k].flip;
    x0[static_cast<Eigen::Index>(m + k)] = base.steps[k].phase;
  }
  for (std::size_t q = 0; q < free_delay.size(); ++q)
    x0[static_cast<Eigen::Index>(2 * m + q)] = base.steps[free_delay[q]].delay / scale;

  auto objective = [&](const Eigen::VectorXd& x) { return -replay_reduced(unpack(x), model)[5]; };
  const auto res = detail::bfgs_minimize(objective, x0, static_cast<int>(opts.max_iterations),
                                         opts.gradient_tolerance);
  DanteSequence best = res.f <= objective(x0) ? unpack(res.x) : base;
  return best.normalized();
}

}  // namespace bbcrop
