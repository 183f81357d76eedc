#include "bbcrop/sim.hpp"

#include "bbcrop/errors.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

TracePoint point(const Vec16& c, double t) {
  TracePoint p;
  p.t = t;
  const double l1 = std::hypot(c[1], c[2]);
  const double l2 = std::hypot(c[9], c[12]);
  p.r2 = std::sqrt(l2 * l2 + c[15] * c[15]);
  p.z2 = c[15];
  p.ratio = l1 > 0 ? l2 / l1 : 0.0;
  double g = std::atan2(c[12], c[9]) - std::atan2(c[2], c[1]);
  g = std::remainder(g, 2 * kPi);
  if (g <= -kPi) g += 2 * kPi;
  p.gamma = g;
  return p;
}

void check_offsets(const std::vector<double>& offsets) {
  if (offsets.empty()) throw ParameterError("offset grid is empty");
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (!std::isfinite(offsets[i])) throw ParameterError("offset grid has non-finite entries");
    if (i > 0 && !(offsets[i] > offsets[i - 1]))
      throw ParameterError("offset grid must be strictly increasing");
  }
}

BaselineCurve sweep(const SpinSystem& sys, const std::vector<double>& times,
                    PulseSequence (*make)(const SpinSystem&, double)) {
  BaselineCurve c;
  c.times = times;
  c.best = -1.0;
  for (double t : times) {
    const double e = run_sequence(sys, make(sys, t)).efficiency;
    c.efficiency.push_back(e);
    if (e > c.best) {
      c.best = e;
      c.best_time = t;
    }
  }
  return c;
}

HardPulse ideal(Channel ch, double flip, double phase) { return HardPulse{ch, flip, phase, 0.0}; }

}  // namespace

RunResult run_sequence(const SpinSystem& sys, const PulseSequence& seq, double offset_I,
                       double rf_scale, const RunOptions& opts) {
  seq.validate();
  if (!std::isfinite(offset_I)) throw ParameterError("offset must be finite");
  SimOptions so;
  so.offset_I = offset_I;
  so.offset_S = opts.offset_S;
  so.rf_scale_I = rf_scale;
  so.rf_scale_S = opts.rf_scale_S < 0 ? rf_scale : opts.rf_scale_S;
  so.drift_free = opts.drift_free;
  EventSimulator sim(sys, so);
  Vec16 c = LiouvilleState::basis("Iz").coeffs();
  RunResult r;
  double t = 0.0;
  r.trace.push_back(point(c, t));
  std::size_t mark = 0;
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    sim.apply(c, seq.events[i]);
    if (!c.allFinite()) throw NumericError(fmt::format("state became non-finite at event {}", i + 1));
    t += event_duration(seq.events[i]);
    r.trace.push_back(point(c, t));
    while (mark < seq.period_marks.size() && seq.period_marks[mark] == i + 1) {
      r.boundaries.push_back(r.trace.back());
      ++mark;
    }
  }
  r.efficiency = c[15];
  r.final_state = c;
  return r;
}

double OffsetProfile::min() const {
  return efficiency.empty() ? 0.0 : *std::min_element(efficiency.begin(), efficiency.end());
}
double OffsetProfile::max() const {
  return efficiency.empty() ? 0.0 : *std::max_element(efficiency.begin(), efficiency.end());
}

std::vector<double> offset_grid(double span, std::size_t n) {
  if (n < 2 || !(span > 0)) throw ParameterError("offset grid needs span > 0 and >= 2 points");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = -span + 2 * span * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> default_offset_grid(const SpinSystem& sys) { return offset_grid(5 * sys.J, 11); }

OffsetProfile offset_profile(const SpinSystem& sys, const PulseSequence& seq,
                             const std::vector<double>& offsets, bool keep_traces,
                             double rf_scale, const RunOptions& opts) {
  check_offsets(offsets);
  OffsetProfile p;
  p.offsets = offsets;
  for (double o : offsets) {
    RunResult r = run_sequence(sys, seq, o, rf_scale, opts);
    p.efficiency.push_back(r.efficiency);
    if (keep_traces) p.traces.push_back(std::move(r.trace));
  }
  return p;
}

RfDistribution RfDistribution::gaussian(double fwhm, std::size_t samples) {
  if (!(fwhm >= 0) || !std::isfinite(fwhm)) throw ParameterError("FWHM must be >= 0");
  if (samples < 1) throw ParameterError("at least one quadrature sample is required");
  RfDistribution d;
  d.fwhm = fwhm;
  if (fwhm == 0.0 || samples == 1) {
    d.scales = {1.0};
    d.weights = {1.0};
    return d;
  }
  // Golub-Welsch for the Hermite weight exp(-x^2).
  const auto n = static_cast<Eigen::Index>(samples);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = std::sqrt(0.5 * static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const double sigma = fwhm / (2 * std::sqrt(2 * std::log(2.0)));
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    d.scales.push_back(1 + std::sqrt(2.0) * sigma * x);
    d.weights.push_back(v * v);
    total += v * v;
  }
  for (double& w : d.weights) w /= total;
  return d;
}

void RfDistribution::validate() const {
  if (scales.empty() || scales.size() != weights.size())
    throw ParameterError("rf distribution needs matching scales and weights");
  double sum = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0) || !(weights[i] >= 0)) throw ParameterError("rf scales must be > 0 and weights >= 0");
    sum += weights[i];
  }
  if (std::abs(sum - 1) > 1e-12) throw ParameterError("rf weights must sum to 1");
}

OffsetProfile rf_inhom_average(const SpinSystem& sys, const PulseSequence& seq,
                               const std::vector<double>& offsets, const RfDistribution& dist,
                               const RunOptions& opts) {
  dist.validate();
  check_offsets(offsets);
  if (dist.scales.size() == 1 && dist.scales[0] == 1.0)
    return offset_profile(sys, seq, offsets, false, 1.0, opts);
  OffsetProfile p;
  p.offsets = offsets;
  p.efficiency.assign(offsets.size(), 0.0);
  for (std::size_t k = 0; k < dist.scales.size(); ++k) {
    RunOptions o = opts;
    if (o.rf_scale_S >= 0) o.rf_scale_S *= dist.scales[k];
    const OffsetProfile part = offset_profile(sys, seq, offsets, false, dist.scales[k], o);
    for (std::size_t i = 0; i < offsets.size(); ++i) p.efficiency[i] += dist.weights[k] * part.efficiency[i];
  }
  return p;
}

PulseSequence inept_sequence(const SpinSystem& sys, double time) {
  PulseSequence s;
  s.sys = sys;
  s.label = "inept";
  s.events = {ideal(Channel::I, kPi / 2, kPi / 2), Delay{time / 2},
              Simultaneous{{ideal(Channel::I, kPi, 0.0), ideal(Channel::S, kPi, 0.0)}},
              Delay{time / 2}, ideal(Channel::I, kPi / 2, 0.0)};
  s.bookkeeping = true;
  return s;
}

PulseSequence cript_sequence(const SpinSystem& sys, double time) {
  PulseSequence s;
  s.sys = sys;
  s.label = "cript";
  const double last = sys.kc() >= 0 ? kPi / 2 : 3 * kPi / 2;
  s.events = {ideal(Channel::I, kPi / 2, kPi / 2), Delay{time / 2}, ideal(Channel::I, kPi, 0.0),
              Delay{time / 2}, ideal(Channel::I, kPi / 2, last)};
  s.bookkeeping = true;
  return s;
}

BaselineCurve inept_reference(const SpinSystem& sys, const std::vector<double>& times) {
  sys.validate();
  if (!(sys.J > 0)) throw ParameterError("J must be > 0");
  for (double t : times)
    if (!(t > 0) || t > 1.0 / sys.J * (1 + 1e-12)) throw ParameterError("INEPT times must lie in (0, 1/J]");
  return sweep(sys, times, &inept_sequence);
}

BaselineCurve cript_reference(const SpinSystem& sys, const std::vector<double>& times) {
  sys.validate();
  if (sys.kc() == 0.0) {
    BaselineCurve c;
    c.times = times;
    c.efficiency.assign(times.size(), 0.0);
    return c;
  }
  const double upper = 4.0 / std::abs(sys.kc());
  for (double t : times)
    if (!(t > 0) || t > upper * (1 + 1e-12)) throw ParameterError("CRIPT times must lie in (0, 4/k_c]");
  return sweep(sys, times, &cript_sequence);
}

std::vector<double> time_grid(double upper, std::size_t n) {
  if (!(upper > 0) || n < 1) throw ParameterError("time grid needs upper > 0 and n >= 1");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = upper * static_cast<double>(i + 1) / static_cast<double>(n);
  return g;
}

}  // namespace bbcrop
