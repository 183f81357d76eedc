#include "bbcrop/star.hpp"

#include "bbcrop/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <algorithm>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_2pi(double p) {
  double r = std::fmod(p, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  if (r >= 2 * kPi) r = 0.0;
  return r;
}

enum class Echo { R1, R2, R3 };

Echo echo_kind(EchoPattern pattern, int slot, const MovingFrame& f) {
  const bool outer = slot != 2;
  switch (pattern) {
    case EchoPattern::R3R1R3: return outer ? Echo::R3 : Echo::R1;
    case EchoPattern::R3R2R3: return outer ? Echo::R3 : Echo::R2;
    case EchoPattern::R2R1R2: return outer ? Echo::R2 : Echo::R1;
    case EchoPattern::Adaptive:
      if (outer) return Echo::R3;
      return f.r2_norm > f.r1_norm ? Echo::R2 : Echo::R1;
  }
  return Echo::R1;
}

HardPulse pi_pulse(Channel ch, double phase, SequenceMode mode, double nu1) {
  HardPulse p;
  p.channel = ch;
  p.flip = kPi;
  p.phase = wrap_2pi(phase);
  p.duration = mode == SequenceMode::Ideal ? 0.0 : 1.0 / (2 * nu1);
  return p;
}

HardPulse alpha_pulse(const DanteStep& s, SequenceMode mode, double nu1) {
  HardPulse p;
  p.channel = Channel::I;
  p.flip = s.flip;
  p.phase = wrap_2pi(s.phase);
  p.duration = mode == SequenceMode::Ideal ? 0.0 : s.flip / (2 * kPi * nu1);
  return p;
}

void check_rf(SequenceMode mode, double nu1_I, double nu1_S, bool need_S) {
  if (mode != SequenceMode::FiniteRf) return;
  if (!(nu1_I > 0) || !std::isfinite(nu1_I))
    throw ParameterError("finite-rf mode needs a positive I-channel rf amplitude");
  if (need_S && (!(nu1_S > 0) || !std::isfinite(nu1_S)))
    throw ParameterError("finite-rf mode needs a positive S-channel rf amplitude");
}

struct Builder {
  Builder(const SpinSystem& s, const StarOptions& o, bool probing)
      : sys(s), opts(o), probe(s, SimOptions{}), probing(probing) {
    state = LiouvilleState::basis("Iz").coeffs();
    seq.sys = s;
    seq.mode = o.mode;
  }

  void push(const PulseEvent& ev, std::string tag) {
    seq.events.push_back(ev);
    seq.tags.push_back(std::move(tag));
    if (probing) probe.apply(state, ev);
    time += event_duration(ev);
  }

  const SpinSystem& sys;
  StarOptions opts;
  EventSimulator probe;
  bool probing;
  Vec16 state;
  double time = 0.0;
  PulseSequence seq;
};

// Shortens the delays on both sides of every finite pulse by half its length,
// so pulse centres sit where the instantaneous pulses would be.
void centre_pulses(PulseSequence& seq) {
  auto& ev = seq.events;
  std::size_t period = 1, mark = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    while (mark < seq.period_marks.size() && seq.period_marks[mark] <= i) {
      ++mark;
      ++period;
    }
    if (std::holds_alternative<Delay>(ev[i])) continue;
    const double half = 0.5 * event_duration(ev[i]);
    if (half == 0.0) continue;
    for (int side : {-1, 1}) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + side;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(ev.size())) continue;
      if (auto* d = std::get_if<Delay>(&ev[static_cast<std::size_t>(j)])) {
        d->duration -= half;
        if (d->duration < 0)
          throw AssemblyError(fmt::format("pulses of {:.3g} s do not fit between delays", 2 * half),
                              std::min(period, std::max<std::size_t>(seq.period_marks.size(), 1)),
                              AssemblyError::Cause::ChannelLimit);
      }
    }
  }
}

PulseSequence build(const DanteSequence& dante, const SpinSystem& sys, const StarOptions& opts,
                    const std::vector<MovingFrame>* given, std::vector<MovingFrame>* collect) {
  dante.validate();
  sys.validate();
  check_rf(opts.mode, opts.nu1_I, opts.nu1_S, true);
  Builder b(sys, opts, given == nullptr);
  std::size_t frame_index = 0;
  std::size_t s_pulses = 0;
  bool inverted = false;
  for (std::size_t k = 0; k < dante.steps.size(); ++k) {
    const auto& step = dante.steps[k];
    const std::size_t period = k + 1;
    if (step.flip != 0.0) b.push(alpha_pulse(step, opts.mode, opts.nu1_I), fmt::format("alpha_{}", k));
    if (step.delay <= 0.0) continue;
    const double q = step.delay / 4;
    const std::string dtag = fmt::format("D_{}/4", period);
    b.push(Delay{q}, dtag);
    for (int slot = 1; slot <= 3; ++slot) {
      MovingFrame f;
      if (given) {
        if (frame_index >= given->size())
          throw AssemblyError("frames do not cover every echo pulse", period,
                              AssemblyError::Cause::Coverage);
        f = (*given)[frame_index];
      } else {
        const LiouvilleState st(b.state);
        try {
          f = make_frame(st.r1(), st.r2(), b.time);
        } catch (const DegenerateFrameError& e) {
          throw DegenerateFrameError(fmt::format("period {}, echo pulse {}: {}", period, slot, e.what()),
                                     e.time());
        }
        f.period = period;
        f.slot = slot;
      }
      ++frame_index;
      if (collect) collect->push_back(f);
      const Echo kind = echo_kind(opts.pattern, slot, f);
      const Vec3 axis = kind == Echo::R1 ? f.e1 : kind == Echo::R2 ? f.r2_dir : f.e3;
      PulseElement el;
      try {
        el = synth_rotation_180(axis, opts.nu1_I, opts.mode);
      } catch (const AxisError& e) {
        throw AssemblyError(fmt::format("echo pulse {}: {}", slot, e.what()), period,
                            AssemblyError::Cause::Axis);
      } catch (const ParameterError& e) {
        throw AssemblyError(fmt::format("echo pulse {}: {}", slot, e.what()), period,
                            AssemblyError::Cause::ChannelLimit);
      }
      if (const auto* o = std::get_if<OffResonancePulse>(&el)) {
        if (opts.max_offset > 0 && std::abs(o->nu_off) > opts.max_offset)
          throw AssemblyError(fmt::format("echo pulse {} needs offset {:.1f} Hz beyond limit {:.1f} Hz",
                                          slot, o->nu_off, opts.max_offset),
                              period, AssemblyError::Cause::ChannelLimit);
      }
      const char* etag = kind == Echo::R1 ? "R1" : kind == Echo::R2 ? "R2" : "R3";
      if (kind == Echo::R3) {
        b.push(std::visit([](const auto& p) -> PulseEvent { return p; }, el), etag);
      } else {
        const double sphase =
            opts.cycle == PhaseCycle::XY4 ? static_cast<double>(s_pulses % 2) * kPi / 2 : 0.0;
        ++s_pulses;
        b.push(Simultaneous{{el, pi_pulse(Channel::S, sphase, opts.mode, opts.nu1_S)}}, etag);
      }
      if (kind != Echo::R1) inverted = !inverted;
      b.push(Delay{q}, dtag);
    }
    b.seq.period_marks.push_back(b.seq.events.size());
  }
  if (given && frame_index != given->size())
    throw AssemblyError(fmt::format("{} frames supplied, {} used", given->size(), frame_index),
                        dante.steps.size(), AssemblyError::Cause::Coverage);
  // Patterns with an odd number of inverting echoes per period leave -2IzSz.
  if (inverted) b.push(pi_pulse(Channel::S, 0.0, opts.mode, opts.nu1_S), "S180");
  b.seq.label = "bbcrop";
  if (opts.mode == SequenceMode::FiniteRf && opts.centred_timing) centre_pulses(b.seq);
  return opts.bookkeeping ? apply_phase_bookkeeping(b.seq) : b.seq;
}

}  // namespace

MovingFrame make_frame(const Vec3& r1, const Vec3& r2, double time) {
  const double n1 = r1.norm(), n2 = r2.norm();
  if (!(n1 >= 1e-6)) throw DegenerateFrameError(fmt::format("|r1| = {:.3g} at t = {:.6g} s", n1, time), time);
  if (!(n2 >= 1e-6)) throw DegenerateFrameError(fmt::format("|r2| = {:.3g} at t = {:.6g} s", n2, time), time);
  MovingFrame f;
  f.time = time;
  f.r1_norm = n1;
  f.r2_norm = n2;
  f.e1 = r1 / n1;
  f.r2_dir = r2 / n2;
  Vec3 perp = r2 - r2.dot(f.e1) * f.e1;
  if (!(perp.norm() >= 1e-6))
    throw DegenerateFrameError(fmt::format("r2 parallel to r1 at t = {:.6g} s", time), time);
  f.e2 = perp.normalized();
  f.e3 = f.e1.cross(f.e2);
  f.a = f.e1.z();
  f.b = f.e2.z();
  f.c = f.e3.z();
  return f;
}

std::vector<MovingFrame> compute_frames(const DanteSequence& dante, const SpinSystem& sys,
                                        EchoPattern pattern) {
  StarOptions o;
  o.pattern = pattern;
  std::vector<MovingFrame> frames;
  build(dante, sys, o, nullptr, &frames);
  return frames;
}

OffResonancePulse synth_tilted_180(const Vec3& axis, double nu1, Channel channel) {
  if (!(nu1 > 0) || !std::isfinite(nu1)) throw ParameterError("rf amplitude must be > 0");
  const double n = axis.norm();
  if (!(n > 0) || !axis.allFinite()) throw AxisError("rotation axis must be finite and nonzero");
  const Vec3 m = axis / n;
  const double tilt = std::asin(std::clamp(m.z(), -1.0, 1.0));
  if (std::abs(tilt) >= kPi / 2 - 1e-6)
    throw AxisError(fmt::format("axis tilt {:.6f} rad is too close to z", tilt));
  OffResonancePulse p;
  p.channel = channel;
  p.nu1 = nu1;
  p.nu_off = -nu1 * std::tan(tilt);
  p.duration = 1.0 / (2 * p.nu_eff());
  p.phase = wrap_2pi(std::atan2(m.y(), m.x()));
  return p;
}

PulseElement synth_rotation_180(const Vec3& axis, double nu1, SequenceMode mode, Channel channel) {
  if (mode == SequenceMode::FiniteRf) return synth_tilted_180(axis, nu1, channel);
  const double n = axis.norm();
  if (!(n > 0) || !axis.allFinite()) throw AxisError("rotation axis must be finite and nonzero");
  const double tilt = std::asin(std::clamp(axis.z() / n, -1.0, 1.0));
  if (std::abs(tilt) >= kPi / 2 - 1e-6)
    throw AxisError(fmt::format("axis tilt {:.6f} rad is too close to z", tilt));
  return TiltedRotation{channel, axis / n, kPi};
}

PulseSequence apply_phase_bookkeeping(const PulseSequence& seq) {
  if (seq.bookkeeping) return seq;
  PulseSequence out = seq;
  std::array<double, 2> acc{0.0, 0.0};
  auto shift = [&](PulseElement& el) {
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          const double a = acc[static_cast<int>(p.channel)];
          if constexpr (std::is_same_v<T, TiltedRotation>) {
            p.axis = rotate(p.axis, Vec3::UnitZ(), a);
          } else {
            p.phase = wrap_2pi(p.phase + a);
          }
        },
        el);
  };
  auto lag = [](const PulseElement& el, std::array<double, 2>& into) {
    if (const auto* o = std::get_if<OffResonancePulse>(&el))
      into[static_cast<int>(o->channel)] += o->phase_lag();
  };
  for (auto& ev : out.events) {
    if (auto* g = std::get_if<Simultaneous>(&ev)) {
      std::array<double, 2> add{0.0, 0.0};
      for (auto& m : g->members) {
        shift(m);
        lag(m, add);
      }
      acc[0] += add[0];
      acc[1] += add[1];
    } else if (!std::holds_alternative<Delay>(ev)) {
      PulseElement el = std::visit(
          [](const auto& p) -> PulseElement {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Delay> || std::is_same_v<T, Simultaneous>)
              return HardPulse{};
            else
              return p;
          },
          ev);
      shift(el);
      std::array<double, 2> add{0.0, 0.0};
      lag(el, add);
      acc[0] += add[0];
      acc[1] += add[1];
      ev = std::visit([](const auto& p) -> PulseEvent { return p; }, el);
    }
  }
  out.ledger = acc;
  out.bookkeeping = true;
  return out;
}

PulseSequence assemble_bbcrop(const DanteSequence& dante, const std::vector<MovingFrame>& frames,
                              const SpinSystem& sys, const StarOptions& opts) {
  return build(dante, sys, opts, &frames, nullptr);
}

PulseSequence build_bbcrop(const DanteSequence& dante, const SpinSystem& sys,
                           const StarOptions& opts) {
  std::vector<MovingFrame> frames;
  try {
    frames = compute_frames(dante, sys, opts.pattern);
  } catch (const DegenerateFrameError& e) {
    std::size_t period = 1;
    double t = 0;
    for (const auto& s : dante.steps) {
      t += s.delay;
      if (t >= e.time()) break;
      ++period;
    }
    throw AssemblyError(e.what(), period, AssemblyError::Cause::DegenerateFrame);
  }
  return assemble_bbcrop(dante, frames, sys, opts);
}

PulseSequence plain_sequence(const DanteSequence& dante, const SpinSystem& sys, SequenceMode mode,
                             double nu1_I) {
  dante.validate();
  sys.validate();
  check_rf(mode, nu1_I, 0.0, false);
  PulseSequence seq;
  seq.sys = sys;
  seq.mode = mode;
  seq.label = "dante";
  for (std::size_t k = 0; k < dante.steps.size(); ++k) {
    const auto& s = dante.steps[k];
    if (s.flip != 0.0) {
      seq.events.push_back(alpha_pulse(s, mode, nu1_I));
      seq.tags.push_back(fmt::format("alpha_{}", k));
    }
    if (s.delay > 0) {
      seq.events.push_back(Delay{s.delay});
      seq.tags.push_back(fmt::format("D_{}", k + 1));
      seq.period_marks.push_back(seq.events.size());
    }
  }
  seq.bookkeeping = true;
  return seq;
}

PulseSequence conventional_refocus(const DanteSequence& dante, const SpinSystem& sys,
                                   RefocusVariant variant, SequenceMode mode, double nu1_I,
                                   double nu1_S) {
  dante.validate();
  sys.validate();
  const bool both = variant == RefocusVariant::JPreserving;
  check_rf(mode, nu1_I, nu1_S, both);
  PulseSequence seq;
  seq.sys = sys;
  seq.mode = mode;
  seq.label = both ? "echo-j" : "echo-kc";
  // Each x pulse on I mirrors later I rotations in the xz plane, so the
  // alpha phases flip sign while the number of echoes so far is odd.
  bool odd = false;
  auto push = [&seq](const PulseEvent& ev, std::string tag) {
    seq.events.push_back(ev);
    seq.tags.push_back(std::move(tag));
  };
  for (std::size_t k = 0; k < dante.steps.size(); ++k) {
    const auto& s = dante.steps[k];
    if (s.flip != 0.0) {
      DanteStep t = s;
      if (odd) t.phase = -t.phase;
      push(alpha_pulse(t, mode, nu1_I), fmt::format("alpha_{}", k));
    }
    if (s.delay <= 0) continue;
    const std::string dtag = fmt::format("D_{}/2", k + 1);
    push(Delay{s.delay / 2}, dtag);
    if (both)
      push(Simultaneous{{pi_pulse(Channel::I, 0.0, mode, nu1_I), pi_pulse(Channel::S, 0.0, mode, nu1_S)}},
           "echo");
    else
      push(pi_pulse(Channel::I, 0.0, mode, nu1_I), "echo");
    push(Delay{s.delay / 2}, dtag);
    seq.period_marks.push_back(seq.events.size());
    odd = !odd;
  }
  // I-only echoes flip 2IzSz once each.
  if (!both && odd) {
    const double nu = nu1_S > 0 ? nu1_S : nu1_I;
    push(pi_pulse(Channel::S, 0.0, mode, nu), "S180");
  }
  seq.bookkeeping = true;
  return seq;
}

}  // namespace bbcrop
