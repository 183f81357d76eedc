#include "bbcrop/sequence.hpp"

#include "bbcrop/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

double element_duration(const PulseElement& el) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TiltedRotation>)
          return 0.0;
        else
          return p.duration;
      },
      el);
}

Channel element_channel(const PulseElement& el) {
  return std::visit([](const auto& p) { return p.channel; }, el);
}

void check_element(const PulseElement& el, SequenceMode mode, std::size_t index) {
  auto fail = [&](const std::string& what) {
    throw ParameterError(fmt::format("event {}: {}", index + 1, what));
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HardPulse>) {
          if (!std::isfinite(p.flip) || !std::isfinite(p.phase) || !std::isfinite(p.duration))
            fail("hard pulse has non-finite fields");
          if (p.duration < 0) fail("negative pulse duration");
          if (mode == SequenceMode::FiniteRf && p.duration == 0 && p.flip != 0)
            fail("zero-duration pulse in finite-rf mode");
        } else if constexpr (std::is_same_v<T, OffResonancePulse>) {
          if (!std::isfinite(p.nu1) || !std::isfinite(p.nu_off) || !std::isfinite(p.duration) ||
              !std::isfinite(p.phase))
            fail("off-resonance pulse has non-finite fields");
          if (!(p.nu1 >= 0) || !(p.duration > 0)) fail("off-resonance pulse needs nu1 >= 0 and duration > 0");
        } else {
          if (!p.axis.allFinite() || !(p.axis.norm() > 0) || !std::isfinite(p.angle))
            fail("rotation axis must be finite and nonzero");
          if (mode == SequenceMode::FiniteRf) fail("instantaneous tilted rotation in finite-rf mode");
        }
      },
      el);
}

}  // namespace

double OffResonancePulse::nu_eff() const { return std::hypot(nu1, nu_off); }
double OffResonancePulse::phase_lag() const { return 2 * kPi * nu_off * duration; }

double event_duration(const PulseEvent& ev) {
  return std::visit(
      [](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, TiltedRotation>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Simultaneous>) {
          double d = 0;
          for (const auto& m : e.members) d = std::max(d, element_duration(m));
          return d;
        } else {
          return e.duration;
        }
      },
      ev);
}

double PulseSequence::duration() const {
  double d = 0;
  for (const auto& e : events) d += event_duration(e);
  return d;
}

void PulseSequence::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (const auto* d = std::get_if<Delay>(&ev)) {
      if (!std::isfinite(d->duration) || d->duration < 0)
        throw ParameterError(fmt::format("event {}: invalid delay", i + 1));
    } else if (const auto* g = std::get_if<Simultaneous>(&ev)) {
      bool seen[2] = {false, false};
      for (const auto& m : g->members) {
        check_element(m, mode, i);
        const int c = static_cast<int>(element_channel(m));
        if (seen[c]) throw ParameterError(fmt::format("event {}: two members on one channel", i + 1));
        seen[c] = true;
      }
    } else {
      std::visit(
          [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (!std::is_same_v<T, Delay> && !std::is_same_v<T, Simultaneous>)
              check_element(PulseElement(p), mode, i);
          },
          ev);
    }
  }
  if (!tags.empty() && tags.size() != events.size())
    throw ParameterError("tags must be empty or one per event");
  for (std::size_t m : period_marks)
    if (m > events.size()) throw ParameterError("period mark beyond the event list");
}

EventSimulator::EventSimulator(const SpinSystem& sys, const SimOptions& opts)
    : sys_(sys), opts_(opts) {
  sys_.validate();
  if (!(opts.rf_scale_I > 0) || !(opts.rf_scale_S > 0))
    throw ParameterError("rf scale must be > 0");
}

double EventSimulator::scale(Channel c) const {
  return c == Channel::I ? opts_.rf_scale_I : opts_.rf_scale_S;
}

ControlSettings EventSimulator::base() const {
  ControlSettings c;
  c.offset_I = opts_.offset_I;
  c.offset_S = opts_.offset_S;
  return c;
}

void EventSimulator::apply(Vec16& state, const PulseEvent& ev) {
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Delay>) {
          if (e.duration > 0) state = cache_.get(build_generator(sys_, base()), e.duration) * state;
        } else if constexpr (std::is_same_v<T, Simultaneous>) {
          apply_group(state, e.members);
        } else {
          apply(state, PulseElement(e));
        }
      },
      ev);
}

void EventSimulator::apply(Vec16& state, const PulseElement& el) {
  if (const auto* h = std::get_if<HardPulse>(&el)) {
    if (h->duration == 0.0) {
      if (h->flip != 0.0)
        state = rotation_superop(h->channel, Vec3(std::cos(h->phase), std::sin(h->phase), 0),
                                 h->flip * scale(h->channel)) *
                state;
      return;
    }
  } else if (const auto* r = std::get_if<TiltedRotation>(&el)) {
    state = rotation_superop(r->channel, r->axis, r->angle * scale(r->channel)) * state;
    return;
  }
  apply_group(state, {el});
}

void EventSimulator::apply_group(Vec16& state, const std::vector<PulseElement>& members) {
  double T = 0;
  for (const auto& m : members) T = std::max(T, element_duration(m));
  std::vector<double> start(members.size()), end(members.size());
  std::vector<double> cuts{0.0, T};
  for (std::size_t i = 0; i < members.size(); ++i) {
    const double d = element_duration(members[i]);
    start[i] = 0.5 * (T - d);
    end[i] = start[i] + d;
    cuts.push_back(start[i]);
    cuts.push_back(end[i]);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const double p = cuts[c];
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double d = element_duration(members[i]);
      if (d == 0.0 && start[i] == p) {
        apply(state, members[i]);
      } else if (d > 0.0 && end[i] == p && !opts_.drift_free) {
        if (const auto* o = std::get_if<OffResonancePulse>(&members[i]))
          state = rotation_superop(o->channel, Vec3::UnitZ(), o->phase_lag()) * state;
      }
    }
    if (c + 1 == cuts.size()) break;
    const double q = cuts[c + 1];
    if (!(q > p)) continue;
    ControlSettings ctl = base();
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double d = element_duration(members[i]);
      if (d == 0.0 || start[i] > p || end[i] < q) continue;
      const Channel ch = element_channel(members[i]);
      double amp = 0, phase = 0, shift = 0;
      if (const auto* h = std::get_if<HardPulse>(&members[i])) {
        amp = h->flip / (2 * kPi * h->duration);
        phase = h->phase;
      } else if (const auto* o = std::get_if<OffResonancePulse>(&members[i])) {
        amp = o->nu1;
        phase = o->phase;
        shift = o->nu_off;
      }
      amp *= scale(ch);
      if (amp < 0) {
        amp = -amp;
        phase += kPi;
      }
      if (ch == Channel::I) {
        ctl.rfAmp_I = amp;
        ctl.rfPhase_I = phase;
        ctl.offset_I -= shift;
      } else {
        ctl.rfAmp_S = amp;
        ctl.rfPhase_S = phase;
        ctl.offset_S -= shift;
      }
    }
    state = cache_.get(build_generator(sys_, ctl), q - p) * state;
  }
}

}  // namespace bbcrop
