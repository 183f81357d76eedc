#pragma once

// Pulse-sequence events and their propagation through the two-spin model.

#include "bbcrop/liouville.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace bbcrop {

/// Rotation by `flip` about the transverse axis at `phase`. duration 0 is an
/// instantaneous rotation; otherwise the pulse has constant amplitude
/// flip / (2 pi duration).
struct HardPulse {
  Channel channel = Channel::I;
  double flip = 0.0;
  double phase = 0.0;
  double duration = 0.0;

  bool operator==(const HardPulse&) const = default;
};

struct Delay {
  double duration = 0.0;

  bool operator==(const Delay&) const = default;
};

/// Constant-amplitude pulse whose carrier is shifted by nu_off. In the frame
/// rotating with the shifted carrier the spin sees the field
/// (nu1 cos phase, nu1 sin phase, offset - nu_off), so a positive nu_off
/// tilts the effective field toward -z. The phase refers to that frame,
/// aligned with the carrier frame at the pulse start.
struct OffResonancePulse {
  Channel channel = Channel::I;
  double nu1 = 0.0;
  double nu_off = 0.0;
  double duration = 0.0;
  double phase = 0.0;

  double nu_eff() const;
  /// 2 pi nu_off duration: phase lag acquired relative to the carrier frame.
  double phase_lag() const;

  bool operator==(const OffResonancePulse&) const = default;
};

/// Instantaneous rotation about an arbitrary axis (ideal mode).
struct TiltedRotation {
  Channel channel = Channel::I;
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;

  bool operator==(const TiltedRotation&) const = default;
};

using PulseElement = std::variant<HardPulse, OffResonancePulse, TiltedRotation>;

/// Members run centred on a common midpoint, at most one per channel.
struct Simultaneous {
  std::vector<PulseElement> members;

  bool operator==(const Simultaneous&) const = default;
};

using PulseEvent = std::variant<HardPulse, Delay, OffResonancePulse, TiltedRotation, Simultaneous>;

enum class SequenceMode { Ideal, FiniteRf };

struct PulseSequence {
  std::vector<PulseEvent> events;
  /// Accumulated 2 pi nu_off tau per channel over all off-resonance pulses,
  /// applied to later phases when `bookkeeping` is set.
  std::array<double, 2> ledger{0.0, 0.0};
  bool bookkeeping = false;
  SpinSystem sys;
  SequenceMode mode = SequenceMode::Ideal;
  /// Number of events played before each period boundary.
  std::vector<std::size_t> period_marks;
  std::string label;
  /// Role of each event (alpha_0, D_1/4, R3, ...); empty or one per event.
  std::vector<std::string> tags;

  double duration() const;
  /// Throws ParameterError on non-finite fields, negative durations,
  /// zero-duration pulses in finite-rf mode or two members on one channel.
  void validate() const;

  bool operator==(const PulseSequence&) const = default;
};

double event_duration(const PulseEvent& ev);

struct SimOptions {
  double offset_I = 0.0;
  double offset_S = 0.0;
  double rf_scale_I = 1.0;
  double rf_scale_S = 1.0;
  /// Express the state in the frame of the nominal phases: the frame lag of
  /// off-resonance pulses is dropped instead of being applied.
  bool drift_free = false;
};

class EventSimulator {
 public:
  EventSimulator(const SpinSystem& sys, const SimOptions& opts);

  void apply(Vec16& state, const PulseEvent& ev);
  void apply(Vec16& state, const PulseElement& el);

 private:
  void apply_group(Vec16& state, const std::vector<PulseElement>& members);
  double scale(Channel c) const;
  ControlSettings base() const;

  SpinSystem sys_;
  SimOptions opts_;
  PropagatorCache cache_;
};

}  // namespace bbcrop
