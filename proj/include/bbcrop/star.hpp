#pragma once

// Trajectory-adapted echoes: moving frames, tilted 180 degree rotations and
// assembly of broadband sequences from a DANTE sequence.

#include "bbcrop/dante.hpp"
#include "bbcrop/liouville.hpp"
#include "bbcrop/sequence.hpp"

#include <cstddef>
#include <vector>

namespace bbcrop {

/// e1 along r1, e2 along the part of r2 orthogonal to e1, e3 = e1 x e2, and
/// the z unit vector decomposed as a e1 + b e2 + c e3.
struct MovingFrame {
  double time = 0.0;
  std::size_t period = 0;  ///< 1-based DANTE period
  int slot = 0;            ///< echo pulse 1..3 within the period
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 e3 = Vec3::UnitZ();
  Vec3 r2_dir = Vec3::UnitY();  ///< r2 / |r2| (equals e2 when r1 is orthogonal to r2)
  double r1_norm = 0.0;
  double r2_norm = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
};

/// Throws DegenerateFrameError when |r1|, |r2| or the orthogonal part of r2
/// is below 1e-6.
MovingFrame make_frame(const Vec3& r1, const Vec3& r2, double time);

enum class EchoPattern { R3R1R3, R3R2R3, R2R1R2, Adaptive };
enum class PhaseCycle { XY4, Constant };

struct StarOptions {
  SequenceMode mode = SequenceMode::Ideal;
  double nu1_I = 0.0;  ///< Hz, required in finite-rf mode
  double nu1_S = 0.0;
  EchoPattern pattern = EchoPattern::R3R1R3;
  PhaseCycle cycle = PhaseCycle::XY4;
  bool bookkeeping = true;
  double max_offset = 0.0;  ///< limit on |nu_off|, Hz; 0 disables the check
  /// Finite-rf mode: take half of each pulse length from the delays on
  /// either side, keeping pulse centres on the ideal timing.
  bool centred_timing = false;
};

/// Frames at the three echo-pulse times of every period with a delay. Each
/// frame is taken from the on-resonance replay of the echoed sequence built
/// up to that point, so the pulses placed so far are part of the replay.
std::vector<MovingFrame> compute_frames(const DanteSequence& dante, const SpinSystem& sys,
                                        EchoPattern pattern = EchoPattern::R3R1R3);

/// Off-resonance pi pulse about `axis`: phase = azimuth, nu_off = -nu1 tan(tilt),
/// duration = 1 / (2 nu_eff). Throws AxisError for |tilt| >= pi/2 - 1e-6.
OffResonancePulse synth_tilted_180(const Vec3& axis, double nu1, Channel channel = Channel::I);

/// Same axis check; ideal mode returns an instantaneous rotation.
PulseElement synth_rotation_180(const Vec3& axis, double nu1, SequenceMode mode,
                                Channel channel = Channel::I);

/// Advances every phase by the lag of all earlier off-resonance pulses on the
/// same channel and records the totals in the ledger. Idempotent.
PulseSequence apply_phase_bookkeeping(const PulseSequence& seq);

/// Broadband sequence: every delay becomes D/4 Ra D/4 Rb D/4 Ra D/4.
PulseSequence assemble_bbcrop(const DanteSequence& dante, const std::vector<MovingFrame>& frames,
                              const SpinSystem& sys, const StarOptions& opts = {});

/// compute_frames followed by assemble_bbcrop.
PulseSequence build_bbcrop(const DanteSequence& dante, const SpinSystem& sys,
                           const StarOptions& opts = {});

/// DANTE pulses and delays without refocusing.
PulseSequence plain_sequence(const DanteSequence& dante, const SpinSystem& sys,
                             SequenceMode mode = SequenceMode::Ideal, double nu1_I = 0.0);

enum class RefocusVariant { JPreserving, KcPreserving };

/// Each delay becomes D/2 pi D/2 with a pi pulse on both channels
/// (JPreserving) or on I only (KcPreserving).
PulseSequence conventional_refocus(const DanteSequence& dante, const SpinSystem& sys,
                                   RefocusVariant variant, SequenceMode mode = SequenceMode::Ideal,
                                   double nu1_I = 0.0, double nu1_S = 0.0);

}  // namespace bbcrop
