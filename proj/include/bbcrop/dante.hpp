#pragma once

// Hard-pulse/delay (DANTE) sequences: sampling of a smooth trajectory and
// local refinement of the result.

#include "bbcrop/crop.hpp"
#include "bbcrop/liouville.hpp"
#include "bbcrop/reduced.hpp"

#include <cstddef>
#include <vector>

namespace bbcrop {

/// Pulse of `flip` (rad, [0, pi]) at phase `phase` on spin I, followed by `delay`.
struct DanteStep {
  double flip = 0.0;
  double phase = 0.0;
  double delay = 0.0;

  bool operator==(const DanteStep&) const = default;
};

/// Steps are played in order starting from Iz. A zero delay marks back-to-back
/// pulses or a closing pulse.
struct DanteSequence {
  std::vector<DanteStep> steps;

  std::size_t size() const { return steps.size(); }
  double total_flip() const;
  double duration() const;
  /// Throws ParameterError on non-finite values, negative delays or flips
  /// outside [0, pi].
  void validate() const;
  /// Folds negative or > pi flips into [0, pi] and phases into [0, 2 pi).
  DanteSequence normalized() const;

  bool operator==(const DanteSequence&) const = default;
};

enum class Partition { EqualFlip, EqualDuration };

/// N intervals of the trajectory; alpha_k is the flip accumulated over the
/// interval (the initial tip is added to the first), phi_k the absolute phase
/// at the interval start, Delta_k the interval length.
DanteSequence dante_discretize(const ReducedTrajectory& traj, std::size_t periods,
                               Partition partition = Partition::EqualFlip);

/// Final state of the sequence in the reduced model, starting from Iz.
Vec6 replay_reduced(const DanteSequence& seq, const ReducedModel& model);

/// Final <2IzSz> of the on-resonance reduced replay.
double dante_efficiency(const DanteSequence& seq, const SpinSystem& sys);

struct RefineOptions {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-10;
  bool closing_pulse = true;  ///< append a zero-flip pulse after the last delay
};

/// Local maximization of the on-resonance efficiency over all flips, phases
/// and delays, seeded by `seed`.
DanteSequence refine_dante(const DanteSequence& seed, const SpinSystem& sys,
                           const RefineOptions& opts = {});

}  // namespace bbcrop
