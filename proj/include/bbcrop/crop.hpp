#pragma once

// Relaxation-optimized transfer Iz -> 2IzSz: the efficiency bound, the
// constants of motion, and the constraint-driven on-resonance trajectory.

#include "bbcrop/liouville.hpp"
#include "bbcrop/reduced.hpp"

#include <cstddef>
#include <vector>

namespace bbcrop {

struct CropConstants {
  double eta = 0.0;
  double gamma = 0.0;  ///< angle from l1 to l2, rad
  double xi = 0.0;     ///< k_a / J
  double chi = 0.0;    ///< sqrt(1 + k_c^2 / J^2)
  double theta = 0.0;  ///< atan2(J, -k_c)
  double zeta = 0.0;
  double residual = 0.0;  ///< |(1/eta) cos(theta-gamma) + eta cos(theta+gamma) - 2 xi/chi|
};

/// sqrt(1 + zeta^2) - zeta, zeta^2 = (k_a^2 - k_c^2) / (J^2 + k_c^2).
/// Throws DomainError when k_a < |k_c|.
double efficiency_bound(const SpinSystem& sys);

/// Constants of motion; throws NumericError if the residual exceeds 1e-9.
CropConstants solve_gamma(const SpinSystem& sys);

struct ReducedState {
  double l1 = 0.0;
  double l2 = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double gamma = 0.0;  ///< azimuth of l2 minus azimuth of l1
  double psi1 = 0.0;   ///< azimuth of l1

  bool operator==(const ReducedState&) const = default;
};

ReducedState reduce(const Vec6& s);
Vec6 expand(const ReducedState& r);

/// Sampled trajectory. Sample i holds the state at t_i and the control
/// (A, phi) applied over [t_i, t_{i+1}); the last sample closes the
/// trajectory and carries a zero control. Steps are at most dt and shrink
/// where the control amplitude is large. Before t_0 the state Iz is tipped
/// by an instantaneous pulse of angle epsilon and phase bootstrap_phase.
struct ReducedTrajectory {
  double dt = 0.0;
  double epsilon = 0.0;
  double bootstrap_phase = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  std::vector<double> t;
  std::vector<ReducedState> states;
  std::vector<double> amplitude;  ///< Hz
  std::vector<double> phase;      ///< relative to l1, rad

  std::size_t size() const { return t.size(); }
  double duration() const { return t.empty() ? 0.0 : t.back(); }
  double step(std::size_t i) const { return t[i + 1] - t[i]; }
  double absolute_phase(std::size_t i) const { return states[i].psi1 + phase[i]; }
  /// epsilon plus the integral of 2 pi A dt, rad.
  double total_flip() const;
  void validate() const;

  bool operator==(const ReducedTrajectory&) const = default;
};

struct CropOptions {
  double dt = 0.0;             ///< 0 selects 1e-3 / max(J, k_a); upper bound on the step
  double max_angle = 0.01;     ///< rf rotation per step, rad
  double stop_fraction = 0.995;
  double epsilon = 1e-3;
  double max_duration = 0.0;  ///< 0 selects 10 / J
  bool project = true;
};

/// Throws DomainError for k_c < 0 or k_a < k_c.
ReducedTrajectory generate_crop(const SpinSystem& sys, const CropOptions& opts = {});

/// max |z1 z2 + l1 l2 cos(gamma)| over the trajectory.
double verify_orthogonality(const ReducedTrajectory& traj);

/// Piecewise-constant replay of the controls in the reduced model (exact
/// exponentials per step would be overkill; RK4 substeps are used).
Vec6 replay_reduced(const ReducedTrajectory& traj, const SpinSystem& sys);

/// Replays the controls through the 16-dimensional propagator on
/// resonance and returns the final <2IzSz>.
double replay_full(const ReducedTrajectory& traj, const SpinSystem& sys);

}  // namespace bbcrop
