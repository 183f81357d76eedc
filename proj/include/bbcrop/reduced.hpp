#pragma once

// Six-dimensional I-spin subspace (r1, r2) = (<Ix>,<Iy>,<Iz>, <2IxSz>,<2IySz>,<2IzSz>).
// Closed under free evolution with an I offset, I-channel rotations and
// S-channel pi pulses, so on-resonance DANTE replays and optimizations run
// here instead of in the full 16-dimensional space.

#include "bbcrop/liouville.hpp"

#include <Eigen/Core>

namespace bbcrop {

using Vec6 = Eigen::Matrix<double, 6, 1>;

struct ReducedModel {
  double J = 0.0;
  double ka = 0.0;
  double kc = 0.0;
  double offset = 0.0;  ///< I-channel offset, Hz

  static ReducedModel from(const SpinSystem& sys, double offset = 0.0) {
    return {sys.J, sys.ka(), sys.kc(), offset};
  }

  /// Time derivative under an I-channel rf field of amplitude A (Hz), phase psi.
  Vec6 deriv(const Vec6& s, double A, double psi) const;

  /// Exact free evolution for time t.
  Vec6 free_evolve(const Vec6& s, double t) const;
};

/// Rotation of both r1 and r2 by angle about axis (right-handed).
Vec6 rotate_pair(const Vec6& s, const Vec3& axis, double angle);

/// Rodrigues rotation of one vector.
Vec3 rotate(const Vec3& v, const Vec3& axis, double angle);

inline Vec3 head(const Vec6& s) { return s.head<3>(); }
inline Vec3 tail(const Vec6& s) { return s.tail<3>(); }

}  // namespace bbcrop
