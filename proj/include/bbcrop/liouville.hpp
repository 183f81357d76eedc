#pragma once

// Two-spin (I, S) density operator in the real 16-element product-operator
// basis and the superoperators acting on it.
//
// Basis order (orthonormal under Tr(A B), so coefficients are expectation
// values and rho = Iz has coefficient 1 on "Iz"):
//   E/2, Ix, Iy, Iz, Sx, Sy, Sz,
//   2IxSx, 2IxSy, 2IxSz, 2IySx, 2IySy, 2IySz, 2IzSx, 2IzSy, 2IzSz
//
// Equation of motion, all rates in Hz with the "divided by pi" convention
// (k_a = 1 / (pi T2)):
//
//   d rho/dt = -i [H, rho]
//              - pi kDD    [2IzSz, [2IzSz, rho]]
//              - pi kCSA_I [Iz, [Iz, rho]]
//              - pi kCSA_S [Sz, [Sz, rho]]
//              - pi kc_I   1/2 ([2IzSz, [Iz, rho]] + [Iz, [2IzSz, rho]])
//              - pi kc_S   1/2 ([2IzSz, [Sz, rho]] + [Sz, [2IzSz, rho]])
//
//   H = 2 pi ( J IzSz + off_I Iz + off_S Sz
//              + A_I (cos p_I Ix + sin p_I Iy) + A_S (cos p_S Sx + sin p_S Sy) )
//
// The double commutators carry a minus sign so that coherences decay. On the
// pair (Ix, 2IxSz) the relaxation block is then -pi [[k_a, k_c], [k_c, k_a]]
// with k_a = kDD + kCSA_I and k_c = kc_I: Ix -> [Iz, Ix] = i Iy ->
// [2IzSz, i Iy] = 2IxSz, and 2IxSz -> [Iz, 2IxSz] = 2i IySz -> [2IzSz, 2i IySz]
// = Ix, both entering with weight -pi kc_I. Longitudinal relaxation is absent
// (spin-diffusion limit), so Iz and 2IzSz are stationary without rf.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <string_view>
#include <unordered_map>

namespace bbcrop {

using Vec3 = Eigen::Vector3d;
using Vec16 = Eigen::Matrix<double, 16, 1>;
using Mat16 = Eigen::Matrix<double, 16, 16>;

enum class Channel { I = 0, S = 1 };

inline constexpr std::array<std::string_view, 16> kBasisLabels = {
    "E",     "Ix",    "Iy",    "Iz",    "Sx",    "Sy",    "Sz",    "2IxSx",
    "2IxSy", "2IxSz", "2IySx", "2IySy", "2IySz", "2IzSx", "2IzSy", "2IzSz"};

/// Index of a basis label; throws ParameterError for unknown names.
std::size_t basis_index(std::string_view label);

struct SpinSystem {
  double J = 0.0;       ///< scalar coupling, Hz
  double kDD = 0.0;     ///< dipolar auto-relaxation
  double kCSA_I = 0.0;  ///< CSA auto-relaxation of I
  double kCSA_S = 0.0;  ///< CSA auto-relaxation of S
  double kc_I = 0.0;    ///< DD/CSA cross-correlation of I
  double kc_S = 0.0;    ///< DD/CSA cross-correlation of S

  double ka() const { return kDD + kCSA_I; }
  double kc() const { return kc_I; }

  /// Throws ParameterError on negative or non-finite rates, DomainError on
  /// cross-correlation rates larger than the matching auto rate.
  void validate() const;

  /// System with only the aggregates of spin I set (kDD = k_a, kc_I = k_c).
  static SpinSystem from_aggregates(double J, double ka, double kc);

  bool operator==(const SpinSystem&) const = default;
};

struct ControlSettings {
  double rfAmp_I = 0.0;
  double rfPhase_I = 0.0;
  double rfAmp_S = 0.0;
  double rfPhase_S = 0.0;
  double offset_I = 0.0;
  double offset_S = 0.0;

  /// Copy with phases reduced to [0, 2 pi); throws on negative amplitudes.
  ControlSettings normalized() const;
};

class LiouvilleState {
 public:
  LiouvilleState() : coeffs_(Vec16::Zero()) {}
  explicit LiouvilleState(const Vec16& coeffs) : coeffs_(coeffs) {}

  /// Pure basis operator with unit coefficient.
  static LiouvilleState basis(std::string_view label);

  const Vec16& coeffs() const { return coeffs_; }
  Vec16& coeffs() { return coeffs_; }
  double operator[](std::size_t i) const { return coeffs_[i]; }

  /// In-phase vector (<Ix>, <Iy>, <Iz>).
  Vec3 r1() const { return {coeffs_[1], coeffs_[2], coeffs_[3]}; }
  /// Antiphase vector (<2IxSz>, <2IySz>, <2IzSz>).
  Vec3 r2() const { return {coeffs_[9], coeffs_[12], coeffs_[15]}; }

 private:
  Vec16 coeffs_;
};

/// Generator L of d c/dt = L c for the given spin system and controls.
Mat16 build_generator(const SpinSystem& sys, const ControlSettings& ctl);

/// exp(gen * dt) applied to the state. Throws on dt < 0 or non-finite gen.
LiouvilleState propagate(const LiouvilleState& state, const Mat16& gen, double dt);

/// exp(gen * dt) via Pade scaling and squaring.
Mat16 propagator(const Mat16& gen, double dt);

/// Trace{C rho} for the normalized basis operator C.
double expectation(const LiouvilleState& state, std::string_view label);

/// Superoperator of the unitary rotation exp(-i angle n.I) on one channel.
Mat16 rotation_superop(Channel channel, const Vec3& axis, double angle);

/// Memoizes propagators per (generator, dt); piecewise-constant sequences
/// revisit the same few events many times.
class PropagatorCache {
 public:
  const Mat16& get(const Mat16& gen, double dt);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  struct Entry {
    Mat16 gen;
    double dt;
    Mat16 prop;
  };
  std::unordered_multimap<std::size_t, Entry> entries_;
};

}  // namespace bbcrop
