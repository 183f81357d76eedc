#pragma once

// Grid dynamic program over the magnitudes (r1, r2) for k_c = 0.

#include "bbcrop/dante.hpp"
#include "bbcrop/liouville.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace bbcrop {

/// Magnitudes after a delay tau when r1 is tilted by beta1 out of the
/// transverse plane and r2 by beta2.
std::pair<double, double> stage_map(double r1, double r2, double beta1, double beta2, double tau,
                                    const SpinSystem& sys);

struct DpOptions {
  std::size_t stages = 1;
  std::size_t grid = 100;         ///< nodes per axis on [0, 1]
  std::size_t beta_samples = 91;  ///< per branch on [0, pi/2]
  std::size_t tau_samples = 128;  ///< on [0, 1/(2J)]
};

struct DpControl {
  float beta1 = 0.0f;
  float beta2 = 0.0f;
  float tau = 0.0f;
};

/// values[k] holds V_k on the grid (row index r1, column r2), k = 0..N with
/// V_0 = r2. controls[k] holds the maximizer of stage k (controls[0] unused).
class DpPolicy {
 public:
  DpPolicy() = default;
  DpPolicy(SpinSystem sys, DpOptions opts);

  const SpinSystem& system() const { return sys_; }
  const DpOptions& options() const { return opts_; }
  std::size_t stages() const { return opts_.stages; }
  std::size_t grid() const { return opts_.grid; }

  double node(std::size_t i) const;
  double& value_at(std::size_t k, std::size_t i, std::size_t j);
  double value_at(std::size_t k, std::size_t i, std::size_t j) const;
  DpControl& control_at(std::size_t k, std::size_t i, std::size_t j);
  const DpControl& control_at(std::size_t k, std::size_t i, std::size_t j) const;
  const std::vector<double>& table(std::size_t k) const { return values_.at(k); }

  /// Bilinear interpolation of V_k, clamped to [0, 1].
  double value(std::size_t k, double r1, double r2) const;

  /// Throws ParameterError when the tables disagree with the options.
  void validate() const;

 private:
  SpinSystem sys_;
  DpOptions opts_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<DpControl>> controls_;
};

DpPolicy value_iteration(const SpinSystem& sys, const DpOptions& opts);

struct DpStage {
  double r1 = 0.0;
  double r2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double tau = 0.0;
};

struct DpExtraction {
  DanteSequence sequence;
  std::vector<DpStage> stages;  ///< in playing order
  double predicted = 0.0;       ///< V_N(1, 0)
  double replayed = 0.0;        ///< r2 after chaining stage_map
};

DpExtraction extract_sequence(const DpPolicy& policy);

}  // namespace bbcrop
