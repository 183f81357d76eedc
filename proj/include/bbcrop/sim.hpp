#pragma once

// Offset and rf-inhomogeneity sweeps of pulse sequences, plus echoed INEPT and
// CRIPT reference transfers.

#include "bbcrop/liouville.hpp"
#include "bbcrop/sequence.hpp"

#include <cstddef>
#include <vector>

namespace bbcrop {

struct TracePoint {
  double t = 0.0;
  double r2 = 0.0;      ///< |r2|
  double gamma = 0.0;   ///< azimuth of l2 minus azimuth of l1, (-pi, pi]
  double ratio = 0.0;   ///< |l2| / |l1|
  double z2 = 0.0;      ///< <2IzSz>
};

struct RunResult {
  double efficiency = 0.0;            ///< final <2IzSz>
  std::vector<TracePoint> trace;      ///< after every event, starting with t = 0
  std::vector<TracePoint> boundaries; ///< at the sequence's period marks
  Vec16 final_state = Vec16::Zero();
};

struct RunOptions {
  double offset_S = 0.0;
  /// Scale applied to the S channel; negative selects the I-channel scale.
  double rf_scale_S = -1.0;
  bool drift_free = false;
};

/// Plays the sequence from rho = Iz with spin I at `offset_I` (Hz) and all
/// rf amplitudes scaled by `rf_scale`.
RunResult run_sequence(const SpinSystem& sys, const PulseSequence& seq, double offset_I = 0.0,
                       double rf_scale = 1.0, const RunOptions& opts = {});

struct OffsetProfile {
  std::vector<double> offsets;     ///< Hz, strictly increasing
  std::vector<double> efficiency;
  std::vector<std::vector<TracePoint>> traces;  ///< empty unless requested

  double min() const;
  double max() const;
};

/// n points spanning [-span, span]; default 11 points over +-5 J.
std::vector<double> offset_grid(double span, std::size_t n = 11);
std::vector<double> default_offset_grid(const SpinSystem& sys);

OffsetProfile offset_profile(const SpinSystem& sys, const PulseSequence& seq,
                             const std::vector<double>& offsets, bool keep_traces = false,
                             double rf_scale = 1.0, const RunOptions& opts = {});

struct RfDistribution {
  double fwhm = 0.10;         ///< fraction of the nominal amplitude
  std::vector<double> scales;
  std::vector<double> weights;  ///< sum to 1

  /// Gauss-Hermite quadrature of a Gaussian centred on 1. fwhm = 0 gives the
  /// single node (1, 1).
  static RfDistribution gaussian(double fwhm = 0.10, std::size_t samples = 7);
  void validate() const;
};

OffsetProfile rf_inhom_average(const SpinSystem& sys, const PulseSequence& seq,
                               const std::vector<double>& offsets, const RfDistribution& dist,
                               const RunOptions& opts = {});

struct BaselineCurve {
  std::vector<double> times;  ///< total transfer time, s
  std::vector<double> efficiency;
  double best = 0.0;
  double best_time = 0.0;
};

/// 90(I) - t/2 - 180(I,S) - t/2 - 90(I), ideal pulses.
BaselineCurve inept_reference(const SpinSystem& sys, const std::vector<double>& times);
/// 90(I) - T/2 - 180(I) - T/2 - 90(I), ideal pulses; zeros when k_c = 0.
BaselineCurve cript_reference(const SpinSystem& sys, const std::vector<double>& times);

PulseSequence inept_sequence(const SpinSystem& sys, double time);
PulseSequence cript_sequence(const SpinSystem& sys, double time);

/// Uniform grid of n points on (0, upper].
std::vector<double> time_grid(double upper, std::size_t n);

}  // namespace bbcrop
