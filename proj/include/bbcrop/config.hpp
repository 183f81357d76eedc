#pragma once

// Run configuration: a single JSON document with spin-system, design, sweep
// and output blocks. See README.md for the schema.

#include "bbcrop/liouville.hpp"
#include "bbcrop/sequence.hpp"
#include "bbcrop/star.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace bbcrop {

inline constexpr const char* kConfigSchema = "bbcrop-config/1";

struct DesignConfig {
  SequenceMode mode = SequenceMode::Ideal;
  std::size_t periods = 12;
  double rf_I = 13000.0;  ///< Hz
  double rf_S = 13000.0;  ///< Hz
  EchoPattern pattern = EchoPattern::R3R1R3;
  PhaseCycle cycle = PhaseCycle::XY4;
  bool refine = true;        ///< polish the DANTE sequence by direct optimization
  std::size_t dp_grid = 100; ///< grid used when k_c = 0
  double stop_fraction = 0.999;
};

struct SweepConfig {
  double offset_span = 0.0;  ///< Hz; 0 selects 5 J
  std::size_t offset_points = 11;
  double offset_S = 0.0;     ///< Hz
  double rf_fwhm = 0.0;      ///< fraction; 0 disables the rf average
  std::size_t rf_samples = 7;
};

struct RunConfig {
  SpinSystem sys = SpinSystem::from_aggregates(193.6, 193.6, 0.75 * 193.6);
  DesignConfig design;
  SweepConfig sweep;
  std::string output_dir = ".";

  /// Throws ParameterError for non-finite or out-of-range fields.
  void validate() const;
  std::vector<double> offsets() const;
};

/// Throws ParseError (with the line of the offending key where possible) on
/// malformed JSON, a missing or wrong schema tag, unknown keys or wrong types.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& cfg);

/// BBCROP_OUTPUT_DIR if set, else cfg.output_dir. Created when missing;
/// throws ParameterError if it cannot be written.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::string to_string(SequenceMode m);
std::string to_string(EchoPattern p);
std::string to_string(PhaseCycle c);
SequenceMode parse_mode(const std::string& s);
EchoPattern parse_pattern(const std::string& s);
PhaseCycle parse_cycle(const std::string& s);

}  // namespace bbcrop
