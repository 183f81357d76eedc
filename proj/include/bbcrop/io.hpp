#pragma once

// Text formats. Machine formats use radians, seconds and Hz with %.17g so
// that parse(format(x)) == x; the table format mirrors the published layout
// (microseconds, kHz, degrees) and is write-only.

#include "bbcrop/crop.hpp"
#include "bbcrop/dante.hpp"
#include "bbcrop/dp.hpp"
#include "bbcrop/sequence.hpp"
#include "bbcrop/sim.hpp"

#include <filesystem>
#include <string>

namespace bbcrop {

std::string format_trajectory(const ReducedTrajectory& traj);
ReducedTrajectory parse_trajectory(const std::string& text);

std::string format_dante(const DanteSequence& seq);
DanteSequence parse_dante(const std::string& text);

/// Line-oriented `bbcrop-sequence v1` format. Throws ParameterError for
/// labels or tags containing whitespace.
std::string format_sequence(const PulseSequence& seq);
/// Throws ParseError with the 1-based line number.
PulseSequence parse_sequence(const std::string& text);

/// type, duration_us, offset_kHz, phase_deg, S_pulse columns, one row per event.
std::string format_table(const PulseSequence& seq);

std::string format_profile(const OffsetProfile& p);
OffsetProfile parse_profile(const std::string& text);
/// offset_Hz, t_s, r2, gamma_rad per trace point.
std::string format_traces(const OffsetProfile& p);
/// Line plot of efficiency / eta against offset / J.
std::string profile_svg(const OffsetProfile& p, double eta, double J, const std::string& title);

std::string format_baseline(const BaselineCurve& c, const std::string& name);
/// r1, r2, V_k, beta1, beta2, tau on the grid of stage k.
std::string format_policy(const DpPolicy& policy, std::size_t k);

/// Throws ParameterError when the file cannot be read or written.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bbcrop
