// bbcrop: bound, design, simulate and baseline commands.
//
// Exit codes: 0 success, 1 usage or invalid parameters, 2 domain or
// assembly failure, 3 malformed input file.

#include "bbcrop/config.hpp"
#include "bbcrop/crop.hpp"
#include "bbcrop/dante.hpp"
#include "bbcrop/dp.hpp"
#include "bbcrop/errors.hpp"
#include "bbcrop/io.hpp"
#include "bbcrop/sim.hpp"
#include "bbcrop/star.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdlib>
#include <functional>
#include <optional>

using namespace bbcrop;

namespace {

enum Exit { kOk = 0, kUsage = 1, kDomain = 2, kMalformed = 3 };

struct StageError : std::runtime_error {
  StageError(const std::string& what, int code) : std::runtime_error(what), code(code) {}
  int code;
};

// Runs one pipeline stage, translating library errors into exit codes.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw StageError(fmt::format("{}: {}", name, e.what()), kMalformed);
  } catch (const ParameterError& e) {
    throw StageError(fmt::format("{}: {}", name, e.what()), kUsage);
  } catch (const AxisError& e) {
    throw StageError(fmt::format("{}: {}", name, e.what()), kDomain);
  } catch (const std::exception& e) {
    throw StageError(fmt::format("{}: {}", name, e.what()), kDomain);
  }
}

struct Common {
  std::string config;
  std::string out;
  std::optional<double> J, kDD, kCSA_I, kCSA_S, kc_I, kc_S;

  void add(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("-o,--out", out, "output directory (overrides BBCROP_OUTPUT_DIR and the config)");
    app->add_option("--J", J, "scalar coupling, Hz");
    app->add_option("--kDD", kDD, "dipolar relaxation rate, Hz");
    app->add_option("--kCSA-I", kCSA_I, "CSA relaxation rate of I, Hz");
    app->add_option("--kCSA-S", kCSA_S, "CSA relaxation rate of S, Hz");
    app->add_option("--kc-I", kc_I, "cross-correlation rate of I, Hz");
    app->add_option("--kc-S", kc_S, "cross-correlation rate of S, Hz");
  }

  RunConfig load() const {
    RunConfig cfg = config.empty() ? RunConfig{} : stage("config", [&] { return load_config(config); });
    auto set = [](const std::optional<double>& v, double& field) {
      if (v) field = *v;
    };
    set(J, cfg.sys.J);
    set(kDD, cfg.sys.kDD);
    set(kCSA_I, cfg.sys.kCSA_I);
    set(kCSA_S, cfg.sys.kCSA_S);
    set(kc_I, cfg.sys.kc_I);
    set(kc_S, cfg.sys.kc_S);
    return cfg;
  }

  std::filesystem::path output(const RunConfig& cfg) const {
    return stage("output", [&] {
      if (out.empty()) return resolve_output_dir(cfg);
      RunConfig c = cfg;
      c.output_dir = out;
      ::unsetenv("BBCROP_OUTPUT_DIR");
      return resolve_output_dir(c);
    });
  }
};

void write(const std::filesystem::path& path, const std::string& text) {
  stage("write", [&] { write_text(path, text); });
  fmt::print("  wrote {}\n", path.string());
}

int cmd_bound(const RunConfig& cfg) {
  const CropConstants c = stage("bound", [&] {
    cfg.sys.validate();
    return solve_gamma(cfg.sys);
  });
  fmt::print("eta     {:.8f}\n", c.eta);
  fmt::print("zeta    {:.8f}\n", c.zeta);
  fmt::print("gamma*  {:.8f} rad\n", c.gamma);
  fmt::print("theta   {:.8f} rad\n", c.theta);
  fmt::print("xi      {:.8f}\n", c.xi);
  fmt::print("chi     {:.8f}\n", c.chi);
  return kOk;
}

int cmd_design(RunConfig cfg, const std::filesystem::path& dir) {
  stage("config", [&] { cfg.validate(); });
  const auto& d = cfg.design;
  const SpinSystem& sys = cfg.sys;
  const CropConstants c = stage("bound", [&] { return solve_gamma(sys); });
  fmt::print("eta = {:.6f}, gamma* = {:.6f} rad\n", c.eta, c.gamma);

  CropOptions co;
  co.stop_fraction = d.stop_fraction;
  const ReducedTrajectory traj = stage("trajectory", [&] { return generate_crop(sys, co); });
  fmt::print("trajectory: {} samples, {:.4f} ms, total flip {:.2f} deg\n", traj.size(), traj.duration() * 1e3,
             traj.total_flip() * 180 / 3.141592653589793);
  write(dir / "trajectory.tsv", format_trajectory(traj));

  DanteSequence dante;
  if (sys.kc() == 0.0) {
    DpOptions o;
    o.stages = d.periods;
    o.grid = d.dp_grid;
    const DpPolicy pol = stage("dynamic programming", [&] { return value_iteration(sys, o); });
    const DpExtraction ex = stage("dynamic programming", [&] { return extract_sequence(pol); });
    fmt::print("dynamic programming: V_{}(1,0) = {:.6f}, extracted replay {:.6f}\n", d.periods, ex.predicted,
               ex.replayed);
    write(dir / "policy.tsv", format_policy(pol, d.periods));
    dante = ex.sequence;
  } else {
    dante = stage("discretization", [&] { return dante_discretize(traj, d.periods); });
    if (d.refine) dante = stage("refinement", [&] { return refine_dante(dante, sys); });
  }
  const double de = stage("discretization", [&] { return dante_efficiency(dante, sys); });
  fmt::print("DANTE: {} steps, efficiency {:.6f} ({:.4f} eta)\n", dante.size(), de, de / c.eta);
  write(dir / "dante.tsv", format_dante(dante));

  StarOptions so;
  so.mode = d.mode;
  so.nu1_I = d.rf_I;
  so.nu1_S = d.rf_S;
  so.pattern = d.pattern;
  so.cycle = d.cycle;
  const PulseSequence seq = stage("assembly", [&] { return build_bbcrop(dante, sys, so); });
  const double on = stage("simulation", [&] { return run_sequence(sys, seq).efficiency; });
  fmt::print("BB-CROP ({}, {}): {} events, {:.4f} ms, on-resonance {:.6f} ({:.4f} eta)\n", to_string(d.mode),
             to_string(d.pattern), seq.events.size(), seq.duration() * 1e3, on, on / c.eta);
  write(dir / "sequence.seq", format_sequence(seq));
  write(dir / "sequence.tbl", format_table(seq));
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& file, const std::filesystem::path& dir) {
  stage("config", [&] { cfg.validate(); });
  const PulseSequence seq = stage("parse", [&] { return parse_sequence(read_text(file)); });
  const SpinSystem& sys = seq.sys;
  const double eta = stage("bound", [&] { return efficiency_bound(sys); });
  RunConfig local = cfg;
  local.sys = sys;
  const auto offsets = stage("sweep", [&] { return local.offsets(); });
  RunOptions ro;
  ro.offset_S = cfg.sweep.offset_S;
  const OffsetProfile prof = stage("sweep", [&] { return offset_profile(sys, seq, offsets, true, 1.0, ro); });
  const std::string stem = std::filesystem::path(file).stem().string();
  fmt::print("{}: eta = {:.6f}\n", seq.label.empty() ? stem : seq.label, eta);
  fmt::print("{:>12} {:>12} {:>9}\n", "offset_Hz", "efficiency", "/eta");
  for (std::size_t i = 0; i < offsets.size(); ++i)
    fmt::print("{:>12.2f} {:>12.6f} {:>9.4f}\n", offsets[i], prof.efficiency[i], prof.efficiency[i] / eta);
  fmt::print("min {:.4f} eta, max {:.4f} eta\n", prof.min() / eta, prof.max() / eta);
  write(dir / (stem + "_profile.tsv"), format_profile(prof));
  write(dir / (stem + "_profile.svg"), profile_svg(prof, eta, sys.J, stem));
  write(dir / (stem + "_traces.tsv"), format_traces(prof));
  if (cfg.sweep.rf_fwhm > 0) {
    const OffsetProfile avg = stage("rf average", [&] {
      return rf_inhom_average(sys, seq, offsets, RfDistribution::gaussian(cfg.sweep.rf_fwhm, cfg.sweep.rf_samples),
                              ro);
    });
    fmt::print("rf average ({:.0f}% FWHM): min {:.4f} eta, max {:.4f} eta\n", cfg.sweep.rf_fwhm * 100,
               avg.min() / eta, avg.max() / eta);
    write(dir / (stem + "_profile_rf.tsv"), format_profile(avg));
  }
  return kOk;
}

int cmd_baseline(const RunConfig& cfg, std::size_t points, const std::filesystem::path& dir) {
  const SpinSystem& sys = cfg.sys;
  const double eta = stage("bound", [&] {
    sys.validate();
    return efficiency_bound(sys);
  });
  const BaselineCurve inept =
      stage("INEPT", [&] { return inept_reference(sys, time_grid(1.0 / sys.J, points)); });
  fmt::print("CROP bound  {:.6f}\n", eta);
  fmt::print("INEPT best  {:.6f} at {:.4f} ms\n", inept.best, inept.best_time * 1e3);
  write(dir / "inept.tsv", format_baseline(inept, "inept"));
  if (sys.kc() != 0.0) {
    const BaselineCurve cript =
        stage("CRIPT", [&] { return cript_reference(sys, time_grid(4.0 / std::abs(sys.kc()), points)); });
    fmt::print("CRIPT best  {:.6f} at {:.4f} ms\n", cript.best, cript.best_time * 1e3);
    write(dir / "cript.tsv", format_baseline(cript, "cript"));
  } else {
    fmt::print("CRIPT       0 (no cross-correlation)\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation-optimized broadband polarization transfer design and simulation"};
  app.require_subcommand(1);

  Common bound_opts, design_opts, sim_opts, base_opts;
  auto* bound = app.add_subcommand("bound", "print the efficiency bound and constants of motion");
  bound_opts.add(bound);

  auto* design = app.add_subcommand("design", "generate trajectory, DANTE and BB-CROP sequence files");
  design_opts.add(design);
  std::optional<std::size_t> periods;
  std::string mode, pattern, cycle;
  std::optional<double> rf_I, rf_S;
  bool no_refine = false;
  design->add_option("-N,--periods", periods, "number of DANTE periods");
  design->add_option("--mode", mode, "ideal or finite")->check(CLI::IsMember({"ideal", "finite"}));
  design->add_option("--pattern", pattern, "R3R1R3, R3R2R3, R2R1R2 or adaptive")
      ->check(CLI::IsMember({"R3R1R3", "R3R2R3", "R2R1R2", "adaptive"}));
  design->add_option("--cycle", cycle, "XY4 or constant")->check(CLI::IsMember({"XY4", "constant"}));
  design->add_option("--rf-I", rf_I, "I-channel rf amplitude, Hz");
  design->add_option("--rf-S", rf_S, "S-channel rf amplitude, Hz");
  design->add_flag("--no-refine", no_refine, "skip the direct optimization of the DANTE sequence");

  auto* simulate = app.add_subcommand("simulate", "offset profile and buildup traces of a sequence file");
  sim_opts.add(simulate);
  std::string seq_file;
  std::optional<double> span, rf_fwhm;
  std::optional<std::size_t> points;
  simulate->add_option("sequence", seq_file, "sequence file (.seq)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--span", span, "offset half-width, Hz (default 5 J)");
  simulate->add_option("--points", points, "number of offsets");
  simulate->add_option("--rf-fwhm", rf_fwhm, "relative FWHM of the rf scaling distribution");

  auto* baseline = app.add_subcommand("baseline", "INEPT and CRIPT reference curves");
  base_opts.add(baseline);
  std::size_t base_points = 400;
  baseline->add_option("--points", base_points, "samples per curve")->check(CLI::Range(1, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (bound->parsed()) return cmd_bound(bound_opts.load());
    if (design->parsed()) {
      RunConfig cfg = design_opts.load();
      auto& d = cfg.design;
      if (periods) d.periods = *periods;
      if (!mode.empty()) d.mode = parse_mode(mode);
      if (!pattern.empty()) d.pattern = parse_pattern(pattern);
      if (!cycle.empty()) d.cycle = parse_cycle(cycle);
      if (rf_I) d.rf_I = *rf_I;
      if (rf_S) d.rf_S = *rf_S;
      if (no_refine) d.refine = false;
      stage("config", [&] { cfg.validate(); });
      return cmd_design(cfg, design_opts.output(cfg));
    }
    if (simulate->parsed()) {
      RunConfig cfg = sim_opts.load();
      if (span) cfg.sweep.offset_span = *span;
      if (points) cfg.sweep.offset_points = *points;
      if (rf_fwhm) cfg.sweep.rf_fwhm = *rf_fwhm;
      stage("config", [&] { cfg.validate(); });
      return cmd_simulate(cfg, seq_file, sim_opts.output(cfg));
    }
    if (baseline->parsed()) {
      const RunConfig cfg = base_opts.load();
      return cmd_baseline(cfg, base_points, base_opts.output(cfg));
    }
  } catch (const StageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.code;
  }
  return kUsage;
}
