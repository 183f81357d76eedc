// Acceptance run: one PASS/FAIL line per criterion, plus a report file
// (acceptance_report.txt in the working directory).

#include "bbcrop/crop.hpp"
#include "bbcrop/dante.hpp"
#include "bbcrop/dp.hpp"
#include "bbcrop/io.hpp"
#include "bbcrop/sim.hpp"
#include "bbcrop/star.hpp"
#include "oracle.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace bbcrop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Report {
  std::vector<std::string> lines;
  int failed = 0;
  int evaluated = 0;

  void note(const std::string& s) {
    fmt::print("  {}\n", s);
    lines.push_back("  " + s);
  }
  void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
    ++evaluated;
    if (!ok) ++failed;
    const std::string line = fmt::format("criterion {:2d} {} {}: {}", id, ok ? "PASS" : "FAIL", name, detail);
    fmt::print("{}\n", line);
    std::fflush(stdout);
    lines.push_back(line);
  }
};

const SpinSystem kRef = SpinSystem::from_aggregates(193.6, 193.6, 0.75 * 193.6);
const SpinSystem kNoCC = SpinSystem::from_aggregates(193.6, 193.6, 0.0);

double wrap(double a) { return std::remainder(a, 2 * oracle::kPi); }

DanteSequence design(std::size_t periods, const ReducedTrajectory& traj) {
  static std::map<std::size_t, DanteSequence> cache;
  auto it = cache.find(periods);
  if (it == cache.end()) it = cache.emplace(periods, refine_dante(dante_discretize(traj, periods), kRef)).first;
  return it->second;
}

void bound(Report& r) {
  const auto t0 = Clock::now();
  const double e1 = efficiency_bound(SpinSystem::from_aggregates(193.6, 193.6, 0.75 * 193.6));
  const double e0 = efficiency_bound(kNoCC);
  const double us = seconds_since(t0) * 1e6 / 2;
  const double o1 = oracle::eta(193.6, 193.6, 0.75 * 193.6), o0 = oracle::eta(193.6, 193.6, 0.0);
  r.note(fmt::format("eta(kc = 0.75 ka) = {:.8f}, closed form {:.8f}, stated 0.60216", e1, o1));
  r.note(fmt::format("eta(kc = 0) = {:.8f}, closed form {:.8f}, stated 0.41421", e0, o0));
  const bool ok = std::abs(e1 - 0.60216) <= 1e-5 && std::abs(e0 - 0.41421) <= 1e-5 && us < 1000 &&
                  std::abs(e1 - o1) < 1e-12 && std::abs(e0 - o0) < 1e-12;
  r.verdict(1, "bound evaluation", ok,
            fmt::format("{:.6f} (target 0.60216 +- 1e-5), {:.6f} (target 0.41421 +- 1e-5), {:.2f} us per call", e1,
                        e0, us));
}

void realization(Report& r, const ReducedTrajectory& traj, double gen_s) {
  const auto t0 = Clock::now();
  const double full = replay_full(traj, kRef);
  const double s = gen_s + seconds_since(t0);
  r.verdict(2, "on-resonance CROP realization", full >= 0.98 * traj.eta && s < 10,
            fmt::format("full replay {:.6f} = {:.4f} eta (>= 0.98), {:.2f} s", full, full / traj.eta, s));
}

void broadband(Report& r, const ReducedTrajectory& traj) {
  const auto t0 = Clock::now();
  const DanteSequence d = design(12, traj);
  const auto offs = default_offset_grid(kRef);
  const OffsetProfile bb = offset_profile(kRef, build_bbcrop(d, kRef), offs);
  const OffsetProfile plain = offset_profile(kRef, plain_sequence(d, kRef), offs);
  const double s = seconds_since(t0);
  const double eta = traj.eta;
  std::string row = "offset/J:";
  for (std::size_t i = 0; i < offs.size(); ++i)
    row += fmt::format(" {:+.0f}:{:.3f}/{:.3f}", offs[i] / 193.6, bb.efficiency[i] / eta, plain.efficiency[i] / eta);
  r.note("BB-CROP / plain, in units of eta");
  r.note(row);
  const double at3 = std::max(plain.efficiency[2], plain.efficiency[8]);
  const bool ok = bb.min() >= 0.95 * eta && at3 < 0.5 * eta && s < 60;
  r.verdict(3, "broadband property", ok,
            fmt::format("BB-CROP min {:.4f} eta (>= 0.95), plain at |3J| {:.4f} eta (< 0.5), {:.1f} s", bb.min() / eta,
                        at3 / eta, s));
}

void gamma_lock(Report& r, const ReducedTrajectory& traj) {
  const DanteSequence d = design(12, traj);
  const double g = traj.gamma;
  const double off = -3 * 193.6;
  const RunResult bb = run_sequence(kRef, build_bbcrop(d, kRef), off);
  const RunResult plain = run_sequence(kRef, plain_sequence(d, kRef), off);
  double worst_bb = 0, worst_plain_half = 0;
  std::string row_bb = "BB-CROP gamma - gamma* at boundaries:", row_plain = "plain:";
  for (std::size_t k = 0; k < bb.boundaries.size(); ++k) {
    const double dev = wrap(bb.boundaries[k].gamma - g);
    worst_bb = std::max(worst_bb, std::abs(dev));
    row_bb += fmt::format(" {:+.3f}", dev);
  }
  for (std::size_t k = 0; k < plain.boundaries.size(); ++k) {
    const double dev = wrap(plain.boundaries[k].gamma - g);
    if (2 * (k + 1) <= plain.boundaries.size()) worst_plain_half = std::max(worst_plain_half, std::abs(dev));
    row_plain += fmt::format(" {:+.3f}", dev);
  }
  r.note(row_bb);
  r.note(row_plain);
  r.verdict(4, "gamma locking at -3J", worst_bb <= 0.1 && worst_plain_half > 0.5,
            fmt::format("BB-CROP max |dev| {:.3f} rad (<= 0.1), plain max |dev| in first half {:.3f} rad (> 0.5)",
                        worst_bb, worst_plain_half));
}

DpPolicy dp(Report& r) {
  const auto t0 = Clock::now();
  DpOptions o;
  o.stages = 16;
  o.grid = 100;
  const DpPolicy pol = value_iteration(kNoCC, o);
  const DpExtraction ex = extract_sequence(pol);
  const double s = seconds_since(t0);
  const double v1 = pol.value(1, 1.0, 0.0), inept = oracle::inept_best(193.6, 193.6);
  bool mono = true;
  std::string row = "V_N(1,0):";
  for (std::size_t k = 1; k <= 16; ++k) {
    row += fmt::format(" {:.5f}", pol.value(k, 1.0, 0.0));
    if (pol.value(k, 1.0, 0.0) < pol.value(k - 1, 1.0, 0.0)) mono = false;
  }
  r.note(row);
  const double v16 = pol.value(16, 1.0, 0.0), opt = std::sqrt(2.0) - 1;
  const bool ok = std::abs(v1 / inept - 1) <= 5e-3 && mono && std::abs(v16 / opt - 1) <= 0.02 &&
                  std::abs(ex.replayed / ex.predicted - 1) <= 0.01 && s < 120;
  r.verdict(5, "dynamic programming", ok,
            fmt::format("V_1 {:.5f} vs {:.5f}, V_16 {:.5f} = {:.4f} of sqrt2-1, replay {:.5f} vs {:.5f}, {:.1f} s", v1,
                        inept, v16, v16 / opt, ex.replayed, ex.predicted, s));
  return pol;
}

void durations(Report& r) {
  const double nu1 = 13000;
  const double offs[] = {37130, -4770, -2760, -6820}, ref[] = {12.7, 36.1, 37.6, 34.1};
  bool ok = true;
  std::string row;
  for (int i = 0; i < 4; ++i) {
    const double tilt = std::atan(-offs[i] / nu1);
    const OffResonancePulse p = synth_tilted_180(Vec3(std::cos(tilt), 0, std::sin(tilt)), nu1);
    const double us = p.duration * 1e6;
    ok = ok && std::abs(us - ref[i]) <= 0.1 && std::abs(p.nu_off - offs[i]) < 1e-6;
    row += fmt::format(" {:.2f} kHz -> {:.2f} us (table {:.1f});", offs[i] / 1e3, us, ref[i]);
  }
  r.verdict(6, "tilted-pulse durations", ok, row);
}

void baselines(Report& r, const ReducedTrajectory& traj) {
  const DanteSequence d = design(12, traj);
  const double crop = run_sequence(kRef, build_bbcrop(d, kRef)).efficiency;
  const BaselineCurve inept = inept_reference(kRef, time_grid(1.0 / 193.6, 2000));
  const BaselineCurve cript = cript_reference(kRef, time_grid(4.0 / kRef.kc(), 2000));
  const double oi = oracle::inept_best(193.6, 193.6), oc = oracle::cript_best(193.6, kRef.kc());
  r.note(fmt::format("closed forms: INEPT {:.6f}, CRIPT {:.6f}", oi, oc));
  const bool ok = crop > inept.best && crop > cript.best && std::abs(inept.best / 0.32239 - 1) <= 5e-3 &&
                  std::abs(cript.best / 0.3097 - 1) <= 0.01 && std::abs(inept.best / oi - 1) <= 1e-3 &&
                  std::abs(cript.best / oc - 1) <= 1e-3;
  r.verdict(7, "baseline ordering", ok,
            fmt::format("BB-CROP {:.5f} > INEPT {:.5f} (0.32239 +- 0.5%), > CRIPT {:.5f} (0.3097 +- 1%)", crop,
                        inept.best, cript.best));
}

void orthogonality(Report& r, const ReducedTrajectory& traj) {
  const ReducedTrajectory zero = generate_crop(kNoCC);
  const ReducedTrajectory mid = generate_crop(SpinSystem::from_aggregates(193.6, 193.6, 50));
  const double a = verify_orthogonality(traj), b = verify_orthogonality(zero), c = verify_orthogonality(mid);
  r.verdict(8, "orthogonality invariant", std::max({a, b, c}) <= 1e-6,
            fmt::format("max |r1.r2|: {:.2e} (kc = 0.75 ka), {:.2e} (kc = 0.26 ka), {:.2e} (kc = 0)", a, c, b));
}

void invariants(Report& r, const ReducedTrajectory& traj, const DpPolicy& pol) {
  const auto t0 = Clock::now();
  std::mt19937 g(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_sys = [&] {
    const double ka = 300 * std::abs(u(g));
    return SpinSystem::from_aggregates(50 + 300 * std::abs(u(g)), ka, ka * u(g));
  };
  auto random_ctl = [&] {
    ControlSettings c;
    c.rfAmp_I = 5000 * std::abs(u(g));
    c.rfPhase_I = 3 * u(g);
    c.offset_I = 1000 * u(g);
    c.offset_S = 1000 * u(g);
    return c;
  };
  std::vector<std::pair<std::string, bool>> suites;

  {
    Vec16 x = LiouvilleState::basis("Iz").coeffs();
    x[0] = 0.5;
    for (int k = 0; k < 200; ++k) x = propagate(LiouvilleState(x), build_generator(random_sys(), random_ctl()), 1e-4).coeffs();
    suites.emplace_back("trace preservation", std::abs(x[0] - 0.5) < 1e-12);
  }
  {
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
      ControlSettings c;
      c.offset_I = 500 * u(g);
      const Mat16 G = build_generator(random_sys(), c);
      Vec16 x;
      for (int i = 0; i < 16; ++i) x[i] = u(g);
      const double before = x.tail<15>().norm();
      x = propagate(LiouvilleState(x), G, 1e-3).coeffs();
      ok = ok && x.tail<15>().norm() <= before * (1 + 1e-12);
    }
    suites.emplace_back("dissipativity", ok);
  }
  {
    bool ok = true;
    for (int k = 0; k < 50; ++k) {
      const Mat16 G = build_generator(random_sys(), random_ctl());
      const double t1 = 1e-3 * std::abs(u(g)), t2 = 1e-3 * std::abs(u(g));
      ok = ok && (propagator(G, t1 + t2) - propagator(G, t2) * propagator(G, t1)).cwiseAbs().maxCoeff() < 1e-10;
    }
    suites.emplace_back("propagator composition", ok);
  }
  {
    // Echo period at J = 0 without relaxation returns the frame's state, with
    // an error that falls by ~4 when the delay halves.
    const Vec6 s = expand(traj.states[traj.size() / 2]);
    const MovingFrame f = make_frame(head(s), tail(s), 0.0);
    SpinSystem free;
    SimOptions so;
    so.offset_I = 400;
    double prev = 0;
    bool ok = true;
    for (double delta : {4e-4, 2e-4, 1e-4}) {
      DanteSequence d;
      d.steps = {{0.0, 0.0, delta}};
      EventSimulator sim(free, so);
      Vec16 x = Vec16::Zero();
      for (int i = 0; i < 3; ++i) {
        x[1 + i] = s[i];
        x[9 + 3 * i] = s[3 + i];
      }
      const Vec16 x0 = x;
      for (const auto& ev : assemble_bbcrop(d, {f, f, f}, kRef).events) sim.apply(x, ev);
      const double err = (x - x0).norm();
      if (prev > 0) ok = ok && prev / err > 3;
      prev = err;
    }
    suites.emplace_back("echo identity", ok);
  }
  {
    bool ok = true;
    const Mat16 S = rotation_superop(Channel::S, Vec3::UnitX(), oracle::kPi);
    for (std::size_t i = traj.size() / 8; i < traj.size(); i += traj.size() / 8) {
      const Vec6 s = expand(traj.states[i]);
      const MovingFrame f = make_frame(head(s), tail(s), 0.0);
      Vec16 x = Vec16::Zero();
      for (int k = 0; k < 3; ++k) {
        x[1 + k] = s[k];
        x[9 + 3 * k] = s[3 + k];
      }
      const Vec16 y1 = S * rotation_superop(Channel::I, f.e1, oracle::kPi) * x;
      const Vec16 y3 = rotation_superop(Channel::I, f.e3, oracle::kPi) * x;
      ok = ok && (y1 - x).cwiseAbs().maxCoeff() < 1e-6 && (y3 + x).cwiseAbs().maxCoeff() < 1e-6;
    }
    suites.emplace_back("R1 fixes / R3 inverts", ok);
  }
  {
    bool ok = true;
    for (std::size_t k = 0; k < pol.stages(); ++k)
      for (std::size_t i = 0; i < pol.grid(); ++i)
        for (std::size_t j = 0; j < pol.grid(); ++j) ok = ok && pol.value_at(k + 1, i, j) >= pol.value_at(k, i, j) - 1e-12;
    suites.emplace_back("Bellman monotonicity", ok);
  }
  {
    StarOptions o;
    o.mode = SequenceMode::FiniteRf;
    o.nu1_I = o.nu1_S = 13000;
    const DanteSequence d = design(4, traj);
    const PulseSequence seq = build_bbcrop(d, kRef, o);
    const bool ok = parse_sequence(format_sequence(seq)) == seq && parse_dante(format_dante(d)) == d &&
                    parse_trajectory(format_trajectory(traj)) == traj;
    suites.emplace_back("round-trip serialization", ok);
  }
  const double s = seconds_since(t0);
  bool all = s < 300;
  std::string detail;
  for (const auto& [name, ok] : suites) {
    all = all && ok;
    detail += fmt::format("{} {}; ", name, ok ? "ok" : "FAILED");
  }
  r.verdict(9, "invariant suites", all, detail + fmt::format("{:.1f} s", s));
}

void rf_trend(Report& r, const ReducedTrajectory& traj) {
  StarOptions o;
  o.mode = SequenceMode::FiniteRf;
  o.nu1_I = o.nu1_S = 13000;
  const RfDistribution dist = RfDistribution::gaussian(0.10, 7);
  double nominal[2], spread[2];
  const std::size_t n[2] = {4, 12};
  for (int i = 0; i < 2; ++i) {
    const PulseSequence seq = build_bbcrop(design(n[i], traj), kRef, o);
    nominal[i] = offset_profile(kRef, seq, {0.0}).efficiency[0];
    spread[i] = rf_inhom_average(kRef, seq, {0.0}, dist).efficiency[0];
  }
  const double loss4 = nominal[0] - spread[0], loss12 = nominal[1] - spread[1];
  const bool ok = loss12 > loss4 && loss4 > 0 && loss12 > 0;
  r.verdict(10, "rf-inhomogeneity trend", ok,
            fmt::format("4 periods {:.4f} -> {:.4f}, 12 periods {:.4f} -> {:.4f} (in units of eta: loss {:.4f} vs {:.4f})",
                        nominal[0], spread[0], nominal[1], spread[1], loss4 / traj.eta, loss12 / traj.eta));
}

}  // namespace

int main() {
  Report r;
  fmt::print("reference system: J = 193.6 Hz, k_a = J, k_c = 0.75 k_a\n");
  const auto t0 = Clock::now();
  CropOptions co;
  co.stop_fraction = 0.999;
  const ReducedTrajectory traj = generate_crop(kRef, co);
  const double gen_s = seconds_since(t0);

  bound(r);
  realization(r, traj, gen_s);
  broadband(r, traj);
  gamma_lock(r, traj);
  const DpPolicy pol = dp(r);
  durations(r);
  baselines(r, traj);
  orthogonality(r, traj);
  invariants(r, traj, pol);
  rf_trend(r, traj);

  const std::string tail = fmt::format("acceptance: {} criteria evaluated, {} failed", r.evaluated, r.failed);
  fmt::print("{}\n", tail);
  r.lines.push_back(tail);
  std::ofstream out("acceptance_report.txt");
  for (const auto& l : r.lines) out << l << '\n';
  return r.failed == 0 ? 0 : 1;
}
