#include "bbcrop/io.hpp"

#include "bbcrop/config.hpp"
#include "bbcrop/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace bbcrop {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line, const std::string& what) {
  double v = 0;
  const char* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ParseError(fmt::format("{}: '{}' is not a finite number", what, tok), line);
  return v;
}

std::size_t to_size(const std::string& tok, std::size_t line, const std::string& what) {
  std::size_t v = 0;
  const char* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || p != end || tok.empty())
    throw ParseError(fmt::format("{}: '{}' is not a non-negative integer", what, tok), line);
  return v;
}

struct Line {
  std::size_t number;
  std::string text;
};

// Non-blank lines; comment lines other than the first are dropped unless
// `keep_comments` is set.
std::vector<Line> lines_of(const std::string& text, bool keep_comments) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string s;
  std::size_t n = 0;
  while (std::getline(in, s)) {
    ++n;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    if (s.find_first_not_of(" \t") == std::string::npos) continue;
    if (n > 1 && !keep_comments && s.rfind('#', 0) == 0) continue;
    out.push_back({n, s});
  }
  return out;
}

void expect_header(const std::vector<Line>& lines, const std::string& header) {
  if (lines.empty() || lines.front().number != 1 || lines.front().text != header)
    throw ParseError(fmt::format("expected header '{}'", header), 1);
}

void expect_columns(const Line& l, const std::vector<std::string>& cols) {
  if (split(l.text) != cols) {
    std::string want;
    for (const auto& c : cols) want += (want.empty() ? "" : " ") + c;
    throw ParseError("expected columns: " + want, l.number);
  }
}

std::vector<double> row(const Line& l, std::size_t n) {
  const auto toks = split(l.text);
  if (toks.size() != n) throw ParseError(fmt::format("expected {} columns, found {}", n, toks.size()), l.number);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = to_double(toks[i], l.number, fmt::format("column {}", i + 1));
  return v;
}

// key=value fields after the leading word; every key must be consumed.
class Fields {
 public:
  Fields(const std::vector<std::string>& toks, std::size_t first, std::size_t line) : line_(line) {
    for (std::size_t i = first; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value, got '" + toks[i] + "'", line);
      const std::string key = toks[i].substr(0, eq);
      if (map_.count(key)) throw ParseError("duplicate key '" + key + "'", line);
      map_[key] = toks[i].substr(eq + 1);
    }
  }

  std::string text(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) throw ParseError("missing key '" + key + "'", line_);
    std::string v = it->second;
    map_.erase(it);
    return v;
  }
  std::optional<std::string> maybe(const std::string& key) {
    if (!map_.count(key)) return std::nullopt;
    return text(key);
  }
  double number(const std::string& key) { return to_double(text(key), line_, key); }
  Channel channel() {
    const std::string c = text("ch");
    if (c == "I") return Channel::I;
    if (c == "S") return Channel::S;
    throw ParseError("channel must be I or S, got '" + c + "'", line_);
  }
  void done() const {
    if (!map_.empty()) throw ParseError("unknown key '" + map_.begin()->first + "'", line_);
  }

 private:
  std::map<std::string, std::string> map_;
  std::size_t line_;
};

const char* channel_name(Channel c) { return c == Channel::I ? "I" : "S"; }

void check_word(const std::string& s, const char* what) {
  if (s.find_first_of(" \t\r\n=") != std::string::npos)
    throw ParameterError(fmt::format("{} '{}' must not contain whitespace or '='", what, s));
}

std::string element_line(const PulseElement& el) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HardPulse>)
          return fmt::format("hard ch={} flip_rad={} phase_rad={} duration_s={}", channel_name(p.channel),
                             num(p.flip), num(p.phase), num(p.duration));
        else if constexpr (std::is_same_v<T, OffResonancePulse>)
          return fmt::format("offres ch={} nu1_Hz={} nu_off_Hz={} duration_s={} phase_rad={}",
                             channel_name(p.channel), num(p.nu1), num(p.nu_off), num(p.duration),
                             num(p.phase));
        else
          return fmt::format("tilted ch={} axis_x={} axis_y={} axis_z={} angle_rad={}",
                             channel_name(p.channel), num(p.axis.x()), num(p.axis.y()), num(p.axis.z()),
                             num(p.angle));
      },
      el);
}

std::optional<PulseElement> parse_element(const std::string& kind, Fields& f) {
  if (kind == "hard") {
    HardPulse p;
    p.channel = f.channel();
    p.flip = f.number("flip_rad");
    p.phase = f.number("phase_rad");
    p.duration = f.number("duration_s");
    return p;
  }
  if (kind == "offres") {
    OffResonancePulse p;
    p.channel = f.channel();
    p.nu1 = f.number("nu1_Hz");
    p.nu_off = f.number("nu_off_Hz");
    p.duration = f.number("duration_s");
    p.phase = f.number("phase_rad");
    return p;
  }
  if (kind == "tilted") {
    TiltedRotation p;
    p.channel = f.channel();
    p.axis = Vec3(f.number("axis_x"), f.number("axis_y"), f.number("axis_z"));
    p.angle = f.number("angle_rad");
    return p;
  }
  return std::nullopt;
}

double deg(double rad) { return rad * 180.0 / kPi; }

double wrap_deg(double rad) {
  double d = std::fmod(deg(rad), 360.0);
  if (d < 0) d += 360.0;
  if (d >= 359.95) d = 0.0;
  return d;
}

struct TableRow {
  std::string duration = "-", offset = "-", phase = "-", s = "-";
};

TableRow table_row(const PulseElement& el) {
  TableRow r;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HardPulse>) {
          r.duration = fmt::format("{:.1f}", p.duration * 1e6);
          r.phase = fmt::format("{:.1f}", wrap_deg(p.phase));
        } else if constexpr (std::is_same_v<T, OffResonancePulse>) {
          r.duration = fmt::format("{:.1f}", p.duration * 1e6);
          r.offset = fmt::format("{:.2f}", p.nu_off * 1e-3);
          r.phase = fmt::format("{:.1f}", wrap_deg(p.phase));
        } else {
          // Instantaneous: azimuth of the axis, tilt reported as elevation.
          r.duration = "0.0";
          r.phase = fmt::format("{:.1f}", wrap_deg(std::atan2(p.axis.y(), p.axis.x())));
          r.offset = fmt::format("tilt={:.1f}",
                                 deg(std::asin(std::clamp(p.axis.z() / p.axis.norm(), -1.0, 1.0))));
        }
      },
      el);
  return r;
}

std::string s_column(const PulseElement& el) {
  if (const auto* h = std::get_if<HardPulse>(&el))
    return fmt::format("{:.0f}@{:.0f}", deg(h->flip), wrap_deg(h->phase));
  return "tilted";
}

}  // namespace

std::string format_trajectory(const ReducedTrajectory& traj) {
  traj.validate();
  std::string out = "# bbcrop-trajectory v1\n";
  out += fmt::format("# dt_s={} epsilon_rad={} bootstrap_phase_rad={} eta={} gamma_rad={}\n", num(traj.dt),
                     num(traj.epsilon), num(traj.bootstrap_phase), num(traj.eta), num(traj.gamma));
  out += "t_s\tA_Hz\tphi_rad\tl1\tz1\tl2\tz2\tgamma_rad\tpsi1_rad\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", num(traj.t[i]), num(traj.amplitude[i]),
                       num(traj.phase[i]), num(s.l1), num(s.z1), num(s.l2), num(s.z2), num(s.gamma),
                       num(s.psi1));
  }
  return out;
}

ReducedTrajectory parse_trajectory(const std::string& text) {
  const auto lines = lines_of(text, true);
  expect_header(lines, "# bbcrop-trajectory v1");
  if (lines.size() < 3 || lines[1].text.rfind("# ", 0) != 0)
    throw ParseError("expected a parameter comment line", lines.size() > 1 ? lines[1].number : 2);
  ReducedTrajectory tr;
  {
    auto toks = split(lines[1].text.substr(2));
    Fields f(toks, 0, lines[1].number);
    tr.dt = f.number("dt_s");
    tr.epsilon = f.number("epsilon_rad");
    tr.bootstrap_phase = f.number("bootstrap_phase_rad");
    tr.eta = f.number("eta");
    tr.gamma = f.number("gamma_rad");
    f.done();
  }
  expect_columns(lines[2], {"t_s", "A_Hz", "phi_rad", "l1", "z1", "l2", "z2", "gamma_rad", "psi1_rad"});
  for (std::size_t k = 3; k < lines.size(); ++k) {
    if (lines[k].text.rfind('#', 0) == 0) continue;
    const auto v = row(lines[k], 9);
    tr.t.push_back(v[0]);
    tr.amplitude.push_back(v[1]);
    tr.phase.push_back(v[2]);
    tr.states.push_back(ReducedState{v[3], v[5], v[4], v[6], v[7], v[8]});
  }
  try {
    tr.validate();
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), lines.back().number);
  }
  return tr;
}

std::string format_dante(const DanteSequence& seq) {
  seq.validate();
  std::string out = "# bbcrop-dante v1\nflip_rad\tphase_rad\tdelay_s\n";
  for (const auto& s : seq.steps) out += fmt::format("{}\t{}\t{}\n", num(s.flip), num(s.phase), num(s.delay));
  return out;
}

DanteSequence parse_dante(const std::string& text) {
  const auto lines = lines_of(text, false);
  expect_header(lines, "# bbcrop-dante v1");
  if (lines.size() < 2) throw ParseError("missing column header", 2);
  expect_columns(lines[1], {"flip_rad", "phase_rad", "delay_s"});
  DanteSequence seq;
  for (std::size_t k = 2; k < lines.size(); ++k) {
    const auto v = row(lines[k], 3);
    seq.steps.push_back(DanteStep{v[0], v[1], v[2]});
  }
  try {
    seq.validate();
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), lines.back().number);
  }
  return seq;
}

std::string format_sequence(const PulseSequence& seq) {
  seq.validate();
  check_word(seq.label.empty() ? "-" : seq.label, "label");
  for (const auto& t : seq.tags) check_word(t, "tag");
  std::string out = "# bbcrop-sequence v1\n";
  out += fmt::format("sequence label={} mode={} bookkeeping={} ledger_I_rad={} ledger_S_rad={} events={}\n",
                     seq.label.empty() ? "-" : seq.label, to_string(seq.mode), seq.bookkeeping ? 1 : 0,
                     num(seq.ledger[0]), num(seq.ledger[1]), seq.events.size());
  const auto& s = seq.sys;
  out += fmt::format("system J_Hz={} kDD_Hz={} kCSA_I_Hz={} kCSA_S_Hz={} kc_I_Hz={} kc_S_Hz={}\n", num(s.J),
                     num(s.kDD), num(s.kCSA_I), num(s.kCSA_S), num(s.kc_I), num(s.kc_S));
  out += "marks";
  for (std::size_t m : seq.period_marks) out += fmt::format(" {}", m);
  out += "\n";
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const std::string tag =
        seq.tags.empty() || seq.tags[i].empty() ? std::string() : " tag=" + seq.tags[i];
    const auto& ev = seq.events[i];
    if (const auto* d = std::get_if<Delay>(&ev)) {
      out += fmt::format("delay duration_s={}{}\n", num(d->duration), tag);
    } else if (const auto* g = std::get_if<Simultaneous>(&ev)) {
      out += fmt::format("group members={}{}\n", g->members.size(), tag);
      for (const auto& m : g->members) out += "member " + element_line(m) + "\n";
    } else {
      PulseElement el = std::visit(
          [](const auto& p) -> PulseElement {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Delay> || std::is_same_v<T, Simultaneous>)
              return HardPulse{};
            else
              return p;
          },
          ev);
      out += element_line(el) + tag + "\n";
    }
  }
  out += "end\n";
  return out;
}

PulseSequence parse_sequence(const std::string& text) {
  const auto lines = lines_of(text, false);
  expect_header(lines, "# bbcrop-sequence v1");
  PulseSequence seq;
  std::size_t k = 1;
  auto next = [&](const char* what) -> const Line& {
    if (k >= lines.size())
      throw ParseError(fmt::format("unexpected end of file, expected {}", what),
                       lines.empty() ? 1 : lines.back().number + 1);
    return lines[k++];
  };

  const Line& head = next("sequence line");
  auto toks = split(head.text);
  if (toks.empty() || toks[0] != "sequence") throw ParseError("expected 'sequence' line", head.number);
  std::size_t expected = 0;
  {
    Fields f(toks, 1, head.number);
    const std::string label = f.text("label");
    seq.label = label == "-" ? "" : label;
    try {
      seq.mode = parse_mode(f.text("mode"));
    } catch (const ParameterError& e) {
      throw ParseError(e.what(), head.number);
    }
    const std::string b = f.text("bookkeeping");
    if (b != "0" && b != "1") throw ParseError("bookkeeping must be 0 or 1", head.number);
    seq.bookkeeping = b == "1";
    seq.ledger = {f.number("ledger_I_rad"), f.number("ledger_S_rad")};
    expected = to_size(f.text("events"), head.number, "events");
    f.done();
  }

  const Line& sysl = next("system line");
  toks = split(sysl.text);
  if (toks.empty() || toks[0] != "system") throw ParseError("expected 'system' line", sysl.number);
  {
    Fields f(toks, 1, sysl.number);
    seq.sys.J = f.number("J_Hz");
    seq.sys.kDD = f.number("kDD_Hz");
    seq.sys.kCSA_I = f.number("kCSA_I_Hz");
    seq.sys.kCSA_S = f.number("kCSA_S_Hz");
    seq.sys.kc_I = f.number("kc_I_Hz");
    seq.sys.kc_S = f.number("kc_S_Hz");
    f.done();
  }

  const Line& marks = next("marks line");
  toks = split(marks.text);
  if (toks.empty() || toks[0] != "marks") throw ParseError("expected 'marks' line", marks.number);
  for (std::size_t i = 1; i < toks.size(); ++i) seq.period_marks.push_back(to_size(toks[i], marks.number, "mark"));

  bool any_tag = false;
  std::vector<std::string> tags;
  while (true) {
    const Line& l = next("event or 'end'");
    toks = split(l.text);
    if (toks[0] == "end") {
      if (toks.size() != 1) throw ParseError("trailing fields after 'end'", l.number);
      if (k != lines.size()) throw ParseError("content after 'end'", lines[k].number);
      if (seq.events.size() != expected)
        throw ParseError(fmt::format("header announces {} events, found {}", expected, seq.events.size()),
                         l.number);
      break;
    }
    Fields f(toks, 1, l.number);
    const auto tag = f.maybe("tag");
    any_tag = any_tag || tag.has_value();
    tags.push_back(tag.value_or(""));
    if (toks[0] == "delay") {
      seq.events.push_back(Delay{f.number("duration_s")});
    } else if (toks[0] == "group") {
      const std::size_t n = to_size(f.text("members"), l.number, "members");
      if (n == 0) throw ParseError("group needs at least one member", l.number);
      Simultaneous g;
      for (std::size_t m = 0; m < n; ++m) {
        const Line& ml = next("group member");
        auto mt = split(ml.text);
        if (mt.size() < 2 || mt[0] != "member") throw ParseError("expected 'member' line", ml.number);
        Fields mf(mt, 2, ml.number);
        auto el = parse_element(mt[1], mf);
        if (!el) throw ParseError("unknown pulse type '" + mt[1] + "'", ml.number);
        mf.done();
        g.members.push_back(*el);
      }
      seq.events.push_back(std::move(g));
    } else {
      auto el = parse_element(toks[0], f);
      if (!el) throw ParseError("unknown event type '" + toks[0] + "'", l.number);
      seq.events.push_back(std::visit([](const auto& p) -> PulseEvent { return p; }, *el));
    }
    f.done();
  }
  if (any_tag) seq.tags = std::move(tags);
  try {
    seq.validate();
  } catch (const ParameterError& e) {
    throw ParseError(e.what(), lines.back().number);
  }
  return seq;
}

std::string format_table(const PulseSequence& seq) {
  seq.validate();
  std::string out = "# bbcrop-table v1\n";
  out += fmt::format("# label={} mode={} J_Hz={:.1f} ka_Hz={:.1f} kc_Hz={:.1f}\n",
                     seq.label.empty() ? "-" : seq.label, to_string(seq.mode), seq.sys.J, seq.sys.ka(),
                     seq.sys.kc());
  out += fmt::format("{:<8} {:>14} {:>12} {:>10} {:>8}\n", "type", "duration_us", "offset_kHz", "phase_deg",
                     "S_pulse");
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const auto& ev = seq.events[i];
    std::string type = seq.tags.empty() ? "" : seq.tags[i];
    TableRow r;
    if (const auto* d = std::get_if<Delay>(&ev)) {
      if (type.empty()) type = "delay";
      r.duration = fmt::format("{:.1f}", d->duration * 1e6);
    } else if (const auto* g = std::get_if<Simultaneous>(&ev)) {
      if (type.empty()) type = "group";
      std::string s;
      for (const auto& m : g->members) {
        const Channel ch = std::visit([](const auto& p) { return p.channel; }, m);
        if (ch == Channel::I) {
          r = table_row(m);
        } else {
          s = s_column(m);
        }
      }
      r.s = s.empty() ? "-" : s;
    } else {
      const PulseElement el = std::visit(
          [](const auto& p) -> PulseElement {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Delay> || std::is_same_v<T, Simultaneous>)
              return HardPulse{};
            else
              return p;
          },
          ev);
      const Channel ch = std::visit([](const auto& p) { return p.channel; }, el);
      if (type.empty()) type = "pulse";
      if (ch == Channel::I) {
        r = table_row(el);
      } else {
        r.s = s_column(el);
        r.duration = fmt::format("{:.1f}", event_duration(ev) * 1e6);
      }
    }
    out += fmt::format("{:<8} {:>14} {:>12} {:>10} {:>8}\n", type, r.duration, r.offset, r.phase, r.s);
  }
  return out;
}

std::string format_profile(const OffsetProfile& p) {
  if (p.offsets.size() != p.efficiency.size()) throw ParameterError("profile arrays differ in length");
  std::string out = "# bbcrop-profile v1\noffset_Hz\tefficiency\n";
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    out += fmt::format("{}\t{}\n", num(p.offsets[i]), num(p.efficiency[i]));
  return out;
}

OffsetProfile parse_profile(const std::string& text) {
  const auto lines = lines_of(text, false);
  expect_header(lines, "# bbcrop-profile v1");
  if (lines.size() < 2) throw ParseError("missing column header", 2);
  expect_columns(lines[1], {"offset_Hz", "efficiency"});
  OffsetProfile p;
  for (std::size_t k = 2; k < lines.size(); ++k) {
    const auto v = row(lines[k], 2);
    if (!p.offsets.empty() && !(v[0] > p.offsets.back()))
      throw ParseError("offsets must be strictly increasing", lines[k].number);
    p.offsets.push_back(v[0]);
    p.efficiency.push_back(v[1]);
  }
  return p;
}

std::string format_traces(const OffsetProfile& p) {
  if (p.traces.size() != p.offsets.size()) throw ParameterError("profile has no traces for every offset");
  std::string out = "# bbcrop-traces v1\noffset_Hz\tt_s\tr2\tgamma_rad\n";
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    for (const auto& tp : p.traces[i])
      out += fmt::format("{}\t{}\t{}\t{}\n", num(p.offsets[i]), num(tp.t), num(tp.r2), num(tp.gamma));
  return out;
}

std::string profile_svg(const OffsetProfile& p, double eta, double J, const std::string& title) {
  if (p.offsets.size() < 2 || p.offsets.size() != p.efficiency.size())
    throw ParameterError("profile plot needs at least two points");
  if (!(eta > 0) || !(J > 0)) throw ParameterError("plot scales must be > 0");
  const double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  const double x0 = p.offsets.front() / J, x1 = p.offsets.back() / J;
  double y0 = 0, y1 = 1.1;
  for (double e : p.efficiency) {
    y0 = std::min(y0, e / eta);
    y1 = std::max(y1, e / eta);
  }
  auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H);
  out += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", W, H);
  out += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2,
                     title);
  for (double g : {0.0, 0.5, 1.0}) {
    out += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ccc\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.1f}</text>\n",
        X(x0), Y(g), X(x1), Y(g), L - 6, Y(g) + 4, g);
  }
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", X(x0),
                     H - B, X(x1), H - B);
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", L, T,
                     L, H - B);
  for (double x : {x0, 0.5 * (x0 + x1), x1})
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.1f}</text>\n", X(x), H - B + 16,
                       x);
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">offset / J</text>\n", W / 2,
                     H - 12);
  out += fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">"
      "efficiency / eta</text>\n",
      H / 2, H / 2);
  out += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", X(p.offsets[i] / J), Y(p.efficiency[i] / eta));
  out += "\"/>\n";
  for (std::size_t i = 0; i < p.offsets.size(); ++i)
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"#1f5fa8\"/>\n", X(p.offsets[i] / J),
                       Y(p.efficiency[i] / eta));
  out += "</svg>\n";
  return out;
}

std::string format_baseline(const BaselineCurve& c, const std::string& name) {
  check_word(name, "name");
  std::string out = fmt::format("# bbcrop-baseline v1\n# name={} best={} best_time_s={}\ntime_s\tefficiency\n",
                                name, num(c.best), num(c.best_time));
  for (std::size_t i = 0; i < c.times.size(); ++i)
    out += fmt::format("{}\t{}\n", num(c.times[i]), num(c.efficiency[i]));
  return out;
}

std::string format_policy(const DpPolicy& policy, std::size_t k) {
  if (k > policy.stages()) throw ParameterError(fmt::format("stage {} beyond policy", k));
  std::string out = fmt::format("# bbcrop-policy v1\n# stage={} grid={}\nr1\tr2\tV\tbeta1_rad\tbeta2_rad\ttau_s\n",
                                k, policy.grid());
  for (std::size_t i = 0; i < policy.grid(); ++i)
    for (std::size_t j = 0; j < policy.grid(); ++j) {
      DpControl c;
      if (k > 0) c = policy.control_at(k, i, j);
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", num(policy.node(i)), num(policy.node(j)),
                         num(policy.value_at(k, i, j)), num(c.beta1), num(c.beta2), num(c.tau));
    }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError(fmt::format("cannot read {}", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw ParameterError(fmt::format("write to {} failed", path.string()));
}

}  // namespace bbcrop
