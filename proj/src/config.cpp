#include "bbcrop/config.hpp"

#include "bbcrop/errors.hpp"
#include "bbcrop/io.hpp"
#include "bbcrop/sim.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

namespace bbcrop {

namespace {

using json = nlohmann::ordered_json;

std::size_t line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the first occurrence of "key" after `from`; 1 if absent.
std::size_t line_of(const std::string& text, const std::string& key, std::size_t from = 0) {
  const auto pos = text.find('"' + key + '"', from);
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

class Reader {
 public:
  Reader(const std::string& text, const json& obj, std::string block)
      : text_(text), obj_(obj), block_(std::move(block)) {
    if (!obj_.is_object()) fail(block_, "expected an object");
    from_ = block_.empty() ? 0 : text_.find('"' + block_ + '"');
    if (from_ == std::string::npos) from_ = 0;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string name = block_.empty() || key == block_ ? key : block_ + "." + key;
    throw ParseError(fmt::format("{}: {}", name, what), line_of(text_, key, from_));
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : obj_.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) fail(k, "unknown key");
    }
  }

  void number(const char* key, double& out) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
  }

  void count(const char* key, std::size_t& out) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a non-negative integer");
    out = static_cast<std::size_t>(v.get<long long>());
  }

  void flag(const char* key, bool& out) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    out = v.get<bool>();
  }

  template <class T>
  void word(const char* key, T& out, T (*conv)(const std::string&)) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    try {
      out = conv(v.get<std::string>());
    } catch (const ParameterError& e) {
      fail(key, e.what());
    }
  }

  void text(const char* key, std::string& out) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    out = v.get<std::string>();
  }

 private:
  const std::string& text_;
  const json& obj_;
  std::string block_;
  std::size_t from_ = 0;
};

std::string identity(const std::string& s) { return s; }

}  // namespace

std::string to_string(SequenceMode m) { return m == SequenceMode::Ideal ? "ideal" : "finite"; }

std::string to_string(EchoPattern p) {
  switch (p) {
    case EchoPattern::R3R1R3: return "R3R1R3";
    case EchoPattern::R3R2R3: return "R3R2R3";
    case EchoPattern::R2R1R2: return "R2R1R2";
    case EchoPattern::Adaptive: return "adaptive";
  }
  return "R3R1R3";
}

std::string to_string(PhaseCycle c) { return c == PhaseCycle::XY4 ? "XY4" : "constant"; }

SequenceMode parse_mode(const std::string& s) {
  if (s == "ideal") return SequenceMode::Ideal;
  if (s == "finite") return SequenceMode::FiniteRf;
  throw ParameterError("mode must be ideal or finite, got '" + s + "'");
}

EchoPattern parse_pattern(const std::string& s) {
  for (auto p : {EchoPattern::R3R1R3, EchoPattern::R3R2R3, EchoPattern::R2R1R2, EchoPattern::Adaptive})
    if (to_string(p) == s) return p;
  throw ParameterError("pattern must be R3R1R3, R3R2R3, R2R1R2 or adaptive, got '" + s + "'");
}

PhaseCycle parse_cycle(const std::string& s) {
  if (s == "XY4") return PhaseCycle::XY4;
  if (s == "constant") return PhaseCycle::Constant;
  throw ParameterError("cycle must be XY4 or constant, got '" + s + "'");
}

void RunConfig::validate() const {
  sys.validate();
  if (!(sys.J > 0)) throw ParameterError("J must be > 0");
  const auto& d = design;
  if (d.periods < 2) throw ParameterError("periods must be >= 2");
  if (!(d.rf_I > 0) || !(d.rf_S > 0) || !std::isfinite(d.rf_I) || !std::isfinite(d.rf_S))
    throw ParameterError("rf amplitudes must be finite and > 0");
  if (d.dp_grid < 50) throw ParameterError("dp_grid must be >= 50");
  if (!(d.stop_fraction > 0 && d.stop_fraction < 1)) throw ParameterError("stop_fraction must lie in (0, 1)");
  const auto& s = sweep;
  if (!(s.offset_span >= 0) || !std::isfinite(s.offset_span)) throw ParameterError("offset_span must be >= 0");
  if (s.offset_points < 2) throw ParameterError("offset_points must be >= 2");
  if (!std::isfinite(s.offset_S)) throw ParameterError("offset_S must be finite");
  if (!(s.rf_fwhm >= 0 && s.rf_fwhm < 1)) throw ParameterError("rf_fwhm must lie in [0, 1)");
  if (s.rf_samples < 1) throw ParameterError("rf_samples must be >= 1");
  if (output_dir.empty()) throw ParameterError("output dir must not be empty");
}

std::vector<double> RunConfig::offsets() const {
  const double span = sweep.offset_span > 0 ? sweep.offset_span : 5 * sys.J;
  return offset_grid(span, sweep.offset_points);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("invalid JSON: {}", e.what()), line_at(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  Reader top(text, doc, "");
  top.allow({"schema", "spin_system", "design", "sweep", "output"});
  std::string schema;
  top.text("schema", schema);
  if (schema != kConfigSchema)
    throw ParseError(fmt::format("schema must be \"{}\"", kConfigSchema), line_of(text, "schema"));

  RunConfig cfg;
  if (doc.contains("spin_system")) {
    Reader r(text, doc["spin_system"], "spin_system");
    r.allow({"J_Hz", "kDD_Hz", "kCSA_I_Hz", "kCSA_S_Hz", "kc_I_Hz", "kc_S_Hz"});
    SpinSystem s;
    r.number("J_Hz", s.J);
    r.number("kDD_Hz", s.kDD);
    r.number("kCSA_I_Hz", s.kCSA_I);
    r.number("kCSA_S_Hz", s.kCSA_S);
    r.number("kc_I_Hz", s.kc_I);
    r.number("kc_S_Hz", s.kc_S);
    cfg.sys = s;
  }
  if (doc.contains("design")) {
    Reader r(text, doc["design"], "design");
    r.allow({"mode", "periods", "rf_I_Hz", "rf_S_Hz", "pattern", "cycle", "refine", "dp_grid",
             "stop_fraction"});
    auto& d = cfg.design;
    r.word("mode", d.mode, &parse_mode);
    r.count("periods", d.periods);
    r.number("rf_I_Hz", d.rf_I);
    r.number("rf_S_Hz", d.rf_S);
    r.word("pattern", d.pattern, &parse_pattern);
    r.word("cycle", d.cycle, &parse_cycle);
    r.flag("refine", d.refine);
    r.count("dp_grid", d.dp_grid);
    r.number("stop_fraction", d.stop_fraction);
  }
  if (doc.contains("sweep")) {
    Reader r(text, doc["sweep"], "sweep");
    r.allow({"offset_span_Hz", "offset_points", "offset_S_Hz", "rf_fwhm", "rf_samples"});
    auto& s = cfg.sweep;
    r.number("offset_span_Hz", s.offset_span);
    r.count("offset_points", s.offset_points);
    r.number("offset_S_Hz", s.offset_S);
    r.number("rf_fwhm", s.rf_fwhm);
    r.count("rf_samples", s.rf_samples);
  }
  if (doc.contains("output")) {
    Reader r(text, doc["output"], "output");
    r.allow({"dir"});
    r.word("dir", cfg.output_dir, &identity);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

std::string format_config(const RunConfig& cfg) {
  json doc;
  doc["schema"] = kConfigSchema;
  doc["spin_system"] = {{"J_Hz", cfg.sys.J},           {"kDD_Hz", cfg.sys.kDD},
                        {"kCSA_I_Hz", cfg.sys.kCSA_I}, {"kCSA_S_Hz", cfg.sys.kCSA_S},
                        {"kc_I_Hz", cfg.sys.kc_I},     {"kc_S_Hz", cfg.sys.kc_S}};
  const auto& d = cfg.design;
  doc["design"] = {{"mode", to_string(d.mode)},   {"periods", d.periods},
                   {"rf_I_Hz", d.rf_I},           {"rf_S_Hz", d.rf_S},
                   {"pattern", to_string(d.pattern)}, {"cycle", to_string(d.cycle)},
                   {"refine", d.refine},          {"dp_grid", d.dp_grid},
                   {"stop_fraction", d.stop_fraction}};
  const auto& s = cfg.sweep;
  doc["sweep"] = {{"offset_span_Hz", s.offset_span}, {"offset_points", s.offset_points},
                  {"offset_S_Hz", s.offset_S},       {"rf_fwhm", s.rf_fwhm},
                  {"rf_samples", s.rf_samples}};
  doc["output"] = {{"dir", cfg.output_dir}};
  return doc.dump(2) + "\n";
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  std::filesystem::path dir = cfg.output_dir;
  if (const char* env = std::getenv("BBCROP_OUTPUT_DIR"); env && *env) dir = env;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ParameterError(fmt::format("output directory {} cannot be created", dir.string()));
  const auto probe = dir / ".bbcrop-write-test";
  {
    std::ofstream f(probe);
    if (!f) throw ParameterError(fmt::format("output directory {} is not writable", dir.string()));
  }
  std::filesystem::remove(probe, ec);
  return dir;
}

}  // namespace bbcrop
