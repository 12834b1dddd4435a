#include "pwg/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <vector>

#include "pwg/calibration.hpp"
#include "pwg/io.hpp"

namespace pwg::config {

namespace {

enum class ValueKind { number, string, boolean };

struct Entry {
  int line = 0;
  std::string table;
  std::string key;
  ValueKind kind = ValueKind::number;
  double number = 0;
  bool boolean = false;
  std::string text;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                              what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Drop a trailing comment, respecting quoted strings.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> entries;
  std::string table;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    const std::string_view line =
        trim(strip_comment(std::string_view(text).substr(pos, eol - pos)));
    pos = eol + 1;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        fail(line_no, "malformed table header '" + std::string(line) + "'");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name != "device" && name != "sequence" && name != "run")
        fail(line_no, "unknown table '[" + name + "]'");
      table = name;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(line_no, "expected 'key = value', got '" + std::string(line) + "'");
    Entry e;
    e.line = line_no;
    e.key = std::string(trim(line.substr(0, eq)));
    if (!identifier(e.key))
      fail(line_no, "malformed key '" + e.key + "'");
    if (table.empty())
      fail(line_no, "key '" + e.key + "' appears before any table header");
    e.table = table;
    if (!seen.insert(table + "." + e.key).second)
      fail(line_no, "duplicate key '" + e.key + "' in [" + table + "]");
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) fail(line_no, "missing value for key '" + e.key + "'");
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        fail(line_no, "unterminated string for key '" + e.key + "'");
      e.kind = ValueKind::string;
      e.text = std::string(value.substr(1, value.size() - 2));
    } else if (value == "true" || value == "false") {
      e.kind = ValueKind::boolean;
      e.boolean = value == "true";
    } else {
      const auto [ptr, ec] = std::from_chars(
          value.data(), value.data() + value.size(), e.number);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        fail(line_no, "cannot parse value '" + std::string(value) +
                          "' for key '" + e.key + "'");
      e.kind = ValueKind::number;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

double as_number(const Entry& e) {
  if (e.kind != ValueKind::number)
    fail(e.line, "key '" + e.key + "' expects a number");
  return e.number;
}

bool as_bool(const Entry& e) {
  if (e.kind != ValueKind::boolean)
    fail(e.line, "key '" + e.key + "' expects true or false");
  return e.boolean;
}

std::uint64_t as_count(const Entry& e) {
  const double v = as_number(e);
  if (!(v >= 0) || v != std::floor(v) || v > 1.8e19)
    fail(e.line, "key '" + e.key + "' expects a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

// Bare names of dimensioned keys, mapped to the suffixed form and its unit.
struct Hint {
  const char* table;
  const char* bare;
  const char* suffixed;
  const char* unit;
};
constexpr Hint kHints[] = {
    {"sequence", "pulse_fwhm", "pulse_fwhm_ns", "nanoseconds"},
    {"sequence", "tau", "tau_ns", "nanoseconds"},
    {"sequence", "delta_tau", "delta_tau_ns", "nanoseconds"},
    {"sequence", "repetition_period", "repetition_period_ns", "nanoseconds"},
    {"sequence", "write_center", "write_center_ns", "nanoseconds"},
    {"device", "dead_time", "dead_time_ns", "nanoseconds"},
    {"device", "t1", "t1_us", "microseconds"},
};

[[noreturn]] void unknown_key(const Entry& e) {
  for (const Hint& h : kHints)
    if (e.table == h.table && e.key == h.bare)
      fail(e.line, "unknown key '" + e.key + "' in [" + e.table + "]: use '" +
                       h.suffixed + "' (value in " + h.unit + ")");
  fail(e.line, "unknown key '" + e.key + "' in [" + e.table + "]");
}

void apply(const Entry& e, RunConfig& cfg) {
  PulseSequence& seq = cfg.settings.seq;
  DetectionChain& chain = cfg.device.chain;
  if (e.table == "sequence") {
    if (e.key == "scheme") return;  // consumed by the pre-pass
    if (e.key == "p_write") seq.p_write = as_number(e);
    else if (e.key == "p_read") seq.p_read = as_number(e);
    else if (e.key == "pulse_fwhm_ns") seq.pulse_fwhm = as_number(e) * 1e-9;
    else if (e.key == "tau_ns") seq.tau = as_number(e) * 1e-9;
    else if (e.key == "delta_tau_ns") seq.delta_tau = as_number(e) * 1e-9;
    else if (e.key == "repetition_period_ns")
      seq.repetition_period = as_number(e) * 1e-9;
    else if (e.key == "write_center_ns")
      seq.write_center = as_number(e) * 1e-9;
    else unknown_key(e);
  } else if (e.table == "device") {
    if (e.key == "eta_det") chain.eta_det_override = as_number(e);
    else if (e.key == "dark_rate_per_trial")
      chain.dark_rate_per_trial = as_number(e);
    else if (e.key == "dead_time_ns") chain.dead_time = as_number(e) * 1e-9;
    else if (e.key == "n_detectors") {
      const std::uint64_t n = as_count(e);
      if (n < 1 || n > 255)
        fail(e.line, "key 'n_detectors' expects a value between 1 and 255");
      chain.n_detectors = static_cast<int>(n);
    } else if (e.key == "t1_us") cfg.device.heating.t1 = as_number(e) * 1e-6;
    else unknown_key(e);
  } else {  // run
    if (e.key == "n_trials") cfg.settings.n_trials = as_count(e);
    else if (e.key == "seed") cfg.settings.seed = as_count(e);
    else if (e.key == "n_thermal") {
      cfg.settings.n_thermal = as_number(e);
      if (cfg.settings.n_thermal < 0)
        fail(e.line, "key 'n_thermal' expects a non-negative number");
    } else if (e.key == "classical") cfg.settings.classical = as_bool(e);
    else if (e.key == "darks_enabled")
      cfg.settings.darks_enabled = as_bool(e);
    else if (e.key == "round_trip_efficiency") {
      cfg.settings.round_trip_efficiency = as_number(e);
      if (cfg.settings.round_trip_efficiency < 0 ||
          cfg.settings.round_trip_efficiency > 1)
        fail(e.line,
             "key 'round_trip_efficiency' expects a value in [0, 1]");
    } else unknown_key(e);
  }
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.device = calib::reference_device();
  cfg.settings.seq =
      calib::reference_sequence(PulseScheme::single_write_read);
  cfg.settings.n_trials = 1000000;
  return cfg;
}

std::string default_config_text() {
  const RunConfig cfg = default_config();
  const PulseSequence& seq = cfg.settings.seq;
  std::string out;
  out += "# Pulsed-run configuration. Omitted keys keep reference values.\n";
  out += "[sequence]\n";
  out += "scheme = \"single\"\n";
  out += "p_write = " + fmt(seq.p_write) + "\n";
  out += "p_read = " + fmt(seq.p_read) + "\n";
  out += "pulse_fwhm_ns = " + fmt(seq.pulse_fwhm * 1e9) + "\n";
  out += "tau_ns = " + fmt(seq.tau * 1e9) + "\n";
  out += "delta_tau_ns = " + fmt(seq.delta_tau * 1e9) + "\n";
  out += "repetition_period_ns = " + fmt(seq.repetition_period * 1e9) + "\n";
  out += "write_center_ns = " + fmt(seq.write_center * 1e9) + "\n";
  out += "\n[device]\n";
  out += "dark_rate_per_trial = " +
         fmt(cfg.device.chain.dark_rate_per_trial) + "\n";
  out += "dead_time_ns = " + fmt(cfg.device.chain.dead_time * 1e9) + "\n";
  out += "n_detectors = " + std::to_string(cfg.device.chain.n_detectors) +
         "\n";
  out += "t1_us = " + fmt(cfg.device.heating.t1 * 1e6) + "\n";
  out += "\n[run]\n";
  out += "n_trials = " + std::to_string(cfg.settings.n_trials) + "\n";
  out += "seed = " + std::to_string(cfg.settings.seed) + "\n";
  out += "n_thermal = " + fmt(cfg.settings.n_thermal) + "\n";
  out += "classical = false\n";
  out += "darks_enabled = true\n";
  out += "round_trip_efficiency = " +
         fmt(cfg.settings.round_trip_efficiency) + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  const std::vector<Entry> entries = tokenize(text);
  RunConfig cfg = default_config();
  for (const Entry& e : entries) {
    if (e.table == "sequence" && e.key == "scheme") {
      if (e.kind != ValueKind::string)
        fail(e.line, "key 'scheme' expects a string");
      if (e.text == "single")
        cfg.settings.seq.scheme = PulseScheme::single_write_read;
      else if (e.text == "double")
        cfg.settings.seq.scheme = PulseScheme::double_write_read;
      else
        fail(e.line, "key 'scheme' expects \"single\" or \"double\"");
    }
  }
  for (const Entry& e : entries) apply(e, cfg);
  cfg.device.validate();
  cfg.settings.seq.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pwg::config
