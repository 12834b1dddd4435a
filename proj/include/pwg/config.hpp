#pragma once
#include <cstdint>
#include <string>
#include <string_view>

#include "pwg/device.hpp"
#include "pwg/mc.hpp"

// Run configuration: a small text format mapping onto the calibrated
// reference device plus a pulsed-run description. Files use a TOML-like
// subset — `[table]` headers, `key = value` pairs, `#` comments, double-quoted
// strings, booleans, and plain numbers — and every key must come from the
// fixed list below; unknown keys are an error rather than silently ignored.
// Dimensioned keys carry their unit in the name (`tau_ns`, `t1_us`), so a
// bare `tau = 170` fails with a message pointing at the suffixed key.
//
// Tables and keys (all optional; omitted keys keep reference values):
//   [sequence] scheme ("single"|"double"), p_write, p_read, pulse_fwhm_ns,
//              tau_ns, delta_tau_ns, repetition_period_ns, write_center_ns
//   [device]   eta_det, dark_rate_per_trial, dead_time_ns, n_detectors, t1_us
//   [run]      n_trials, seed, n_thermal, classical, darks_enabled,
//              round_trip_efficiency
namespace pwg::config {

struct RunConfig {
  Device device;
  mc::PulsedSettings settings;
};

// Reference device and single-scheme sequence with a million-trial run.
RunConfig default_config();

// Text form whose parse reproduces default_config() exactly.
std::string default_config_text();

// Parse configuration text. Throws std::invalid_argument with a line-numbered
// message on syntax errors, unknown tables/keys, type mismatches, duplicate
// keys, or values the device model rejects.
RunConfig parse_config(const std::string& text);

// Read and parse a file. Throws std::runtime_error when the file cannot be
// opened, otherwise behaves like parse_config.
RunConfig load_config(const std::string& path);

// 64-bit FNV-1a content hash, used to tag outputs with the configuration
// that produced them.
std::uint64_t fnv1a(std::string_view text);

}  // namespace pwg::config
