#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pwg/mc.hpp"

// Click-record persistence in two equivalent formats.
//
// Text (CSV): '#'-prefixed "key=value" metadata lines, a fixed header line
// "trial,detector,t_ps", then one comma-separated record per line.
//
// Binary (PHCL, little-endian): magic "PHCL", u16 version (1), u64
// period_ps, u64 seed, u32 n_detectors, u32 record_count, then packed
// 13-byte records (u32 trial, u8 detector, u64 t_ps).
//
// Both formats carry the same metadata and require records sorted by
// (trial, t_ps, detector) with non-negative timestamps; readers reject
// unsorted or truncated data instead of repairing it.
namespace pwg::clickfile {

struct Meta {
  std::uint64_t period_ps = 0;  // repetition period / segment duration
  std::uint64_t seed = 0;       // RNG seed the data was generated with
  std::uint32_t n_detectors = 2;
};

inline bool operator==(const Meta& a, const Meta& b) {
  return a.period_ps == b.period_ps && a.seed == b.seed &&
         a.n_detectors == b.n_detectors;
}

using Contents = std::pair<Meta, std::vector<mc::ClickRecord>>;

void write_csv(const std::string& path, const Meta& meta,
               const std::vector<mc::ClickRecord>& records);
void write_phcl(const std::string& path, const Meta& meta,
                const std::vector<mc::ClickRecord>& records);
// Dispatch on the ".phcl" extension (binary), CSV otherwise.
void write(const std::string& path, const Meta& meta,
           const std::vector<mc::ClickRecord>& records);

Contents read_csv(const std::string& path);
Contents read_phcl(const std::string& path);
// Dispatch by sniffing the magic bytes, so either format loads from any
// extension.
Contents read(const std::string& path);

}  // namespace pwg::clickfile
