#include "pwg/clickfile.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string_view>

namespace pwg::clickfile {

namespace {

constexpr char kMagic[4] = {'P', 'H', 'C', 'L'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 2 + 8 + 8 + 4 + 4;
constexpr std::size_t kRecordSize = 4 + 1 + 8;
constexpr std::string_view kCsvHeader = "trial,detector,t_ps";

void validate_records(const std::vector<mc::ClickRecord>& records,
                      std::uint32_t n_detectors) {
  const mc::ClickRecord* prev = nullptr;
  for (const auto& r : records) {
    if (r.t_ps < 0)
      throw std::invalid_argument("click timestamps must be non-negative");
    if (r.detector >= n_detectors)
      throw std::invalid_argument("detector index outside the recorded chain");
    if (prev != nullptr && r < *prev)
      throw std::invalid_argument("click records are not sorted");
    prev = &r;
  }
}

void append_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_le(const char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i]))
         << (8 * i);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open click file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

void spill(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write click file: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write click file: " + path);
}

std::uint64_t parse_u64(std::string_view text, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::runtime_error(std::string("malformed ") + what +
                             " in click file");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

void write_csv(const std::string& path, const Meta& meta,
               const std::vector<mc::ClickRecord>& records) {
  validate_records(records, meta.n_detectors);
  std::string out;
  out.reserve(64 + records.size() * 24);
  out += "# period_ps=" + std::to_string(meta.period_ps) + "\n";
  out += "# seed=" + std::to_string(meta.seed) + "\n";
  out += "# n_detectors=" + std::to_string(meta.n_detectors) + "\n";
  out += kCsvHeader;
  out += "\n";
  for (const auto& r : records) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(static_cast<unsigned>(r.detector));
    out += ',';
    out += std::to_string(r.t_ps);
    out += '\n';
  }
  spill(path, out);
}

void write_phcl(const std::string& path, const Meta& meta,
                const std::vector<mc::ClickRecord>& records) {
  validate_records(records, meta.n_detectors);
  if (records.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("record count exceeds the format range");
  std::string out;
  out.reserve(kHeaderSize + records.size() * kRecordSize);
  out.append(kMagic, sizeof(kMagic));
  append_le(out, kVersion, 2);
  append_le(out, meta.period_ps, 8);
  append_le(out, meta.seed, 8);
  append_le(out, meta.n_detectors, 4);
  append_le(out, static_cast<std::uint32_t>(records.size()), 4);
  for (const auto& r : records) {
    append_le(out, r.trial, 4);
    append_le(out, r.detector, 1);
    append_le(out, static_cast<std::uint64_t>(r.t_ps), 8);
  }
  spill(path, out);
}

void write(const std::string& path, const Meta& meta,
           const std::vector<mc::ClickRecord>& records) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".phcl") == 0)
    write_phcl(path, meta, records);
  else
    write_csv(path, meta, records);
}

Contents read_csv(const std::string& path) {
  const std::string data = slurp(path);
  Meta meta;
  std::vector<mc::ClickRecord> records;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    const std::string_view line = trim(
        std::string_view(data).substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      const std::string_view key = trim(body.substr(0, eq));
      const std::string_view value = trim(body.substr(eq + 1));
      if (key == "period_ps")
        meta.period_ps = parse_u64(value, "period");
      else if (key == "seed")
        meta.seed = parse_u64(value, "seed");
      else if (key == "n_detectors")
        meta.n_detectors =
            static_cast<std::uint32_t>(parse_u64(value, "detector count"));
      continue;  // unknown metadata keys are ignored
    }
    if (!header_seen) {
      if (line != kCsvHeader)
        throw std::runtime_error("not a click file: " + path);
      header_seen = true;
      continue;
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 =
        c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos ||
        line.find(',', c2 + 1) != std::string_view::npos)
      throw std::runtime_error("truncated or malformed click row in " + path);
    mc::ClickRecord r;
    r.trial = static_cast<std::uint32_t>(
        parse_u64(trim(line.substr(0, c1)), "trial index"));
    const std::uint64_t det =
        parse_u64(trim(line.substr(c1 + 1, c2 - c1 - 1)), "detector index");
    if (det > 255)
      throw std::runtime_error("malformed detector index in click file");
    r.detector = static_cast<std::uint8_t>(det);
    r.t_ps = static_cast<std::int64_t>(
        parse_u64(trim(line.substr(c2 + 1)), "timestamp"));
    records.push_back(r);
  }
  if (!header_seen) throw std::runtime_error("not a click file: " + path);
  try {
    validate_records(records, meta.n_detectors);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(e.what()) + " in " + path);
  }
  return {meta, std::move(records)};
}

Contents read_phcl(const std::string& path) {
  const std::string data = slurp(path);
  if (data.size() < kHeaderSize ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a click file: " + path);
  const std::uint16_t version =
      static_cast<std::uint16_t>(read_le(data.data() + 4, 2));
  if (version != kVersion)
    throw std::runtime_error("unsupported click file version in " + path);
  Meta meta;
  meta.period_ps = read_le(data.data() + 6, 8);
  meta.seed = read_le(data.data() + 14, 8);
  meta.n_detectors =
      static_cast<std::uint32_t>(read_le(data.data() + 22, 4));
  const std::uint64_t count = read_le(data.data() + 26, 4);
  if (data.size() != kHeaderSize + count * kRecordSize)
    throw std::runtime_error("truncated click file: " + path);
  std::vector<mc::ClickRecord> records;
  records.reserve(count);
  const char* p = data.data() + kHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += kRecordSize) {
    mc::ClickRecord r;
    r.trial = static_cast<std::uint32_t>(read_le(p, 4));
    r.detector = static_cast<std::uint8_t>(read_le(p + 4, 1));
    r.t_ps = static_cast<std::int64_t>(read_le(p + 5, 8));
    records.push_back(r);
  }
  try {
    validate_records(records, meta.n_detectors);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string(e.what()) + " in " + path);
  }
  return {meta, std::move(records)};
}

Contents read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open click file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary =
      in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0;
  in.close();
  return binary ? read_phcl(path) : read_csv(path);
}

}  // namespace pwg::clickfile
