#include "pwg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>

namespace pwg::io {

namespace {

void spill(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

}  // namespace

namespace {

bool round_trips(const char* text, double v) {
  double back = 0;
  return std::sscanf(text, "%lf", &back) == 1 && back == v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (round_trips(buf, v)) {
      best = buf;
      break;
    }
  }
  // Prefer a plain decimal rendering over an exponent when it is no longer.
  if (best.find('e') != std::string::npos && std::abs(v) < 1e17) {
    for (int digits = 0; digits <= 17; ++digits) {
      std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
      if (round_trips(buf, v)) {
        if (std::string_view(buf).size() <= best.size()) best = buf;
        break;
      }
    }
  }
  return best;
}

void write_correlation_csv(
    const std::string& path,
    const std::vector<analysis::CorrelationResult>& rows) {
  std::string out = "delay_ns,g2,err_lo,err_hi,n_same,n_diff_mean\n";
  for (const auto& r : rows) {
    out += format_double(r.delay_ns);
    out += ',';
    if (r.defined) {
      out += format_double(r.g2);
      out += ',';
      out += format_double(r.err_lo);
      out += ',';
      out += format_double(r.err_hi);
    } else {
      out += ",,";
    }
    out += ',';
    out += format_double(r.n_same);
    out += ',';
    out += format_double(r.n_diff_mean);
    out += '\n';
  }
  spill(path, out);
}

void write_histogram_csv(const std::string& path,
                         const std::vector<analysis::TauBin>& bins) {
  std::string out = "tau_ns,g2,err\n";
  for (const auto& b : bins) {
    out += format_double(b.tau_ns);
    out += ',';
    out += format_double(b.g2);
    out += ',';
    out += format_double(b.err);
    out += '\n';
  }
  spill(path, out);
}

nlohmann::json correlation_to_json(const analysis::CorrelationResult& r) {
  nlohmann::json j;
  j["delay_ns"] = r.delay_ns;
  j["n_same"] = r.n_same;
  j["n_diff_mean"] = r.n_diff_mean;
  j["defined"] = r.defined;
  if (r.defined) {
    j["g2"] = r.g2;
    j["err_lo"] = r.err_lo;
    j["err_hi"] = r.err_hi;
  } else {
    j["g2"] = nullptr;
    j["err_lo"] = nullptr;
    j["err_hi"] = nullptr;
  }
  return j;
}

nlohmann::json correlation_to_json(
    const std::vector<analysis::CorrelationResult>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(correlation_to_json(r));
  return arr;
}

nlohmann::json timebin_to_json(const analysis::TimeBinMatrix& m) {
  static const char* const names[2] = {"early", "late"};
  nlohmann::json j;
  for (int w = 0; w < 2; ++w)
    for (int r = 0; r < 2; ++r)
      j[std::string(names[w]) + "_" + names[r]] =
          correlation_to_json(m.cell[w][r]);
  return j;
}

nlohmann::json histogram_to_json(const std::vector<analysis::TauBin>& bins) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : bins) {
    nlohmann::json j;
    j["tau_ns"] = b.tau_ns;
    j["g2"] = b.g2;
    j["err"] = b.err;
    arr.push_back(j);
  }
  return arr;
}

void write_json(const std::string& path, const nlohmann::json& value) {
  spill(path, value.dump(2) + "\n");
}

}  // namespace pwg::io
