#pragma once
#include <string>
#include <vector>

#include <json.hpp>

#include "pwg/analysis.hpp"

// Result serialization: CSV for spreadsheet-friendly tables and JSON for
// structured downstream tooling. Undefined correlation values (empty
// baseline) appear as empty CSV fields and explicit JSON nulls — they are
// never written as zeros or infinities.
namespace pwg::io {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Header "delay_ns,g2,err_lo,err_hi,n_same,n_diff_mean", one row per entry.
void write_correlation_csv(
    const std::string& path,
    const std::vector<analysis::CorrelationResult>& rows);

// Header "tau_ns,g2,err", one row per delay bin.
void write_histogram_csv(const std::string& path,
                         const std::vector<analysis::TauBin>& bins);

// {"delay_ns", "n_same", "n_diff_mean", "g2", "err_lo", "err_hi",
//  "defined"}; the last three value fields are null when undefined.
nlohmann::json correlation_to_json(const analysis::CorrelationResult& r);
nlohmann::json correlation_to_json(
    const std::vector<analysis::CorrelationResult>& rows);

// {"early_early": {...}, "early_late": {...}, "late_early": {...},
//  "late_late": {...}} — first word write bin, second word read bin.
nlohmann::json timebin_to_json(const analysis::TimeBinMatrix& m);

// Array of {"tau_ns", "g2", "err"}.
nlohmann::json histogram_to_json(const std::vector<analysis::TauBin>& bins);

// Pretty-print any JSON value to a file with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& value);

}  // namespace pwg::io
