#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "pwg/exec.hpp"
#include "pwg/mc.hpp"

// Post-processing of click records: windowed coincidence counting with
// cross-trial normalization, delay scans, window-width sweeps, time-bin
// correlation matrices, and continuous-wave delay histograms. All functions
// are pure: the same records always produce the same results, and the
// parallel paths are bit-identical to the serial ones.
namespace pwg::analysis {

// A pair of equally wide counting windows inside the trial, in nanoseconds
// from the trial start. Windows are half-open: [center - width/2,
// center + width/2).
struct WindowSpec {
  double center_write_ns = 0;
  double center_read_ns = 0;
  double width_ns = 0;
};

// One correlation measurement. n_same is the same-trial coincidence count,
// n_diff_mean the average cross-trial coincidence count (the uncorrelated
// baseline), g2 their ratio with a central 68% interval [g2 - err_lo,
// g2 + err_hi]. When the baseline is empty the value is undefined:
// `defined` is false and g2/err fields are zero, never infinity.
struct CorrelationResult {
  double delay_ns = 0;
  double n_same = 0;
  double n_diff_mean = 0;
  double g2 = 0;
  double err_lo = 0;
  double err_hi = 0;
  bool defined = false;
};

// Raw output of one window placement.
struct Coincidences {
  std::uint64_t n_same = 0;
  double n_diff_mean = 0;
  std::uint64_t n_trials = 0;  // trials spanned: last trial index + 1
};

// Count (write-window click, read-window click) pairs. Same-trial pairs give
// n_same; the baseline n_diff_mean averages the pair count over trial
// offsets 1..dn_max (cyclic over the spanned trial range, so every offset
// sees the full statistics). Clicks from all detectors participate.
// Records must be sorted; overlapping windows throw std::invalid_argument
// ("ambiguous click assignment").
Coincidences count_coincidences(const std::vector<mc::ClickRecord>& records,
                                const WindowSpec& window, int dn_max = 100);

// Central 68% interval on g2 = n_same / n_diff_mean, treating n_same as a
// binomial count over n_trials (Clopper-Pearson, exact at small counts).
// Returns (err_lo, err_hi) such that the interval is [g2 - err_lo,
// g2 + err_hi]; asymmetric by construction, err_lo = 0 when n_same = 0.
std::pair<double, double> binomial_error(std::uint64_t n_same,
                                         std::uint64_t n_trials,
                                         double n_diff_mean);

// Assemble a CorrelationResult (ratio, errors, defined flag) from counts.
CorrelationResult make_result(double delay_ns, std::uint64_t n_same,
                              std::uint64_t n_trials, double n_diff_mean);

// Delay scan: the write window is fixed at the write-pulse anchor and an
// equally wide read window is scanned across the delay grid; the result's
// delay coordinate is read-center minus write-center. The anchor is located
// from the click-time histogram (1 ns bins) as the position maximizing
// H(a) + H(a + fixed_tau), which locks onto the write pulse of a pulsed
// stream even when the read peak is taller; fixed_tau is the nominal
// write-to-read separation of the sequence. Delays whose baseline is empty
// come back flagged undefined. Trials are inferred from the last record.
std::vector<CorrelationResult> g2om_scan(
    const std::vector<mc::ClickRecord>& records, double window_width_ns,
    const std::vector<double>& delay_grid_ns, double fixed_tau_ns,
    Exec exec = Exec::parallel);

// Peak correlation (maximum defined g2 over the delay grid) per window
// width. Widths below the 1 ps timestamp resolution throw.
std::vector<std::pair<double, CorrelationResult>> window_sweep(
    const std::vector<mc::ClickRecord>& records,
    const std::vector<double>& widths_ns,
    const std::vector<double>& delay_grid_ns, double fixed_tau_ns,
    Exec exec = Exec::parallel);

// Four non-overlapping counting bins of one double-pulse sequence and the
// fine-scan parameters used inside them.
struct TimeBins {
  double write_early_ns = 0;  // bin centers
  double write_late_ns = 0;
  double read_early_ns = 0;
  double read_late_ns = 0;
  double bin_width_ns = 40;
  double scan_width_ns = 6;
  double scan_step_ns = 1;
};

// 2x2 write/read correlation matrix; first index write bin, second read bin,
// 0 = early, 1 = late.
struct TimeBinMatrix {
  CorrelationResult cell[2][2];
};

// Per (write bin, read bin) combination: anchor the write window inside the
// write bin, scan the read window across the read bin in scan_step_ns steps,
// and keep the maximum defined g2. Combinations without clicks in either bin
// come back undefined. Overlapping bins throw std::invalid_argument.
TimeBinMatrix timebin_matrix(const std::vector<mc::ClickRecord>& records,
                             const TimeBins& bins, int dn_max = 100);

// One delay bin of a continuous-wave correlation histogram; tau_ns is the
// bin's lower edge.
struct TauBin {
  double tau_ns = 0;
  double g2 = 0;
  double err = 0;
};

// Cross-detector (HBT) delay histogram of a continuous-wave run: pair counts
// at delay tau within a segment, normalized by pairs formed between
// neighboring segments (which share no dynamics). Throws std::runtime_error
// when the baseline has an empty bin ("insufficient baseline statistics").
std::vector<TauBin> g2_tau_histogram(const std::vector<mc::ClickRecord>& records,
                                     double bin_width_ns, double max_tau_ns,
                                     Exec exec = Exec::parallel);

}  // namespace pwg::analysis
