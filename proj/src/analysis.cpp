#include "pwg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pwg::analysis {

namespace {

constexpr double kResolutionNs = 1e-3;  // 1 ps timestamp resolution

struct TrialCount {
  std::uint32_t trial = 0;
  std::uint32_t count = 0;
};

std::int64_t to_ps(double t_ns) { return std::llround(t_ns * 1e3); }

// Per-trial click counts inside [center - width/2, center + width/2),
// ascending in trial, trials without clicks omitted.
std::vector<TrialCount> window_counts(
    const std::vector<mc::ClickRecord>& records, double center_ns,
    double width_ns) {
  const std::int64_t lo = to_ps(center_ns - 0.5 * width_ns);
  const std::int64_t hi = to_ps(center_ns + 0.5 * width_ns);
  std::vector<TrialCount> counts;
  for (const auto& r : records) {
    if (r.t_ps < lo || r.t_ps >= hi) continue;
    if (!counts.empty() && counts.back().trial == r.trial)
      ++counts.back().count;
    else
      counts.push_back({r.trial, 1});
  }
  return counts;
}

std::uint32_t count_at(const std::vector<TrialCount>& counts,
                       std::uint32_t trial) {
  const auto it = std::lower_bound(
      counts.begin(), counts.end(), trial,
      [](const TrialCount& c, std::uint32_t t) { return c.trial < t; });
  return (it != counts.end() && it->trial == trial) ? it->count : 0;
}

// 1-ns click-time histogram; bin b covers [b, b+1) ns.
std::vector<std::uint64_t> click_histogram(
    const std::vector<mc::ClickRecord>& records) {
  std::int64_t max_bin = -1;
  for (const auto& r : records)
    if (r.t_ps >= 0) max_bin = std::max(max_bin, r.t_ps / 1000);
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(max_bin + 1), 0);
  for (const auto& r : records)
    if (r.t_ps >= 0) ++hist[static_cast<std::size_t>(r.t_ps / 1000)];
  return hist;
}

// Anchor of the write pulse: the 1-ns bin a maximizing H(a) + H(a + tau),
// searched over [lo_bin, hi_bin] (the whole histogram when lo > hi).
// Using both pulses makes the anchor land on the write peak even when the
// read peak is the taller one. Returns the bin center.
double locate_anchor(const std::vector<std::uint64_t>& hist, double tau_ns,
                     std::int64_t lo_bin = 0, std::int64_t hi_bin = -1) {
  if (hist.empty()) return 0.5;
  const std::int64_t n = static_cast<std::int64_t>(hist.size());
  if (hi_bin < lo_bin) {
    lo_bin = 0;
    hi_bin = n - 1;
  }
  lo_bin = std::max<std::int64_t>(0, lo_bin);
  hi_bin = std::min(n - 1, hi_bin);
  const std::int64_t shift = std::llround(tau_ns);
  std::int64_t best = lo_bin;
  std::uint64_t best_score = 0;
  bool first = true;
  for (std::int64_t a = lo_bin; a <= hi_bin; ++a) {
    const std::int64_t partner = a + shift;
    const std::uint64_t score =
        hist[static_cast<std::size_t>(a)] +
        (partner >= 0 && partner < n ? hist[static_cast<std::size_t>(partner)]
                                     : 0);
    if (first || score > best_score) {
      best = a;
      best_score = score;
      first = false;
    }
  }
  return static_cast<double>(best) + 0.5;
}

Coincidences coincidences_from_counts(const std::vector<TrialCount>& writes,
                                      const std::vector<TrialCount>& reads,
                                      std::uint64_t n_trials, int dn_max) {
  Coincidences out;
  out.n_trials = n_trials;
  // Same-trial products: merge-join on the sorted trial lists.
  std::size_t i = 0, j = 0;
  while (i < writes.size() && j < reads.size()) {
    if (writes[i].trial < reads[j].trial)
      ++i;
    else if (reads[j].trial < writes[i].trial)
      ++j;
    else {
      out.n_same += static_cast<std::uint64_t>(writes[i].count) *
                    reads[j].count;
      ++i;
      ++j;
    }
  }
  // Cross-trial baseline: cyclic offsets 1..min(dn_max, T-1) over the
  // spanned trial range, averaged.
  if (n_trials >= 2) {
    const std::uint64_t n_offsets =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(dn_max),
                                n_trials - 1);
    std::uint64_t total = 0;
    for (std::uint64_t d = 1; d <= n_offsets; ++d)
      for (const auto& w : writes) {
        const std::uint32_t partner = static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(w.trial) + d) % n_trials);
        total += static_cast<std::uint64_t>(w.count) *
                 count_at(reads, partner);
      }
    out.n_diff_mean =
        static_cast<double>(total) / static_cast<double>(n_offsets);
  }
  return out;
}

void validate_window(const WindowSpec& w) {
  if (!(w.width_ns > 0))
    throw std::invalid_argument("window width must be positive");
  if (w.width_ns < kResolutionNs)
    throw std::invalid_argument("window width below timestamp resolution");
  if (std::abs(w.center_read_ns - w.center_write_ns) < w.width_ns)
    throw std::invalid_argument("ambiguous click assignment");
}

}  // namespace

Coincidences count_coincidences(const std::vector<mc::ClickRecord>& records,
                                const WindowSpec& window, int dn_max) {
  validate_window(window);
  if (dn_max < 1)
    throw std::invalid_argument("baseline offset range must be positive");
  const std::uint64_t n_trials =
      records.empty() ? 0 : static_cast<std::uint64_t>(records.back().trial) + 1;
  const auto writes =
      window_counts(records, window.center_write_ns, window.width_ns);
  const auto reads =
      window_counts(records, window.center_read_ns, window.width_ns);
  return coincidences_from_counts(writes, reads, n_trials, dn_max);
}

std::pair<double, double> binomial_error(std::uint64_t n_same,
                                         std::uint64_t n_trials,
                                         double n_diff_mean) {
  if (n_trials == 0)
    throw std::invalid_argument("trial count must be positive");
  if (n_same > n_trials)
    throw std::invalid_argument("coincidence count exceeds trial count");
  if (!(n_diff_mean > 0))
    throw std::invalid_argument("baseline must be positive");
  const double n = static_cast<double>(n_same);
  const double N = static_cast<double>(n_trials);
  // Clopper-Pearson central 68% interval on the per-trial coincidence
  // probability, mapped through g2 = p * N / n_diff_mean.
  constexpr double alpha = 0.32;
  double p_lo = 0.0, p_hi = 1.0;
  if (n_same > 0) {
    const boost::math::beta_distribution<double> lower(n, N - n + 1.0);
    p_lo = boost::math::quantile(lower, alpha / 2.0);
  }
  if (n_same < n_trials) {
    const boost::math::beta_distribution<double> upper(n + 1.0, N - n);
    p_hi = boost::math::quantile(upper, 1.0 - alpha / 2.0);
  }
  const double err_lo = std::max(0.0, (n - N * p_lo) / n_diff_mean);
  const double err_hi = std::max(0.0, (N * p_hi - n) / n_diff_mean);
  return {err_lo, err_hi};
}

CorrelationResult make_result(double delay_ns, std::uint64_t n_same,
                              std::uint64_t n_trials, double n_diff_mean) {
  CorrelationResult res;
  res.delay_ns = delay_ns;
  res.n_same = static_cast<double>(n_same);
  res.n_diff_mean = n_diff_mean;
  if (!(n_diff_mean > 0) || n_trials == 0) return res;  // undefined
  res.g2 = static_cast<double>(n_same) / n_diff_mean;
  if (n_same <= n_trials) {
    const auto [lo, hi] = binomial_error(n_same, n_trials, n_diff_mean);
    res.err_lo = lo;
    res.err_hi = hi;
  } else {
    // Beyond the binomial regime (multi-click trials): symmetric Poisson
    // error.
    const double err = std::sqrt(static_cast<double>(n_same)) / n_diff_mean;
    res.err_lo = err;
    res.err_hi = err;
  }
  res.defined = true;
  return res;
}

std::vector<CorrelationResult> g2om_scan(
    const std::vector<mc::ClickRecord>& records, double window_width_ns,
    const std::vector<double>& delay_grid_ns, double fixed_tau_ns,
    Exec exec) {
  const auto hist = click_histogram(records);
  const double anchor = locate_anchor(hist, fixed_tau_ns);
  for (const double delay : delay_grid_ns)
    validate_window({anchor, anchor + delay, window_width_ns});

  const std::uint64_t n_trials =
      records.empty() ? 0 : static_cast<std::uint64_t>(records.back().trial) + 1;
  const auto writes = window_counts(records, anchor, window_width_ns);

  std::vector<CorrelationResult> results(delay_grid_ns.size());
  const std::int64_t n = static_cast<std::int64_t>(delay_grid_ns.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const double delay = delay_grid_ns[static_cast<std::size_t>(i)];
    const auto reads =
        window_counts(records, anchor + delay, window_width_ns);
    const auto c = coincidences_from_counts(writes, reads, n_trials, 100);
    results[static_cast<std::size_t>(i)] =
        make_result(delay, c.n_same, c.n_trials, c.n_diff_mean);
  }
  (void)exec;
  return results;
}

std::vector<std::pair<double, CorrelationResult>> window_sweep(
    const std::vector<mc::ClickRecord>& records,
    const std::vector<double>& widths_ns,
    const std::vector<double>& delay_grid_ns, double fixed_tau_ns,
    Exec exec) {
  std::vector<std::pair<double, CorrelationResult>> out;
  out.reserve(widths_ns.size());
  for (const double width : widths_ns) {
    const auto scan =
        g2om_scan(records, width, delay_grid_ns, fixed_tau_ns, exec);
    CorrelationResult best;
    for (const auto& r : scan)
      if (r.defined && (!best.defined || r.g2 > best.g2)) best = r;
    out.emplace_back(width, best);
  }
  return out;
}

TimeBinMatrix timebin_matrix(const std::vector<mc::ClickRecord>& records,
                             const TimeBins& bins, int dn_max) {
  if (!(bins.bin_width_ns > 0) || !(bins.scan_width_ns > 0) ||
      !(bins.scan_step_ns > 0))
    throw std::invalid_argument("bin geometry must be positive");
  if (bins.scan_width_ns > bins.bin_width_ns)
    throw std::invalid_argument("scan window wider than the bin");
  const double centers[4] = {bins.write_early_ns, bins.write_late_ns,
                             bins.read_early_ns, bins.read_late_ns};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      if (std::abs(centers[a] - centers[b]) < bins.bin_width_ns)
        throw std::invalid_argument("time bins overlap");

  const auto hist = click_histogram(records);
  const std::uint64_t n_trials =
      records.empty() ? 0 : static_cast<std::uint64_t>(records.back().trial) + 1;
  const double play = 0.5 * (bins.bin_width_ns - bins.scan_width_ns);

  TimeBinMatrix matrix;
  for (int w = 0; w < 2; ++w) {
    const double wc = w == 0 ? bins.write_early_ns : bins.write_late_ns;
    for (int r = 0; r < 2; ++r) {
      const double rc = r == 0 ? bins.read_early_ns : bins.read_late_ns;
      const double nominal = rc - wc;
      // Anchor bins whose 6-ns window stays inside the 40-ns write bin.
      const double anchor = locate_anchor(
          hist, nominal, static_cast<std::int64_t>(std::ceil(wc - play)),
          static_cast<std::int64_t>(std::floor(wc + play)) - 1);
      const auto writes =
          window_counts(records, anchor, bins.scan_width_ns);
      CorrelationResult best;
      best.delay_ns = nominal;
      for (double p = rc - play; p <= rc + play + 1e-9;
           p += bins.scan_step_ns) {
        const auto reads = window_counts(records, p, bins.scan_width_ns);
        const auto c =
            coincidences_from_counts(writes, reads, n_trials, dn_max);
        const auto res =
            make_result(p - anchor, c.n_same, c.n_trials, c.n_diff_mean);
        if (res.defined && (!best.defined || res.g2 > best.g2)) best = res;
      }
      matrix.cell[w][r] = best;
    }
  }
  return matrix;
}

std::vector<TauBin> g2_tau_histogram(const std::vector<mc::ClickRecord>& records,
                                     double bin_width_ns, double max_tau_ns,
                                     Exec exec) {
  if (!(bin_width_ns > 0))
    throw std::invalid_argument("bin width must be positive");
  const int n_bins = static_cast<int>(max_tau_ns / bin_width_ns);
  if (n_bins < 1)
    throw std::invalid_argument("delay range shorter than one bin");
  if (records.empty())
    throw std::runtime_error("insufficient baseline statistics");

  const std::int64_t bin_ps = to_ps(bin_width_ns);
  const std::size_t n_segments =
      static_cast<std::size_t>(records.back().trial) + 1;
  // Segment-major click times, split by detector (HBT: cross-detector only).
  std::vector<std::vector<std::int64_t>> det0(n_segments), det1(n_segments);
  for (const auto& r : records)
    (r.detector == 0 ? det0 : det1)[r.trial].push_back(r.t_ps);

  std::vector<std::uint64_t> same(static_cast<std::size_t>(n_bins), 0);
  std::vector<std::uint64_t> cross(static_cast<std::size_t>(n_bins), 0);
  const auto tally = [&](const std::vector<std::int64_t>& a,
                         const std::vector<std::int64_t>& b,
                         std::vector<std::uint64_t>& bins) {
    for (const std::int64_t ta : a)
      for (const std::int64_t tb : b) {
        const std::int64_t d = ta < tb ? tb - ta : ta - tb;
        const std::int64_t bin = d / bin_ps;
        if (bin < n_bins) ++bins[static_cast<std::size_t>(bin)];
      }
  };

#ifdef _OPENMP
#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<std::uint64_t> my_same(same.size(), 0);
    std::vector<std::uint64_t> my_cross(cross.size(), 0);
    const auto local_tally = [&](const std::vector<std::int64_t>& a,
                                 const std::vector<std::int64_t>& b,
                                 std::vector<std::uint64_t>& bins) {
      for (const std::int64_t ta : a)
        for (const std::int64_t tb : b) {
          const std::int64_t d = ta < tb ? tb - ta : ta - tb;
          const std::int64_t bin = d / bin_ps;
          if (bin < n_bins) ++bins[static_cast<std::size_t>(bin)];
        }
    };
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_segments); ++s) {
      const std::size_t u = static_cast<std::size_t>(s);
      local_tally(det0[u], det1[u], my_same);
      if (u + 1 < n_segments) {
        local_tally(det0[u], det1[u + 1], my_cross);
        local_tally(det1[u], det0[u + 1], my_cross);
      }
    }
#pragma omp critical
    {
      for (std::size_t b = 0; b < same.size(); ++b) {
        same[b] += my_same[b];
        cross[b] += my_cross[b];
      }
    }
  }
  (void)tally;
#else
  for (std::size_t s = 0; s < n_segments; ++s) {
    tally(det0[s], det1[s], same);
    if (s + 1 < n_segments) {
      tally(det0[s], det1[s + 1], cross);
      tally(det1[s], det0[s + 1], cross);
    }
  }
  (void)exec;
#endif

  // Same-segment pairs come from n_segments segments, cross pairs from
  // (n_segments - 1) neighbor pairs counted in both orders.
  if (n_segments < 2)
    throw std::runtime_error("insufficient baseline statistics");
  const double norm = 2.0 * static_cast<double>(n_segments - 1) /
                      static_cast<double>(n_segments);
  std::vector<TauBin> out(static_cast<std::size_t>(n_bins));
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t u = static_cast<std::size_t>(b);
    if (cross[u] == 0)
      throw std::runtime_error("insufficient baseline statistics");
    TauBin& tb = out[u];
    tb.tau_ns = static_cast<double>(b) * bin_width_ns;
    tb.g2 = static_cast<double>(same[u]) * norm / static_cast<double>(cross[u]);
    const double ns = static_cast<double>(std::max<std::uint64_t>(1, same[u]));
    tb.err = std::max(tb.g2, norm / static_cast<double>(cross[u])) *
             std::sqrt(1.0 / ns + 1.0 / static_cast<double>(cross[u]));
  }
  return out;
}

}  // namespace pwg::analysis
