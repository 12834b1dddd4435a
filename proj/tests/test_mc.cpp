#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pwg/calibration.hpp"
#include "pwg/mc.hpp"

using namespace pwg;

namespace {

// Per-trial click counts inside [lo, hi) nanoseconds.
std::vector<std::array<int, 2>> window_counts(
    const std::vector<mc::ClickRecord>& records, std::uint64_t n_trials,
    double write_lo_ns, double write_hi_ns, double read_lo_ns,
    double read_hi_ns) {
  std::vector<std::array<int, 2>> counts(n_trials, {0, 0});
  for (const auto& r : records) {
    const double t_ns = static_cast<double>(r.t_ps) * 1e-3;
    if (t_ns >= write_lo_ns && t_ns < write_hi_ns) ++counts[r.trial][0];
    if (t_ns >= read_lo_ns && t_ns < read_hi_ns) ++counts[r.trial][1];
  }
  return counts;
}

struct G2Estimate {
  double value = 0;
  double sigma = 0;
  double coincidences = 0;
  double baseline = 0;
};

// Same-trial write-read coincidences against the adjacent-trial baseline.
G2Estimate g2_from_counts(const std::vector<std::array<int, 2>>& counts) {
  double same = 0, cross = 0;
  const std::size_t n = counts.size();
  for (std::size_t t = 0; t < n; ++t) {
    same += static_cast<double>(counts[t][0]) * counts[t][1];
    cross += static_cast<double>(counts[t][0]) * counts[(t + 1) % n][1];
  }
  G2Estimate est;
  est.coincidences = same;
  est.baseline = cross;
  if (cross > 0) {
    est.value = same / cross;
    est.sigma = est.value * std::sqrt(1.0 / std::max(1.0, same) +
                                      1.0 / std::max(1.0, cross));
  }
  return est;
}

// Moment-algebra reference for the latent write-read correlation,
// independent of the enumeration in g2om_analytic.
double g2om_moments(double p, double pr, double n, double R, double nh,
                    double s = 1.0) {
  const double mu_sp = p / (1.0 - p);
  const double var_sp = p / ((1.0 - p) * (1.0 - p));
  const double m1 = n;
  const double m2 = n * (1.0 + 2.0 * n);
  const double mu_st = p * n;
  const double var_st = n * p * (1.0 - p) + p * p * n * (1.0 + n);
  const double mu_k = mu_sp + mu_st;
  const double k2 = var_sp + mu_sp * mu_sp + var_st + mu_st * mu_st +
                    2.0 * mu_sp * mu_st;
  const double km = mu_sp * m1 + p * m2;
  const double kc = pr * (R * k2 + s * km + nh * mu_k);
  const double c1 = pr * (R * mu_k + s * m1 + nh);
  return kc / (mu_k * c1);
}

}  // namespace

TEST_SUITE_BEGIN("mc");

TEST_CASE("write pulse pair statistics follow the spontaneous law") {
  rng::Xoshiro gen(101, 0);
  const double p = 0.014;
  const int n = 2000000;
  long long pairs_sum = 0;
  int at_least_one = 0;
  for (int i = 0; i < n; ++i) {
    const auto out = mc::sample_write(p, 0.0, gen);
    CHECK(out.thermal_initial == 0);
    pairs_sum += out.pairs;
    if (out.pairs >= 1) ++at_least_one;
  }
  // E[pairs] = p/(1-p); P(pairs >= 1) = p. Both vs their 3-sigma Monte-Carlo
  // bands.
  const double mean = static_cast<double>(pairs_sum) / n;
  CHECK(std::abs(mean - 0.0141988) < 3.0 * std::sqrt(0.0144004 / n));
  const double frac = static_cast<double>(at_least_one) / n;
  CHECK(std::abs(frac - 0.014) < 3.0 * std::sqrt(0.014 * 0.986 / n));
}

TEST_CASE("thermal phonons stimulate extra pairs") {
  rng::Xoshiro gen(102, 0);
  const double p = 0.02, n_th = 0.8;
  const int n = 2000000;
  long long pairs_sum = 0, thermal_sum = 0;
  for (int i = 0; i < n; ++i) {
    const auto out = mc::sample_write(p, n_th, gen);
    pairs_sum += out.pairs;
    thermal_sum += out.thermal_initial;
  }
  // E[pairs] = p/(1-p) + p n_th = 0.0364082 with variance 0.0370807.
  const double mean = static_cast<double>(pairs_sum) / n;
  CHECK(std::abs(mean - 0.0364082) < 3.0 * std::sqrt(0.0370807 / n));
  const double thermal_mean = static_cast<double>(thermal_sum) / n;
  CHECK(std::abs(thermal_mean - n_th) < 3.0 * std::sqrt(n_th * (1 + n_th) / n));
}

TEST_CASE("read conversion is linear and heralding raises it") {
  rng::Xoshiro gen(103, 0);
  const double p_w = 0.05, n_th = 0.5, p_r = 0.3, retrieval = 0.9,
               survival = 0.85, n_heated = 0.1;
  const int n = 1000000;
  double conv_sum = 0;
  double conv_heralded = 0, conv_unheralded = 0;
  long long n_heralded = 0, n_unheralded = 0;
  for (int i = 0; i < n; ++i) {
    auto out = mc::sample_write(p_w, n_th, gen);
    const int converted =
        mc::sample_read(out, p_r, retrieval, survival, n_heated, gen);
    CHECK(converted == out.read_converted);
    conv_sum += converted;
    if (out.pairs >= 1) {
      conv_heralded += converted;
      ++n_heralded;
    } else {
      conv_unheralded += converted;
      ++n_unheralded;
    }
  }
  // E[converted] = p_r (retrieval E[pairs] + survival n_th + n_heated)
  //             = 0.178460.
  const double mu_pairs = p_w / (1.0 - p_w) + p_w * n_th;
  const double expected =
      p_r * (retrieval * mu_pairs + survival * n_th + n_heated);
  CHECK(std::abs(conv_sum / n - expected) < 3e-3);
  // A pair event adds a retrievable phonon: conditioning on pairs >= 1 must
  // raise the conversion rate well past the unheralded one.
  REQUIRE(n_heralded > 1000);
  CHECK(conv_heralded / n_heralded > conv_unheralded / n_unheralded + 0.1);
}

TEST_CASE("correlation enumeration agrees with moment algebra") {
  rng::Xoshiro gen(104, 0);
  for (int i = 0; i < 30; ++i) {
    const double p = 1e-4 + 0.2 * rng::uniform(gen);
    const double pr = 0.01 + 0.49 * rng::uniform(gen);
    const double n = 2.0 * rng::uniform(gen);
    const double R = 0.1 + 0.9 * rng::uniform(gen);
    const double nh = 0.5 * rng::uniform(gen);
    const double s = 0.5 + 0.5 * rng::uniform(gen);
    const double by_enum = mc::g2om_analytic(p, pr, n, R, nh, s);
    const double by_moments = g2om_moments(p, pr, n, R, nh, s);
    CHECK(std::abs(by_enum - by_moments) <= 5e-9 * by_moments);
  }
}

TEST_CASE("correlation oracle: frozen values and limits") {
  // Frozen by the moment algebra above.
  CHECK(mc::g2om_analytic(0.014, 0.014, 0.27, 1.0, 0.0195) ==
        doctest::Approx(5.159711382).epsilon(1e-6));
  CHECK(mc::g2om_analytic(0.02, 0.1, 0.5, 0.8, 0.05) ==
        doctest::Approx(3.275494506).epsilon(1e-6));
  CHECK(mc::g2om_analytic(0.02, 0.1, 0.5, 0.8, 0.05, 0.9) ==
        doctest::Approx(3.398406208).epsilon(1e-6));
  // Deep thermal limit approaches the chaotic-light value 2.
  CHECK(mc::g2om_analytic(1e-3, 0.1, 1e3, 1.0, 0.0) ==
        doctest::Approx(2.000995977).epsilon(1e-6));
  // Vanishing write probability on a cold mode: strong heralding.
  CHECK(mc::g2om_analytic(1e-6, 0.05, 1e-3, 1.0, 0.0) > 100.0);
  // With no retrieval window the read still sees the resident thermal
  // floor, and the stimulated part of the write keeps a weak correlation.
  CHECK(mc::g2om_analytic(0.01, 0.1, 0.3, 0.0, 0.0) > 1.0);
  CHECK(mc::g2om_analytic(0.01, 0.1, 0.3, 0.0, 0.0) < 2.1);
  CHECK_THROWS_AS(mc::g2om_analytic(0.0, 0.1, 0.3, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc::g2om_analytic(0.01, 0.1, 0.0, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc::g2om_analytic(0.01, 0.1, 0.3, 0.0, 0.0, 0.0),
                  std::invalid_argument);
  // An occupancy too deep for the tail bound must refuse, not truncate.
  CHECK_THROWS_AS(mc::g2om_analytic(0.01, 0.1, 1e7, 1.0, 0.0),
                  std::runtime_error);
}

TEST_CASE("retrieval model: revival structure of the measured device") {
  const Device dev = calib::reference_device();
  const mc::RetrievalModel rm(dev.mech, dev.comb, dev.heating.t1, 400e-9, 1.0);
  CHECK(rm.population(0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rm(0.0) == 1.0);
  // The read delay of the standard sequence sits on the second revival.
  CHECK(rm(170e-9) > 0.985);
  CHECK(rm(170e-9) <= 1.0);
  // Between revivals the wavepacket is in the waveguide, not the cavity.
  CHECK(rm(45e-9) < 0.01);
  CHECK(rm(125e-9) < 0.02);
  CHECK(rm(215e-9) < 0.05);
  CHECK_THROWS_AS(rm(500e-9), std::invalid_argument);
}

TEST_CASE("pulsed run composes the pulse samplers") {
  Device dev = calib::reference_device();
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
  settings.n_thermal = 0.27;
  settings.n_trials = 2000;
  settings.seed = 77;
  mc::PulsedSummary summary;
  std::vector<mc::TrialOutcome> outcomes;
  mc::simulate_pulsed(dev, settings, Exec::parallel, &summary, &outcomes);
  REQUIRE(outcomes.size() == settings.n_trials);
  for (std::uint32_t t = 0; t < settings.n_trials; ++t) {
    rng::Xoshiro gen(settings.seed, t);
    auto expected = mc::sample_write(settings.seq.p_write, settings.n_thermal,
                                     gen);
    mc::sample_read(expected, settings.seq.p_read, summary.retrieval,
                    summary.thermal_survival, summary.n_heated, gen);
    CHECK(outcomes[t].pairs == expected.pairs);
    CHECK(outcomes[t].thermal_initial == expected.thermal_initial);
    CHECK(outcomes[t].thermal_heated == expected.thermal_heated);
    CHECK(outcomes[t].read_converted == expected.read_converted);
  }
}

TEST_CASE("pulsed click rates at the standard operating point") {
  Device dev = calib::reference_device();
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
  settings.n_trials = 2000000;
  settings.seed = 11;
  mc::PulsedSummary summary;
  const auto records = mc::simulate_pulsed(dev, settings, Exec::parallel,
                                           &summary);
  CHECK(summary.eta_det == doctest::Approx(0.038));
  CHECK(summary.retrieval > 0.985);
  CHECK(summary.n_heated == doctest::Approx(0.019528).epsilon(1e-3));

  const auto counts = window_counts(records, settings.n_trials, 40.0, 160.0,
                                    210.0, 330.0);
  double writes = 0, reads = 0;
  for (const auto& c : counts) {
    writes += c[0];
    reads += c[1];
  }
  // Detected rates: 1.4% x (1 + 0.27 thermal + spontaneous) x 3.8% on the
  // write side, and the retrieved-plus-heated occupancy on the read side.
  const double write_rate = writes / static_cast<double>(settings.n_trials);
  const double read_rate = reads / static_cast<double>(settings.n_trials);
  CHECK(write_rate > 6.4e-4);
  CHECK(write_rate < 9.6e-4);
  CHECK(read_rate > 1.36e-4);
  CHECK(read_rate < 2.04e-4);
}

TEST_CASE("pulsed correlation matches the exact oracle") {
  rng::Xoshiro param_gen(4242, 0);
  for (int draw = 0; draw < 10; ++draw) {
    Device dev = calib::reference_device();
    dev.chain.eta_det_override = 0.3 + 0.3 * rng::uniform(param_gen);
    dev.chain.dark_rate_per_trial = 0.0;
    dev.chain.dead_time = 0.0;
    mc::PulsedSettings settings;
    settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
    settings.seq.p_write = 0.02 + 0.03 * rng::uniform(param_gen);
    settings.seq.p_read = 0.08 + 0.17 * rng::uniform(param_gen);
    settings.n_thermal = 0.1 + 0.4 * rng::uniform(param_gen);
    settings.n_trials = 1000000;
    settings.seed = 9000 + static_cast<std::uint64_t>(draw);
    mc::PulsedSummary summary;
    const auto records = mc::simulate_pulsed(dev, settings, Exec::parallel,
                                             &summary);
    const auto counts = window_counts(records, settings.n_trials, 40.0, 160.0,
                                      210.0, 330.0);
    const G2Estimate est = g2_from_counts(counts);
    REQUIRE(est.coincidences > 50);
    const double oracle = mc::g2om_analytic(
        settings.seq.p_write, settings.seq.p_read, settings.n_thermal,
        summary.retrieval, summary.n_heated, summary.thermal_survival);
    CHECK(std::abs(est.value - oracle) < 3.0 * est.sigma);
  }
}

TEST_CASE("correlation-disabled runs respect the classical bound") {
  double pooled = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Device dev = calib::reference_device();
    dev.chain.eta_det_override = 0.3;
    dev.chain.dark_rate_per_trial = 0.0;
    dev.chain.dead_time = 0.0;
    mc::PulsedSettings settings;
    settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
    settings.seq.p_write = 0.03;
    settings.seq.p_read = 0.1;
    settings.classical = true;
    settings.n_trials = 200000;
    settings.seed = 300 + static_cast<std::uint64_t>(seed);
    const auto records = mc::simulate_pulsed(dev, settings);
    const auto counts = window_counts(records, settings.n_trials, 40.0, 160.0,
                                      210.0, 330.0);
    const G2Estimate est = g2_from_counts(counts);
    REQUIRE(est.baseline > 0);
    CHECK(est.value <= 2.0 + 3.0 * est.sigma);
    pooled += est.value;
  }
  // Independent photons: the cross-correlation sits at 1, far from the
  // heralding enhancement of the correlated model.
  CHECK(pooled / 10.0 > 0.7);
  CHECK(pooled / 10.0 < 1.3);
}

TEST_CASE("pulsed and thermal simulations are deterministic by seed") {
  Device dev = calib::reference_device();
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
  settings.n_trials = 50000;
  settings.seed = 5;
  const auto a = mc::simulate_pulsed(dev, settings, Exec::parallel);
  const auto b = mc::simulate_pulsed(dev, settings, Exec::parallel);
  const auto c = mc::simulate_pulsed(dev, settings, Exec::serial);
  CHECK(a == b);
  CHECK(a == c);
  settings.seed = 6;
  const auto d = mc::simulate_pulsed(dev, settings);
  CHECK(a != d);

  dev.chain.dead_time = 0.0;
  mc::CwSettings cw;
  cw.segment_duration = 1e-6;
  cw.n_segments = 200;
  cw.mean_occupation = 1.0;
  cw.rate_scale = 2e7;
  cw.seed = 9;
  const auto e = mc::simulate_cw_thermal(dev, cw, Exec::parallel);
  const auto f = mc::simulate_cw_thermal(dev, cw, Exec::serial);
  CHECK(e == f);
  REQUIRE(!e.empty());
  CHECK(std::is_sorted(e.begin(), e.end()));
}

TEST_CASE("write clicks follow the pulse envelope") {
  Device dev = calib::reference_device();
  dev.chain.eta_det_override = 1.0;
  dev.chain.dark_rate_per_trial = 0.0;
  dev.chain.dead_time = 0.0;
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
  settings.seq.p_write = 0.5;
  settings.seq.p_read = 0.0;
  settings.n_thermal = 0.0;
  settings.n_trials = 20000;
  settings.seed = 21;
  const auto records = mc::simulate_pulsed(dev, settings);
  REQUIRE(records.size() > 10000);
  double sum = 0, sum2 = 0;
  for (const auto& r : records) {
    const double t_ns = static_cast<double>(r.t_ps) * 1e-3;
    CHECK(t_ns >= 40.0);
    CHECK(t_ns <= 160.0);
    sum += t_ns;
    sum2 += t_ns * t_ns;
  }
  const double n = static_cast<double>(records.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean - 100.0) < 0.5);          // pulse center 100 ns
  CHECK(std::abs(sd - 16.99) < 0.8);            // FWHM 40 ns / 2.355
}

TEST_CASE("dark counts fill the repetition window at the quoted rate") {
  Device dev = calib::reference_device();
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::single_write_read);
  settings.seq.p_write = 0.0;
  settings.seq.p_read = 0.0;
  settings.n_thermal = 0.0;
  settings.n_trials = 10000000;
  settings.seed = 31;
  const auto records = mc::simulate_pulsed(dev, settings);
  // 1e-5 per trial x 1e7 trials: Poisson(100), 3 sigma = 30.
  CHECK(records.size() >= 70);
  CHECK(records.size() <= 130);
  double mean_t = 0;
  std::array<int, 2> per_det{};
  for (const auto& r : records) {
    mean_t += static_cast<double>(r.t_ps) * 1e-12;
    ++per_det[r.detector];
  }
  mean_t /= static_cast<double>(records.size());
  // Uniform over the 200 us window: mean at 100 us.
  CHECK(std::abs(mean_t - 100e-6) < 20e-6);
  CHECK(per_det[0] >= 20);
  CHECK(per_det[1] >= 20);
}

TEST_CASE("dead time removes clicks in time order, monotonically") {
  rng::Xoshiro gen(55, 0);
  std::vector<mc::ClickRecord> base;
  for (int i = 0; i < 3000; ++i)
    base.push_back({0, static_cast<std::uint8_t>(rng::coin(gen) ? 1 : 0),
                    static_cast<std::int64_t>(rng::uniform(gen) * 30e6)});
  std::sort(base.begin(), base.end());

  std::size_t previous = base.size();
  for (const double dead : {0.0, 20e-9, 50e-9, 100e-9, 500e-9, 2e-6}) {
    auto copy = base;
    mc::apply_dead_time(copy, dead);
    CHECK(copy.size() <= previous);
    if (dead == 0.0) CHECK(copy.size() == base.size());
    previous = copy.size();
  }

  // Periodic single-detector stream: every third click survives a dead time
  // of 2.5 periods.
  std::vector<mc::ClickRecord> periodic;
  for (int i = 0; i < 30; ++i)
    periodic.push_back({0, 0, static_cast<std::int64_t>(i) * 10000});
  mc::apply_dead_time(periodic, 25e-9);
  CHECK(periodic.size() == 10);
  // Trials reset the detectors.
  std::vector<mc::ClickRecord> trials = {{0, 0, 100}, {1, 0, 100}};
  mc::apply_dead_time(trials, 1e-3);
  CHECK(trials.size() == 2);
}

TEST_CASE("thermal emission: single-mode correlation law") {
  Device dev = calib::reference_device();
  dev.comb = ModeComb{};
  dev.mech.gamma_m = 5e5;  // 2 us correlation time
  dev.chain.dead_time = 0.0;
  mc::CwSettings cw;
  cw.segment_duration = 4e-6;
  cw.n_segments = 3000;
  cw.mean_occupation = 1.0;
  cw.rate_scale = 3e7;
  cw.seed = 71;
  const auto records = mc::simulate_cw_thermal(dev, cw);
  REQUIRE(records.size() > 100000);

  // g2 histogram: same-segment pairs over adjacent-segment baseline.
  const double bin = 100e-9;
  const int n_bins = 30;
  std::vector<double> same(n_bins, 0.0), cross(n_bins, 0.0);
  std::vector<std::vector<double>> by_seg(cw.n_segments);
  for (const auto& r : records)
    by_seg[r.trial].push_back(static_cast<double>(r.t_ps) * 1e-12);
  for (std::size_t s = 0; s < by_seg.size(); ++s) {
    const auto& a = by_seg[s];
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const int b = static_cast<int>((a[j] - a[i]) / bin);
        if (b < n_bins) ++same[b];
      }
    const auto& next = by_seg[(s + 1) % by_seg.size()];
    for (const double ta : a)
      for (const double tb : next) {
        const int b = static_cast<int>(std::abs(tb - ta) / bin);
        if (b < n_bins) ++cross[b];
      }
  }
  const auto g2_at = [&](int b) { return same[b] / (0.5 * cross[b]); };
  // Chaotic single mode: g2(tau) = 1 + exp(-gamma tau), averaged per bin.
  const auto oracle = [&](int b) {
    const double lo = b * bin, hi = (b + 1) * bin;
    return 1.0 + (std::exp(-dev.mech.gamma_m * lo) -
                  std::exp(-dev.mech.gamma_m * hi)) /
                     (dev.mech.gamma_m * bin);
  };
  CHECK(std::abs(g2_at(0) - oracle(0)) < 0.04);
  CHECK(std::abs(g2_at(14) - oracle(14)) < 0.04);
  CHECK(std::abs(g2_at(28) - oracle(28)) < 0.04);
}

TEST_CASE("thermal emission: intensity is stationary at the set occupancy") {
  Device dev = calib::reference_device();
  dev.comb = ModeComb{};
  dev.mech.gamma_m = 1e8;
  dev.chain.dead_time = 0.0;
  mc::CwSettings cw;
  cw.segment_duration = 1e-6;
  cw.n_segments = 20000;
  cw.mean_occupation = 0.5;
  cw.rate_scale = 5e7;
  cw.seed = 72;
  const auto records = mc::simulate_cw_thermal(dev, cw);
  const double measured =
      static_cast<double>(records.size()) /
      (static_cast<double>(cw.n_segments) * cw.segment_duration);
  const double expected = cw.rate_scale * cw.mean_occupation;
  CHECK(std::abs(measured / expected - 1.0) < 0.01);
}

TEST_CASE("thermal emission: comb revivals appear in the correlations") {
  Device dev = calib::reference_device();
  const double fsr = 12e6, t_c = 4e-9;
  dev.comb = uniform_comb(dev.mech.omega_m, fsr, 7,
                          calib::comb_coupling_for_decay(fsr, t_c),
                          6.283185307179586 * 10e3);
  dev.chain.dead_time = 0.0;
  mc::CwSettings cw;
  cw.segment_duration = 1e-6;
  cw.n_segments = 10000;
  cw.mean_occupation = 1.0;
  cw.rate_scale = 2e7;
  cw.seed = 73;
  const auto records = mc::simulate_cw_thermal(dev, cw);
  REQUIRE(records.size() > 100000);

  const double bin = 2e-9;
  const int n_bins = 100;  // out to 200 ns
  std::vector<double> same(n_bins, 0.0), cross(n_bins, 0.0);
  std::vector<std::vector<double>> by_seg(cw.n_segments);
  for (const auto& r : records)
    by_seg[r.trial].push_back(static_cast<double>(r.t_ps) * 1e-12);
  for (std::size_t s = 0; s < by_seg.size(); ++s) {
    const auto& a = by_seg[s];
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const int b = static_cast<int>((a[j] - a[i]) / bin);
        if (b < n_bins) ++same[b];
      }
    const auto& next = by_seg[(s + 1) % by_seg.size()];
    for (const double ta : a)
      for (const double tb : next) {
        const int b = static_cast<int>(std::abs(tb - ta) / bin);
        if (b < n_bins) ++cross[b];
      }
  }
  const auto g2_at = [&](int b) { return same[b] / (0.5 * cross[b]); };
  // Zero delay: chaotic field, g2(0) = 2.
  CHECK(std::abs(g2_at(0) - 2.0) < 0.08);
  // The revival: g2 re-peaks when the wavepacket returns, at the
  // cavity-population revival of the same comb.
  const mc::RetrievalModel rm(dev.mech, dev.comb, 0.0, 300e-9, 1.0);
  double pop_peak = 0, pop_peak_t = 0;
  for (double t = 40e-9; t < 140e-9; t += 0.1e-9)
    if (rm.population(t) > pop_peak) {
      pop_peak = rm.population(t);
      pop_peak_t = t;
    }
  int best_bin = 20;
  for (int b = 20; b < n_bins; ++b)
    if (g2_at(b) > g2_at(best_bin)) best_bin = b;
  const double revival_t = (best_bin + 0.5) * bin;
  CHECK(std::abs(revival_t - pop_peak_t) < 4e-9);
  CHECK(g2_at(best_bin) > 1.5);
  CHECK(std::abs(g2_at(best_bin) - (1.0 + pop_peak)) < 0.12);
  // Between revivals the correlation returns to the uncorrelated level.
  const int mid = static_cast<int>(0.5 * pop_peak_t / bin);
  CHECK(g2_at(mid) < 1.2);
}

TEST_CASE("double pulse scheme populates all four windows") {
  Device dev = calib::reference_device();
  dev.chain.eta_det_override = 0.5;
  dev.chain.dark_rate_per_trial = 0.0;
  mc::PulsedSettings settings;
  settings.seq = calib::reference_sequence(PulseScheme::double_write_read);
  settings.seq.p_write = 0.027;
  settings.seq.p_read = 0.015;
  settings.n_trials = 300000;
  settings.seed = 41;
  const auto records = mc::simulate_pulsed(dev, settings);
  REQUIRE(records.size() > 1000);
  // Pulses at 100, 145 (writes) and 270, 315 ns (reads).
  long writes = 0, reads = 0;
  for (const auto& r : records) {
    const double t_ns = static_cast<double>(r.t_ps) * 1e-3;
    CHECK(t_ns >= 40.0);
    CHECK(t_ns <= 375.0);
    if (t_ns < 207.5)
      ++writes;
    else
      ++reads;
  }
  CHECK(writes > 0);
  CHECK(reads > 0);
  CHECK(writes > reads);  // p_write exceeds the retrieved read rate
}

TEST_SUITE_END();
