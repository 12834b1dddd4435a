#include "pwg/mc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pwg/calibration.hpp"
#include "pwg/dynamics.hpp"

namespace pwg::mc {
namespace {

constexpr double kFourLn2 = 2.772588722239781;  // Gaussian FWHM normalization
// Pulse envelopes are truncated at this many FWHM from the center.
constexpr double kEnvelopeHalfWidth = 1.5;
constexpr int kEnvelopeGrid = 256;  // cells per tabulated envelope CDF

double gauss_weight(double t, double center, double fwhm) {
  const double x = (t - center) / fwhm;
  return std::exp(-kFourLn2 * x * x);
}

// Truncated-Gaussian time draw for a pulse envelope (rejection; the
// truncation at 1.5 FWHM = 3.5 sigma keeps the acceptance above 99.9%).
double sample_pulse_time(rng::Xoshiro& gen, double center, double fwhm) {
  const double sigma = fwhm / 2.354820045030949;
  for (int i = 0; i < 64; ++i) {
    const double x = sigma * rng::normal(gen);
    if (std::abs(x) <= kEnvelopeHalfWidth * fwhm) return center + x;
  }
  return center;  // unreachable in practice
}

// Tabulated CDF of a product envelope on a uniform grid.
struct EnvelopeCdf {
  double t0 = 0;
  double dt = 0;
  std::vector<double> cdf;  // ascending, cdf.front() == 0

  double sample(double u) const {
    const double target = u * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    const std::size_t hi =
        std::min<std::size_t>(cdf.size() - 1,
                              static_cast<std::size_t>(it - cdf.begin()));
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    const double span = cdf[hi] - cdf[lo];
    const double frac = span > 0 ? (target - cdf[lo]) / span : 0.5;
    return t0 + (static_cast<double>(lo) + frac) * dt;
  }
};

// CDF of gauss(read pulse) x cavity-population(t - origin). Falls back to the
// bare pulse envelope when the product has no support (no revival overlap).
EnvelopeCdf build_product_envelope(double read_center, double fwhm,
                                   double origin,
                                   const RetrievalModel& retrieval) {
  EnvelopeCdf env;
  env.t0 = read_center - kEnvelopeHalfWidth * fwhm;
  env.dt = 2.0 * kEnvelopeHalfWidth * fwhm / kEnvelopeGrid;
  env.cdf.resize(kEnvelopeGrid + 1);
  for (int pass = 0; pass < 2; ++pass) {
    const bool with_population = pass == 0;
    env.cdf[0] = 0.0;
    double prev = 0.0;
    for (int i = 0; i <= kEnvelopeGrid; ++i) {
      const double t = env.t0 + i * env.dt;
      double w = gauss_weight(t, read_center, fwhm);
      if (with_population) w *= retrieval.population(t - origin);
      if (i > 0) env.cdf[i] = env.cdf[i - 1] + 0.5 * (prev + w) * env.dt;
      prev = w;
    }
    if (env.cdf.back() > 1e-300) break;  // usable support
  }
  return env;
}

std::int64_t to_ps(double t_s) {
  return static_cast<std::int64_t>(std::llround(t_s * 1e12));
}

int route_detector(rng::Xoshiro& gen, int n_detectors) {
  if (n_detectors <= 1) return 0;
  if (n_detectors == 2) return rng::coin(gen) ? 1 : 0;
  const int d = static_cast<int>(rng::uniform(gen) * n_detectors);
  return std::min(d, n_detectors - 1);
}

// Shared, read-only context of a pulsed run.
struct PulsedContext {
  const PulsedSettings* settings = nullptr;
  double eta = 0;
  double n_heated = 0;
  double mu_classical = 0;
  double dark_rate = 0;
  double dead_time = 0;
  double period = 0;
  double fwhm = 0;
  int n_detectors = 2;
  int n_writes = 1;
  int n_reads = 1;
  // Pulse centers: writes first, then reads.
  std::array<double, 4> centers{};
  // retrieval[r][w]: retrieval factor at read r for pair wavepackets
  // launched by write w.
  std::array<std::array<double, 2>, 2> retrieval{};
  // Product envelopes for retrieved pair conversions, indexed like retrieval.
  std::array<std::array<EnvelopeCdf, 2>, 2> envelopes{};
  // Lifetime-decay factor of the cavity-resident occupancy across the span
  // ending at read r (from the first write for r = 0, else from read r - 1).
  std::array<double, 2> step_survival{};
};

void run_trial(const PulsedContext& ctx, std::uint32_t trial,
               std::vector<ClickRecord>& sink,
               std::vector<TrialOutcome>* outcomes) {
  const PulsedSettings& s = *ctx.settings;
  rng::Xoshiro gen(s.seed, trial);
  TrialOutcome outcome{};
  std::array<int, 2> counts{};  // traveling pair wavepackets per write

  struct Batch {
    int count;
    bool product;    // product envelope vs bare pulse envelope
    int read, origin;  // product-envelope indices
    double center;     // pulse center for bare envelopes
  };
  std::array<Batch, 12> batches;
  int n_batches = 0;

  outcome.thermal_initial = rng::bose_einstein(gen, s.n_thermal);
  // Cavity-resident occupancy: thermal phonons plus heated remnants of
  // earlier reads. Unlike pair wavepackets it never leaves the cavity, so
  // reads convert it at the bare read strength after lifetime decay.
  int resident = outcome.thermal_initial;

  for (int w = 0; w < ctx.n_writes; ++w) {
    int k = 0;
    if (s.classical) {
      k = rng::poisson(gen, ctx.mu_classical);
    } else {
      int inventory = resident;
      for (int o = 0; o < ctx.n_writes; ++o) inventory += counts[o];
      k = rng::geometric(gen, s.seq.p_write) +
          rng::binomial(gen, inventory, s.seq.p_write);
      counts[w] += k;
    }
    outcome.pairs += k;
    if (k > 0)
      batches[n_batches++] = {k, false, 0, 0, ctx.centers[w]};
  }

  for (int r = 0; r < ctx.n_reads; ++r) {
    for (int o = 0; o < ctx.n_writes; ++o) {
      if (counts[o] == 0) continue;
      const int eligible =
          rng::binomial(gen, counts[o], ctx.retrieval[r][o]);
      const int converted = rng::binomial(gen, eligible, s.seq.p_read);
      counts[o] -= converted;
      outcome.read_converted += converted;
      if (converted > 0)
        batches[n_batches++] = {converted, true, r, o, 0.0};
    }
    const int survived =
        rng::binomial(gen, resident, ctx.step_survival[r]);
    const int resident_converted =
        rng::binomial(gen, survived, s.seq.p_read);
    const int heated = rng::bose_einstein(gen, ctx.n_heated);
    outcome.thermal_heated += heated;
    const int heated_converted = rng::binomial(gen, heated, s.seq.p_read);
    resident = (survived - resident_converted) + (heated - heated_converted);
    outcome.read_converted += resident_converted + heated_converted;
    if (resident_converted + heated_converted > 0)
      batches[n_batches++] = {resident_converted + heated_converted, false,
                              0, 0, ctx.centers[ctx.n_writes + r]};
  }

  const std::size_t first = sink.size();
  for (int b = 0; b < n_batches; ++b) {
    const Batch& batch = batches[b];
    for (int i = 0; i < batch.count; ++i) {
      if (rng::uniform(gen) >= ctx.eta) continue;
      const int det = route_detector(gen, ctx.n_detectors);
      const double t =
          batch.product
              ? ctx.envelopes[batch.read][batch.origin].sample(
                    rng::uniform(gen))
              : sample_pulse_time(gen, batch.center, ctx.fwhm);
      sink.push_back({trial, static_cast<std::uint8_t>(det), to_ps(t)});
    }
  }
  if (s.darks_enabled && ctx.dark_rate > 0) {
    const int n_dark = rng::poisson(gen, ctx.dark_rate);
    for (int i = 0; i < n_dark; ++i) {
      const double t = rng::uniform(gen) * ctx.period;
      const int det = route_detector(gen, ctx.n_detectors);
      sink.push_back({trial, static_cast<std::uint8_t>(det), to_ps(t)});
    }
  }

  std::sort(sink.begin() + first, sink.end());
  if (ctx.dead_time > 0) {
    const std::int64_t dead_ps = to_ps(ctx.dead_time);
    std::array<std::int64_t, 16> last{};
    last.fill(std::numeric_limits<std::int64_t>::min() / 4);
    std::size_t keep = first;
    for (std::size_t i = first; i < sink.size(); ++i) {
      const int det = sink[i].detector;
      if (sink[i].t_ps - last[det] < dead_ps) continue;
      last[det] = sink[i].t_ps;
      sink[keep++] = sink[i];
    }
    sink.resize(keep);
  }
  if (outcomes != nullptr) (*outcomes)[trial] = outcome;
}

}  // namespace

TrialOutcome sample_write(double p_write, double n_thermal,
                          rng::Xoshiro& gen) {
  if (p_write < 0 || p_write >= 1)
    throw std::invalid_argument("write probability must be in [0, 1)");
  if (n_thermal < 0)
    throw std::invalid_argument("thermal occupancy must be non-negative");
  TrialOutcome outcome{};
  outcome.thermal_initial = rng::bose_einstein(gen, n_thermal);
  outcome.pairs = rng::geometric(gen, p_write) +
                  rng::binomial(gen, outcome.thermal_initial, p_write);
  return outcome;
}

int sample_read(TrialOutcome& outcome, double p_read, double retrieval,
                double thermal_survival, double n_heated, rng::Xoshiro& gen) {
  if (p_read < 0 || p_read > 1)
    throw std::invalid_argument("read probability must be in [0, 1]");
  if (retrieval < 0 || retrieval > 1)
    throw std::invalid_argument("retrieval must be in [0, 1]");
  if (thermal_survival < 0 || thermal_survival > 1)
    throw std::invalid_argument("thermal survival must be in [0, 1]");
  if (n_heated < 0)
    throw std::invalid_argument("heated occupancy must be non-negative");
  const int eligible = rng::binomial(gen, outcome.pairs, retrieval);
  const int converted = rng::binomial(gen, eligible, p_read);
  const int survived =
      rng::binomial(gen, outcome.thermal_initial, thermal_survival);
  const int thermal_converted = rng::binomial(gen, survived, p_read);
  const int heated = rng::bose_einstein(gen, n_heated);
  const int heated_converted = rng::binomial(gen, heated, p_read);
  outcome.thermal_heated = heated;
  outcome.read_converted = converted + thermal_converted + heated_converted;
  return outcome.read_converted;
}

RetrievalModel::RetrievalModel(const MechanicalMode& mech,
                               const ModeComb& comb, double t1,
                               double horizon, double round_trip_efficiency) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (round_trip_efficiency <= 0 || round_trip_efficiency > 1)
    throw std::invalid_argument("round-trip efficiency must be in (0, 1]");
  t1_ = t1;
  efficiency_ = round_trip_efficiency;
  round_trip_ = dyn::round_trip_time(mech, comb);
  t_max_ = horizon;
  dt_ = std::clamp(round_trip_ / 1024.0, 1e-12, 2e-10);
  const std::size_t n = static_cast<std::size_t>(t_max_ / dt_) + 2;
  const dyn::Evolver evolver(mech, comb);
  pop_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt_;
    pop_[i] = std::norm(evolver.kernel(t));
  }
}

double RetrievalModel::population(double t) const {
  if (t < 0) return 0.0;
  const double x = t / dt_;
  const std::size_t lo =
      std::min(pop_.size() - 2, static_cast<std::size_t>(x));
  const double frac = std::min(1.0, x - static_cast<double>(lo));
  return pop_[lo] + frac * (pop_[lo + 1] - pop_[lo]);
}

double RetrievalModel::operator()(double delta) const {
  if (delta < 0) return 0.0;
  if (delta == 0) return 1.0;
  if (delta > t_max_)
    throw std::invalid_argument("retrieval delay beyond populated horizon");
  const double lo_t = std::max(0.0, delta - 0.5 * round_trip_);
  const double hi_t = std::min(t_max_, delta + 0.5 * round_trip_);
  const std::size_t lo = static_cast<std::size_t>(lo_t / dt_);
  const std::size_t hi =
      std::min(pop_.size() - 1, static_cast<std::size_t>(hi_t / dt_) + 1);
  double peak = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) peak = std::max(peak, pop_[i]);
  if (peak <= 0.0) return 0.0;
  const double aligned = std::min(1.0, population(delta) / peak);
  const double decay = t1_ > 0 ? std::exp(-delta / t1_) : 1.0;
  const double loop =
      efficiency_ < 1.0 ? std::pow(efficiency_, delta / round_trip_) : 1.0;
  return aligned * decay * loop;
}

std::vector<ClickRecord> simulate_pulsed(const Device& device,
                                         const PulsedSettings& settings,
                                         Exec exec, PulsedSummary* summary,
                                         std::vector<TrialOutcome>* outcomes) {
  device.validate();
  settings.seq.validate();
  if (settings.n_trials == 0)
    throw std::invalid_argument("trial count must be positive");
  if (settings.n_trials > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("trial count exceeds the record range");
  if (settings.n_thermal < 0)
    throw std::invalid_argument("thermal occupancy must be non-negative");
  if (settings.seq.p_write >= 1)
    throw std::invalid_argument("write probability must be below 1");
  if (device.chain.n_detectors > 16)
    throw std::invalid_argument("at most 16 detectors supported");
  {
    const PulseSequence& q = settings.seq;
    const double extent = q.scheme == PulseScheme::double_write_read
                              ? q.tau + q.delta_tau
                              : q.tau;
    if (q.write_center < kEnvelopeHalfWidth * q.pulse_fwhm ||
        q.write_center + extent + kEnvelopeHalfWidth * q.pulse_fwhm >
            q.repetition_period)
      throw std::invalid_argument(
          "pulse envelopes must fit inside the repetition window");
  }

  const PulseSequence& seq = settings.seq;
  const bool double_scheme = seq.scheme == PulseScheme::double_write_read;

  PulsedContext ctx;
  ctx.settings = &settings;
  ctx.eta = calib::eta_det(device.chain);
  ctx.dark_rate = device.chain.dark_rate_per_trial;
  ctx.dead_time = device.chain.dead_time;
  ctx.n_detectors = device.chain.n_detectors;
  ctx.period = seq.repetition_period;
  ctx.fwhm = seq.pulse_fwhm;
  ctx.n_writes = double_scheme ? 2 : 1;
  ctx.n_reads = double_scheme ? 2 : 1;
  ctx.centers[0] = seq.write_center;
  if (double_scheme) {
    ctx.centers[1] = seq.write_center + seq.delta_tau;
    ctx.centers[2] = seq.write_center + seq.tau;
    ctx.centers[3] = seq.write_center + seq.tau + seq.delta_tau;
  } else {
    ctx.centers[1] = seq.write_center + seq.tau;
  }
  ctx.mu_classical = seq.p_write / (1.0 - seq.p_write) +
                     seq.p_write * settings.n_thermal;

  const double horizon =
      seq.tau + seq.delta_tau +
      1.5 * dyn::round_trip_time(device.mech, device.comb) +
      3.0 * seq.pulse_fwhm;
  const RetrievalModel retrieval(device.mech, device.comb, device.heating.t1,
                                 horizon, settings.round_trip_efficiency);
  ctx.n_heated = std::max(
      0.0, device.heating.preceded(seq.p_read) -
               settings.n_thermal * std::exp(-seq.tau / device.heating.t1));

  for (int r = 0; r < ctx.n_reads; ++r) {
    const double read_center = ctx.centers[ctx.n_writes + r];
    for (int o = 0; o < ctx.n_writes; ++o) {
      const double delta = read_center - ctx.centers[o];
      ctx.retrieval[r][o] = retrieval(delta);
      ctx.envelopes[r][o] = build_product_envelope(
          read_center, seq.pulse_fwhm, ctx.centers[o], retrieval);
    }
    const double prev =
        r == 0 ? ctx.centers[0] : ctx.centers[ctx.n_writes + r - 1];
    ctx.step_survival[r] =
        std::exp(-(read_center - prev) / device.heating.t1);
  }

  if (summary != nullptr) {
    summary->retrieval = retrieval(seq.tau);
    summary->thermal_survival = ctx.step_survival[0];
    summary->n_heated = ctx.n_heated;
    summary->mean_pairs = ctx.mu_classical;
    summary->eta_det = ctx.eta;
  }

  if (outcomes != nullptr)
    outcomes->assign(static_cast<std::size_t>(settings.n_trials),
                     TrialOutcome{});

  const std::uint64_t chunk_size = 4096;
  const std::uint64_t n_chunks =
      (settings.n_trials + chunk_size - 1) / chunk_size;
  std::vector<std::vector<ClickRecord>> buffers(
      static_cast<std::size_t>(n_chunks));

  const auto run_chunk = [&](std::uint64_t ci) {
    std::vector<ClickRecord>& buf = buffers[static_cast<std::size_t>(ci)];
    const std::uint64_t begin = ci * chunk_size;
    const std::uint64_t end =
        std::min(settings.n_trials, begin + chunk_size);
    for (std::uint64_t t = begin; t < end; ++t)
      run_trial(ctx, static_cast<std::uint32_t>(t), buf, outcomes);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci)
      run_chunk(static_cast<std::uint64_t>(ci));
  } else {
    for (std::uint64_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  }

  std::size_t total = 0;
  for (const auto& buf : buffers) total += buf.size();
  std::vector<ClickRecord> records;
  records.reserve(total);
  for (const auto& buf : buffers)
    records.insert(records.end(), buf.begin(), buf.end());
  return records;
}

double g2om_analytic(double p_write, double p_read, double n_thermal,
                     double retrieval, double n_heated,
                     double thermal_survival) {
  if (p_write <= 0 || p_write >= 1)
    throw std::invalid_argument("write probability must be in (0, 1)");
  if (p_read <= 0 || p_read > 1)
    throw std::invalid_argument("read probability must be in (0, 1]");
  if (n_thermal < 0 || n_heated < 0)
    throw std::invalid_argument("occupancies must be non-negative");
  if (retrieval < 0 || retrieval > 1)
    throw std::invalid_argument("retrieval must be in [0, 1]");
  if (thermal_survival < 0 || thermal_survival > 1)
    throw std::invalid_argument("thermal survival must be in [0, 1]");
  if (retrieval == 0 && (n_thermal == 0 || thermal_survival == 0) &&
      n_heated == 0)
    throw std::invalid_argument("no read photons: correlation undefined");

  // Cutoff with truncated mass below `tail` for a geometric law of ratio q.
  const auto cutoff_for = [](double q, double tail) -> long {
    if (q <= 0) return 12;
    const long needed =
        static_cast<long>(std::ceil(std::log(tail) / std::log(q))) + 1;
    return std::max<long>(12, needed);
  };
  const double q_th = n_thermal / (1.0 + n_thermal);
  const long m_max = cutoff_for(q_th, 0.5e-10);
  const long k_max = cutoff_for(p_write, 0.5e-10);
  if (m_max > 2000000 || k_max > 2000000)
    throw std::runtime_error(
        "correlation enumeration cannot reach the 1e-10 tail bound");

  // Spontaneous-pair pmf is geometric(p_write); the stimulated pairs given
  // m thermal phonons are Binomial(m, p_write) and enter through their
  // first two conditional moments. Pair wavepackets convert through the
  // retrieval window while the resident thermal occupancy converts after
  // lifetime decay, so the converted count enters linearly:
  //   E[c | m, k] = p_read (retrieval k + thermal_survival m + n_heated).
  double mean_k = 0.0, mean_c = 0.0, mean_kc = 0.0, mass = 0.0;
  double pm = 1.0 / (1.0 + n_thermal);  // P(m = 0)
  for (long m = 0; m <= m_max; ++m) {
    const double md = static_cast<double>(m);
    const double stim_mean = md * p_write;
    const double stim_var = md * p_write * (1.0 - p_write);
    double pk = 1.0 - p_write;  // P(k_spont = 0)
    for (long k = 0; k <= k_max; ++k) {
      const double kd = static_cast<double>(k);
      const double w = pm * pk;
      const double ek = kd + stim_mean;
      const double ek2 = kd * kd + 2.0 * kd * stim_mean + stim_var +
                         stim_mean * stim_mean;
      mass += w;
      mean_k += w * ek;
      mean_c += w * (retrieval * ek + thermal_survival * md + n_heated);
      mean_kc += w * (retrieval * ek2 + thermal_survival * md * ek +
                      n_heated * ek);
      pk *= p_write;
    }
    pm *= q_th;
  }
  if (1.0 - mass > 1e-10)
    throw std::runtime_error(
        "correlation enumeration tail exceeds 1e-10");
  mean_c *= p_read;
  mean_kc *= p_read;
  if (mean_k <= 0 || mean_c <= 0)
    throw std::invalid_argument("correlation undefined at zero rate");
  return mean_kc / (mean_k * mean_c);
}

void apply_dead_time(std::vector<ClickRecord>& records, double dead_time) {
  if (dead_time <= 0 || records.empty()) return;
  const std::int64_t dead_ps = to_ps(dead_time);
  std::array<std::int64_t, 16> last{};
  std::uint32_t current_trial = records.front().trial;
  last.fill(std::numeric_limits<std::int64_t>::min() / 4);
  std::size_t keep = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].trial != current_trial) {
      current_trial = records[i].trial;
      last.fill(std::numeric_limits<std::int64_t>::min() / 4);
    }
    const int det = records[i].detector;
    if (records[i].t_ps - last[det] < dead_ps) continue;
    last[det] = records[i].t_ps;
    records[keep++] = records[i];
  }
  records.resize(keep);
}

std::vector<ClickRecord> simulate_cw_thermal(const Device& device,
                                             const CwSettings& settings,
                                             Exec exec) {
  if (settings.segment_duration <= 0)
    throw std::invalid_argument("segment duration must be positive");
  if (settings.n_segments == 0)
    throw std::invalid_argument("segment count must be positive");
  if (settings.n_segments > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("segment count exceeds the record range");
  if (settings.mean_occupation <= 0)
    throw std::invalid_argument("mean occupation must be positive");
  if (settings.rate_scale <= 0)
    throw std::invalid_argument("rate scale must be positive");
  if (settings.time_step <= 0 ||
      settings.segment_duration / settings.time_step > 5e6)
    throw std::invalid_argument("time step too small for the segment");
  if (device.chain.n_detectors > 16)
    throw std::invalid_argument("at most 16 detectors supported");

  const double dt = settings.time_step;
  const double nbar = settings.mean_occupation;
  const long n_steps =
      static_cast<long>(std::lround(settings.segment_duration / dt));

  const dyn::Evolver evolver(device.mech, device.comb);
  const long dim = static_cast<long>(evolver.dim());

  // One-step propagator and the noise factor that keeps the per-mode
  // occupation stationary at nbar: cov(noise) = nbar (1 - E E^dagger).
  Eigen::VectorXcd phases(dim);
  for (long j = 0; j < dim; ++j)
    phases(j) = std::exp(std::complex<double>(0.0, -1.0) *
                         evolver.eigenvalues()(j) * dt);
  const Eigen::MatrixXcd propagator = evolver.eigenvectors() *
                                      phases.asDiagonal() *
                                      evolver.eigenvectors_inverse();
  Eigen::MatrixXcd noise_cov =
      nbar * (Eigen::MatrixXcd::Identity(dim, dim) -
              propagator * propagator.adjoint());
  noise_cov = 0.5 * (noise_cov + noise_cov.adjoint()).eval();
  noise_cov += 1e-14 * nbar * Eigen::MatrixXcd::Identity(dim, dim);
  const Eigen::LLT<Eigen::MatrixXcd> llt(noise_cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("stationary noise factorization failed");
  const Eigen::MatrixXcd noise_l = llt.matrixL();

  const double root_half = 0.7071067811865476;
  const auto draw_gaussian = [&](rng::Xoshiro& gen, Eigen::VectorXcd& out) {
    for (long j = 0; j < dim; ++j) {
      const double re = rng::normal(gen);
      const double im = rng::normal(gen);
      out(j) = std::complex<double>(re * root_half, im * root_half);
    }
  };

  const std::uint64_t chunk_size = 64;
  const std::uint64_t n_chunks =
      (settings.n_segments + chunk_size - 1) / chunk_size;
  std::vector<std::vector<ClickRecord>> buffers(
      static_cast<std::size_t>(n_chunks));

  const auto run_chunk = [&](std::uint64_t ci) {
    std::vector<ClickRecord>& buf = buffers[static_cast<std::size_t>(ci)];
    Eigen::VectorXcd state(dim), gauss(dim);
    const std::uint64_t begin = ci * chunk_size;
    const std::uint64_t end =
        std::min<std::uint64_t>(settings.n_segments, begin + chunk_size);
    for (std::uint64_t seg = begin; seg < end; ++seg) {
      rng::Xoshiro gen(settings.seed, seg);
      const std::size_t first = buf.size();
      draw_gaussian(gen, gauss);
      state = std::sqrt(nbar) * gauss;
      for (long step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double rate = settings.rate_scale * std::norm(state(0));
        const int n_clicks = rng::poisson(gen, rate * dt);
        for (int c = 0; c < n_clicks; ++c) {
          const double tc = t + rng::uniform(gen) * dt;
          const int det = route_detector(gen, device.chain.n_detectors);
          buf.push_back({static_cast<std::uint32_t>(seg),
                         static_cast<std::uint8_t>(det), to_ps(tc)});
        }
        draw_gaussian(gen, gauss);
        state = (propagator * state + noise_l * gauss).eval();
      }
      std::sort(buf.begin() + first, buf.end());
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(n_chunks); ++ci)
      run_chunk(static_cast<std::uint64_t>(ci));
  } else {
    for (std::uint64_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  }

  std::size_t total = 0;
  for (const auto& buf : buffers) total += buf.size();
  std::vector<ClickRecord> records;
  records.reserve(total);
  for (const auto& buf : buffers)
    records.insert(records.end(), buf.begin(), buf.end());
  apply_dead_time(records, device.chain.dead_time);
  return records;
}

}  // namespace pwg::mc
