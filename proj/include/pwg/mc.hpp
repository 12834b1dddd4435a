#pragma once
#include <cstdint>
#include <vector>

#include "pwg/device.hpp"
#include "pwg/exec.hpp"
#include "pwg/rng.hpp"

// Monte-Carlo click-level simulation of pulsed write/read experiments and of
// continuous-wave thermal emission, down to detector timestamps.
namespace pwg::mc {

// One detector click. t_ps is integer picoseconds from the start of the
// trial's repetition window; records are ordered by (trial, t_ps, detector).
struct ClickRecord {
  std::uint32_t trial = 0;
  std::uint8_t detector = 0;
  std::int64_t t_ps = 0;
};

inline bool operator==(const ClickRecord& a, const ClickRecord& b) {
  return a.trial == b.trial && a.detector == b.detector && a.t_ps == b.t_ps;
}
inline bool operator<(const ClickRecord& a, const ClickRecord& b) {
  if (a.trial != b.trial) return a.trial < b.trial;
  if (a.t_ps != b.t_ps) return a.t_ps < b.t_ps;
  return a.detector < b.detector;
}

// Latent (pre-detection) counts of one trial.
struct TrialOutcome {
  int pairs = 0;            // photon-phonon pairs created by write pulses
  int thermal_initial = 0;  // thermal phonons present before the first write
  int thermal_heated = 0;   // phonons added by absorption heating at reads
  int read_converted = 0;   // phonons converted to photons by read pulses
};

// Write pulse acting on a mode holding `n_thermal` mean thermal phonons:
// the spontaneous pair number is geometric with ratio p_write (mean
// p_write/(1-p_write)) and each thermal phonon present seeds one further
// stimulated pair with probability p_write, so
//   E[pairs] = p_write/(1-p_write) + p_write * n_thermal.
// Draw order: thermal_initial (Bose-Einstein), spontaneous (geometric),
// stimulated (binomial over thermal_initial).
TrialOutcome sample_write(double p_write, double n_thermal, rng::Xoshiro& gen);

// Read pulse on the outcome of a write. Pair-written phonons are traveling
// wavepackets: each is back in the cavity with probability `retrieval`
// (revival overlap) and converts with probability p_read once there. The
// thermal occupancy is cavity-resident bath population: each thermal phonon
// survives to the read with probability `thermal_survival` (lifetime decay)
// and converts at full p_read. Absorption heating adds
// Bose-Einstein(n_heated) phonons converting at full p_read. Returns the
// converted-photon count and stores it in the outcome. Draw order:
// pair-retrieved (binomial), pair-converted (binomial), thermal-survived
// (binomial), thermal-converted (binomial), heated (Bose-Einstein),
// heated-converted (binomial).
int sample_read(TrialOutcome& outcome, double p_read, double retrieval,
                double thermal_survival, double n_heated, rng::Xoshiro& gen);

// Retrieval probability of a phonon wavepacket a delay `delta` after its
// creating pulse: the cavity-population revival |K(delta)|^2 normalized to
// the tallest revival within half a round trip of `delta`, times lifetime
// decay exp(-delta/t1) and a per-round-trip efficiency factor. By
// construction retrieval(0) = 1 and retrieval <= 1 everywhere.
class RetrievalModel {
 public:
  RetrievalModel(const MechanicalMode& mech, const ModeComb& comb, double t1,
                 double horizon, double round_trip_efficiency = 1.0);

  double operator()(double delta) const;
  // |K(t)|^2 on the precomputed grid (linear interpolation).
  double population(double t) const;
  double round_trip() const { return round_trip_; }
  double horizon() const { return t_max_; }

 private:
  std::vector<double> pop_;
  double dt_ = 0;
  double t_max_ = 0;
  double round_trip_ = 0;
  double t1_ = 0;
  double efficiency_ = 1.0;
};

struct PulsedSettings {
  PulseSequence seq;
  double n_thermal = 0.27;  // pre-write mechanical occupancy (steady state)
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 1;
  // Replace pair creation by independent classical photon draws with the
  // same mean; phonons stay purely thermal.
  bool classical = false;
  bool darks_enabled = true;
  double round_trip_efficiency = 1.0;
};

// Derived quantities of a pulsed run, for logging and oracle computation.
struct PulsedSummary {
  double retrieval = 0;         // retrieval factor at the write->read delay
  double thermal_survival = 0;  // thermal-phonon survival over the delay
  double n_heated = 0;          // heating occupancy added per read pulse
  double mean_pairs = 0;        // E[pairs] per write pulse
  double eta_det = 0;           // applied detection efficiency
};

// Full pulsed experiment: per trial, write and read pulses act on the phonon
// inventory (sample_write / sample_read semantics; pair wavepackets retrieve
// per RetrievalModel, the thermal occupancy stays cavity-resident and decays
// with the phonon lifetime); emitted photons survive detection with
// probability eta_det, route 50/50 onto the detectors, and are stamped with
// a time drawn from the pulse envelope (writes, thermal and heated
// conversions) or from the envelope times the cavity-population revival
// (retrieved pair conversions). Dark counts are Poisson per trial, uniform
// over the repetition window; each detector then enforces its dead time in
// time order. Records are sorted by trial, then time. Trial k draws from the
// RNG substream (seed, k), so the parallel path is bit-identical to the
// serial one.
std::vector<ClickRecord> simulate_pulsed(
    const Device& device, const PulsedSettings& settings,
    Exec exec = Exec::parallel, PulsedSummary* summary = nullptr,
    std::vector<TrialOutcome>* outcomes = nullptr);

// Exact write-read photon-number correlation of the latent trial model,
//   g2om = <pairs * converted> / (<pairs> * <converted>),
// which detection thinning leaves unchanged. Computed by enumerating the
// thermal and spontaneous-pair counts (stimulated and converted counts enter
// through closed-form conditional binomial moments). Enumeration cutoffs
// start at 12 and extend until the truncated probability mass is below
// 1e-10; throws std::runtime_error if that would take more than 2e6 terms,
// and std::invalid_argument when a parameter makes the correlation
// undefined (no write photons or no read photons).
double g2om_analytic(double p_write, double p_read, double n_thermal,
                     double retrieval, double n_heated,
                     double thermal_survival = 1.0);

// Per-detector non-paralyzable dead time: within each trial, a click is
// dropped when its detector registered an accepted click less than
// `dead_time` earlier. Records must be sorted by (trial, t_ps, detector).
void apply_dead_time(std::vector<ClickRecord>& records, double dead_time);

struct CwSettings {
  double segment_duration = 0;  // s, one recorded segment (trial)
  std::uint64_t n_segments = 0;
  double mean_occupation = 0;  // stationary thermal occupancy of every mode
  double rate_scale = 0;       // clicks per second per unit cavity |b|^2
  std::uint64_t seed = 1;
  double time_step = 1e-9;  // s, intensity sampling resolution
};

// Continuous-wave thermal emission: the coupled cavity-comb system is driven
// by its thermal baths, sampled as the exact stationary Gaussian process of
// the linear dynamics (one-step propagator plus matched complex-Gaussian
// injection, so every mode holds mean_occupation at all times). Clicks are
// an inhomogeneous Poisson process with rate rate_scale * |b(t)|^2, routed
// 50/50, with per-detector dead time. Each segment re-draws its state from
// the stationary ensemble and maps to one `trial` in the records, using RNG
// substream (seed, segment); parallel and serial paths are bit-identical.
std::vector<ClickRecord> simulate_cw_thermal(const Device& device,
                                             const CwSettings& settings,
                                             Exec exec = Exec::parallel);

}  // namespace pwg::mc
