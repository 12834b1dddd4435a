#include "pwg/omit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pwg/fitting.hpp"

namespace pwg::omit {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void OmitDriveParams::validate() const {
  if (g < 0) throw std::invalid_argument("drive coupling g must be >= 0");
  if (probe_e0 < 0 || probe_e1 < 0)
    throw std::invalid_argument("probe sideband amplitudes must be >= 0");
  if (probe_e0 + probe_e1 <= 0)
    throw std::invalid_argument("at least one probe sideband must be nonzero");
}

void Spectrum::validate() const {
  if (freqs.size() != values.size())
    throw std::invalid_argument("spectrum freqs/values length mismatch");
  for (size_t i = 1; i < freqs.size(); ++i)
    if (freqs[i] <= freqs[i - 1])
      throw std::invalid_argument("spectrum frequencies must be increasing");
}

Complex susceptibility(double omega, const MechanicalMode& mech,
                       const ModeComb& comb, const OmitDriveParams& drive) {
  if (drive.g == 0.0) return {0.0, 0.0};
  Complex denom{omega - mech.omega_m, mech.gamma_m / 2.0};
  for (const auto& mode : comb.modes) {
    Complex pole{omega - mode.omega, mode.gamma / 2.0};
    if (pole == Complex{0.0, 0.0})
      throw std::domain_error("singular evaluation");
    denom -= mode.gamma_e * mode.gamma_e / pole;
  }
  if (denom == Complex{0.0, 0.0}) throw std::domain_error("singular evaluation");
  return drive.g * drive.g / denom;
}

Complex reflection_coefficient(double omega, const OpticalCavity& optics,
                               const MechanicalMode& mech, const ModeComb& comb,
                               const OmitDriveParams& drive) {
  Complex chi = susceptibility(omega, mech, comb, drive);
  Complex denom = Complex{omega - drive.detuning, optics.kappa_t() / 2.0} - chi;
  if (denom == Complex{0.0, 0.0}) throw std::domain_error("singular evaluation");
  return 1.0 - kI * optics.kappa_e / denom;
}

namespace {

double s21_point(double omega, const Device& device,
                 const OmitDriveParams& drive) {
  Complex r = reflection_coefficient(omega, device.optics, device.mech,
                                     device.comb, drive);
  return 0.5 * (1.0 + r.real());
}

Spectrum s21_impl(double omega_lo, double omega_hi, int n_points,
                  const Device& device, const OmitDriveParams& drive,
                  bool parallel) {
  if (n_points < 2) throw std::invalid_argument("need at least 2 points");
  if (omega_hi <= omega_lo)
    throw std::invalid_argument("empty frequency range");
  drive.validate();
  Spectrum out;
  out.kind = SpectrumKind::s21_magnitude;
  out.freqs.resize(n_points);
  out.values.resize(n_points);
  const double step = (omega_hi - omega_lo) / (n_points - 1);
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n_points; ++i) {
    double w = omega_lo + step * i;
    out.freqs[i] = w;
    out.values[i] = Complex{s21_point(w, device, drive), 0.0};
  }
  return out;
}

}  // namespace

Spectrum s21_spectrum(double omega_lo, double omega_hi, int n_points,
                      const Device& device, const OmitDriveParams& drive,
                      Exec exec) {
  return s21_impl(omega_lo, omega_hi, n_points, device, drive,
                  exec == Exec::parallel);
}

Spectrum s21_spectrum_serial(double omega_lo, double omega_hi, int n_points,
                             const Device& device,
                             const OmitDriveParams& drive) {
  return s21_impl(omega_lo, omega_hi, n_points, device, drive, false);
}

BeatQuadratures photodiode_beat(double omega, const OpticalCavity& optics,
                                const MechanicalMode& mech,
                                const ModeComb& comb,
                                const OmitDriveParams& drive) {
  drive.validate();
  Complex r_up = reflection_coefficient(omega, optics, mech, comb, drive);
  // Lower probe sideband: mirrored offset, same pump detuning.
  Complex chi_lo = susceptibility(-omega, mech, comb, drive);
  Complex denom_lo =
      Complex{-omega - drive.detuning, optics.kappa_t() / 2.0} - chi_lo;
  Complex r_lo = 1.0 - kI * optics.kappa_e / denom_lo;
  Complex beta = (drive.probe_e0 * r_up + drive.probe_e1 * std::conj(r_lo)) /
                 (drive.probe_e0 + drive.probe_e1);
  return {beta.real(), beta.imag()};
}

// ---------------------------------------------------------------------------
// Peak extraction

namespace {

struct RawPeak {
  int index = 0;
  double prominence = 0;
};

// Prominence of a local maximum: height above the higher of the two key
// saddles (the minima separating it from taller terrain, or from the ends).
std::vector<RawPeak> find_peaks(const std::vector<double>& y,
                                double min_prominence) {
  const int n = static_cast<int>(y.size());
  std::vector<RawPeak> peaks;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double left_min = y[i];
    for (int j = i - 1; j >= 0; --j) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    double right_min = y[i];
    for (int j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    double prom = y[i] - std::max(left_min, right_min);
    if (prom >= min_prominence) peaks.push_back({i, prom});
  }
  return peaks;
}

struct FittedPeak {
  double center = 0;
  double fwhm = 0;
  double amplitude = 0;
};

// Local Lorentzian least squares around one detected maximum.  Features sit
// on the sloping pedestal of the broad hybridized-cavity response, so the
// straight line through the two flanking saddle minima is subtracted before
// fitting; data and synthetic widths are then measured the same way.
FittedPeak fit_peak(const std::vector<double>& x, const std::vector<double>& y,
                    int peak_index, int lo_bound, int hi_bound) {
  const int n = static_cast<int>(y.size());
  int il = peak_index, ir = peak_index;
  for (int j = peak_index; j >= lo_bound; --j)
    if (y[j] < y[il]) il = j;
  for (int j = peak_index; j <= hi_bound && j < n; ++j)
    if (y[j] < y[ir]) ir = j;
  if (il == peak_index) il = std::max(0, peak_index - 3);
  if (ir == peak_index) ir = std::min(n - 1, peak_index + 3);

  std::vector<double> xs(x.begin() + il, x.begin() + ir + 1);
  std::vector<double> ys(y.begin() + il, y.begin() + ir + 1);
  const double slope = (y[ir] - y[il]) / (x[ir] - x[il]);
  for (size_t j = 0; j < ys.size(); ++j) ys[j] -= y[il] + slope * (xs[j] - x[il]);

  const int pk = peak_index - il;
  const double prominence = ys[pk];

  // Half-height crossings of the detrended peak give the width initializer.
  const double half = 0.5 * ys[pk];
  double xl = xs.front(), xr = xs.back();
  for (int j = pk; j > 0; --j)
    if (ys[j - 1] <= half) {
      double f = (ys[j] - half) / (ys[j] - ys[j - 1]);
      xl = xs[j] - f * (xs[j] - xs[j - 1]);
      break;
    }
  for (int j = pk; j + 1 < static_cast<int>(ys.size()); ++j)
    if (ys[j + 1] <= half) {
      double f = (ys[j] - half) / (ys[j] - ys[j + 1]);
      xr = xs[j] + f * (xs[j + 1] - xs[j]);
      break;
    }
  double fwhm_init = std::max(xr - xl, x[1] - x[0]);

  // The line shape is only Lorentzian near its core, so the fitted amplitude
  // depends on how much tail enters the fit; clip every fit to the same
  // +-4 width core so measured and model heights stay comparable.
  int cl = pk, cr = pk;
  while (cl > 0 && xs[pk] - xs[cl - 1] <= 4.0 * fwhm_init) --cl;
  while (cr + 1 < static_cast<int>(xs.size()) &&
         xs[cr + 1] - xs[pk] <= 4.0 * fwhm_init)
    ++cr;
  cl = std::min(cl, std::max(0, pk - 3));
  cr = std::max(cr, std::min(static_cast<int>(xs.size()) - 1, pk + 3));
  std::vector<double> xc(xs.begin() + cl, xs.begin() + cr + 1);
  std::vector<double> yc(ys.begin() + cl, ys.begin() + cr + 1);

  auto fit = fit::fit_lorentzian(xc, yc, xs[pk], fwhm_init);
  if (!fit.converged || fit.amplitude <= 0 || fit.fwhm <= 0 ||
      fit.center < xc.front() || fit.center > xc.back())
    return {xs[pk], fwhm_init, prominence};
  return {fit.center, fit.fwhm, fit.amplitude};
}

// Baseline-subtracted strength (fitted height x width, i.e. line area) of
// the transparency feature nearest `center` that a trial comb produces in
// the forward model; 0 when no feature rises above the local pedestal.
// Area survives coarse sampling where height does not: a fit with few
// points across the core trades amplitude against width but pins their
// product, so matching areas keeps measurement and model comparable at any
// scan resolution.
double forward_feature_height(const Device& device,
                              const OmitDriveParams& drive,
                              const ModeComb& trial, double center,
                              double span, double grid_step) {
  Device probe = device;
  probe.comb = trial;
  int n = static_cast<int>(std::lround(2.0 * span / grid_step)) + 1;
  n = std::clamp(n, 31, 4001);
  auto spec = s21_spectrum_serial(center - span, center + span, n, probe,
                                  drive);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = spec.values[i].real();
  int pk = -1;
  double best_dist = 0;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double d = std::abs(spec.freqs[i] - center);
    if (pk < 0 || d < best_dist) {
      pk = i;
      best_dist = d;
    }
  }
  if (pk < 0) return 0.0;
  auto fitted = fit_peak(spec.freqs, y, pk, 0, n - 1);
  return std::max(0.0, fitted.amplitude * fitted.fwhm);
}

// Solve forward_feature_height(gamma_e) = target by exponential bracketing
// and bisection; the feature height grows monotonically with the coupling
// until the transparency window saturates.
double invert_coupling(const Device& device, const OmitDriveParams& drive,
                       const ModeComb& context, size_t mode_index,
                       double target_height, double feature_scale,
                       double grid_step, double gamma_floor,
                       std::vector<std::string>& warnings) {
  ModeComb trial = context;
  double center = trial.modes[mode_index].omega;
  double span = 8.0 * feature_scale;
  for (size_t k = 0; k < trial.modes.size(); ++k) {
    if (k == mode_index) continue;
    span = std::min(span, 0.7 * std::abs(trial.modes[k].omega - center));
  }
  span = std::max(span, 4.0 * feature_scale);

  auto height_at = [&](double gamma_e) {
    trial.modes[mode_index].gamma_e = gamma_e;
    return forward_feature_height(device, drive, trial, center, span,
                                  std::min(grid_step, feature_scale / 12.0));
  };

  double hi = std::max(feature_scale, 100.0 * gamma_floor);
  double prev = height_at(hi);
  int guard = 0;
  bool bracketed = prev >= target_height;
  while (!bracketed && guard++ < 24) {
    hi *= 2.0;
    double h = height_at(hi);
    if (h >= target_height) {
      bracketed = true;
      break;
    }
    if (h <= prev * 1.005) {
      // Height stopped growing: the transparency window has saturated below
      // the measured height; report the saturating coupling.
      warnings.push_back("feature height saturates below measurement near " +
                         std::to_string(center) + " rad/s");
      return hi;
    }
    prev = h;
  }
  if (!bracketed) {
    warnings.push_back("coupling inversion failed to bracket near " +
                       std::to_string(center));
    return hi;
  }
  double lo = 0.0;
  for (int it = 0; it < 48; ++it) {
    double mid = 0.5 * (lo + hi);
    if (height_at(mid) < target_height)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ExtractionResult extract_mode_comb(const Spectrum& spectrum,
                                   const PeakExtractionConfig& config) {
  spectrum.validate();
  if (spectrum.kind != SpectrumKind::s21_magnitude)
    throw std::invalid_argument("spectrum kind must be s21_magnitude");
  if (spectrum.freqs.size() < 5)
    throw std::invalid_argument("spectrum too short");

  std::vector<double> y(spectrum.values.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = spectrum.values[i].real();
  const double scale =
      *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
  auto raw = find_peaks(y, config.min_prominence * std::max(scale, 1e-12));
  if (raw.empty()) throw std::runtime_error("no peaks found");

  ExtractionResult result;
  std::vector<FittedPeak> fitted;
  for (size_t p = 0; p < raw.size(); ++p) {
    int lo_bound = p == 0 ? 0 : raw[p - 1].index;
    int hi_bound = p + 1 < raw.size() ? raw[p + 1].index
                                      : static_cast<int>(y.size()) - 1;
    fitted.push_back(
        fit_peak(spectrum.freqs, y, raw[p].index, lo_bound, hi_bound));
  }

  // The hybridized cavity response contributes one broad pedestal bump in
  // addition to the narrow per-mode features; discard outlier widths.
  if (fitted.size() >= 3) {
    std::vector<double> widths;
    for (const auto& pk : fitted) widths.push_back(pk.fwhm);
    std::nth_element(widths.begin(), widths.begin() + widths.size() / 2,
                     widths.end());
    const double median = widths[widths.size() / 2];
    std::vector<FittedPeak> kept;
    for (const auto& pk : fitted) {
      if (pk.fwhm > 6.0 * median) {
        result.warnings.push_back("broad background feature dropped near " +
                                  std::to_string(pk.center) + " rad/s");
        continue;
      }
      kept.push_back(pk);
    }
    fitted = std::move(kept);
  }

  // Merge pairs whose fitted profiles overlap beyond resolution.
  std::vector<FittedPeak> merged;
  for (const auto& pk : fitted) {
    if (!merged.empty() &&
        pk.center - merged.back().center <
            0.5 * (pk.fwhm + merged.back().fwhm)) {
      auto& prev = merged.back();
      double wa = prev.amplitude, wb = pk.amplitude;
      double c = (prev.center * wa + pk.center * wb) / (wa + wb);
      result.warnings.push_back(
          "overlapping peaks merged near " + std::to_string(c) +
          " rad/s; widths unresolved");
      prev.center = c;
      prev.fwhm = std::max(prev.fwhm, pk.center + pk.fwhm / 2 -
                                          (prev.center - prev.fwhm / 2));
      prev.amplitude = wa + wb;
      continue;
    }
    merged.push_back(pk);
  }

  ModeComb comb;
  for (const auto& pk : merged)
    comb.modes.push_back({pk.center, pk.fwhm / 2.0, config.gamma_floor});

  if (config.device) {
    const double grid_step = spectrum.freqs[1] - spectrum.freqs[0];
    // Two passes: first invert each feature's line area against a
    // single-mode model, then refine with the other extracted modes present
    // (their tails shift the local pedestal the feature is measured against).
    for (int pass = 0; pass < 2; ++pass) {
      ModeComb context = comb;
      if (pass == 0) {
        for (size_t l = 0; l < comb.modes.size(); ++l) {
          ModeComb single;
          single.modes.push_back(comb.modes[l]);
          comb.modes[l].gamma_e = invert_coupling(
              *config.device, config.drive, single, 0,
              merged[l].amplitude * merged[l].fwhm, merged[l].fwhm,
              grid_step, config.gamma_floor, result.warnings);
        }
      } else {
        for (size_t l = 0; l < comb.modes.size(); ++l)
          comb.modes[l].gamma_e = invert_coupling(
              *config.device, config.drive, context, l,
              merged[l].amplitude * merged[l].fwhm, merged[l].fwhm,
              grid_step, config.gamma_floor, result.warnings);
      }
    }
  }

  comb.validate();
  result.comb = comb;
  return result;
}

int count_prominent_maxima(const Spectrum& spectrum,
                           double prominence_fraction) {
  spectrum.validate();
  const size_t n = spectrum.freqs.size();
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = spectrum.values[i].real();
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double threshold = prominence_fraction * (*hi_it - *lo_it);
  int count = 0;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double left_min = y[i], right_min = y[i];
    for (size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    for (size_t j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    if (y[i] - std::max(left_min, right_min) >= threshold) ++count;
  }
  return count;
}

}  // namespace pwg::omit
