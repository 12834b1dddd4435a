#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "pwg/device.hpp"
#include "pwg/exec.hpp"

namespace pwg::omit {

using Complex = std::complex<double>;

// Pump/probe parameters for the transparency measurement. g is the
// pump-enhanced coupling rate g0*alpha; detuning is cavity minus laser.
// probe_e0/probe_e1 are the relative amplitudes of the upper/lower probe
// sidebands (amplitude modulation gives e0 = e1).
struct OmitDriveParams {
  double detuning = 0.0;   // rad/s
  double g = 0.0;          // rad/s
  double probe_e0 = 1.0;
  double probe_e1 = 1.0;

  void validate() const;
};

enum class SpectrumKind { s21_magnitude, reflection, custom };

struct Spectrum {
  std::vector<double> freqs;     // rad/s, strictly increasing
  std::vector<Complex> values;   // |S21| stored in the real part
  SpectrumKind kind = SpectrumKind::custom;

  void validate() const;
};

// Mechanical susceptibility seen by the optical field: a single cavity mode
// dressed by the waveguide comb,
//   chi(w) = g^2 / (w - w_m + i Gm/2 - sum_l ge_l^2/(w - w_l + i Gl/2)).
// Throws std::domain_error("singular evaluation") if a zero-linewidth pole is
// hit exactly.
Complex susceptibility(double omega, const MechanicalMode& mech,
                       const ModeComb& comb, const OmitDriveParams& drive);

// Upper-sideband reflection r+ = 1 - i k_e/(w - delta + i k_t/2 - chi(w)).
// |r+| <= 1 for any passive parameter set.
Complex reflection_coefficient(double omega, const OpticalCavity& optics,
                               const MechanicalMode& mech, const ModeComb& comb,
                               const OmitDriveParams& drive);

// Normalized transmission magnitude |S21|(w) = (1 + Re r+)/2 on a uniform
// grid of n_points over [omega_lo, omega_hi]; frequencies are offsets from
// the pump in rad/s. Points are independent; the parallel path must match the
// serial one bit-for-bit.
Spectrum s21_spectrum(double omega_lo, double omega_hi, int n_points,
                      const Device& device, const OmitDriveParams& drive,
                      Exec exec = Exec::parallel);
Spectrum s21_spectrum_serial(double omega_lo, double omega_hi, int n_points,
                             const Device& device, const OmitDriveParams& drive);

// Diagnostic: time-averaged photodiode beat quadratures at the probe offset
// frequency, including both probe sidebands: beta = (e0 r+ + e1 conj(r-))/
// (e0 + e1). Re beta reduces to |S21| when the lower sideband is far off
// resonance. Returned as (in_phase, quadrature).
struct BeatQuadratures {
  double in_phase;
  double quadrature;
};
BeatQuadratures photodiode_beat(double omega, const OpticalCavity& optics,
                                const MechanicalMode& mech,
                                const ModeComb& comb,
                                const OmitDriveParams& drive);

// Inverse problem: locate transparency peaks in a measured/synthetic |S21|
// spectrum and rebuild a mode comb. Peak centers come from prominence-based
// detection plus local Lorentzian fits; each coupling rate is recovered by
// root-solving the forward model (if device context is present) so that the
// feature a single mode produces at the fitted center matches the fitted
// line area (height x width, which is robust to scan resolution). Without
// device context the couplings fall back to half the fitted width.
struct PeakExtractionConfig {
  double min_prominence = 0.05;   // fraction of full scale
  double gamma_floor = 6.2832e4;  // intrinsic linewidth assigned to modes, rad/s
  std::optional<Device> device;   // forward-model context for width inversion
  OmitDriveParams drive;          // pump context used with `device`
};

struct ExtractionResult {
  ModeComb comb;
  std::vector<std::string> warnings;  // merged/overlapping peak notes
};

// Throws std::runtime_error("no peaks found") on a featureless spectrum.
ExtractionResult extract_mode_comb(const Spectrum& spectrum,
                                   const PeakExtractionConfig& config = {});

// Number of local maxima whose topographic prominence exceeds the given
// fraction of the spectrum's full range. The one-maximum-per-mode check of
// a transparency scan is phrased through this count.
int count_prominent_maxima(const Spectrum& spectrum,
                           double prominence_fraction);

}  // namespace pwg::omit
