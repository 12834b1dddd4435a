#pragma once
#include "pwg/device.hpp"

// Device calibration relations: pulse energy to scattering probability,
// detection efficiency, click-rate budgets, sideband-asymmetry thermometry,
// and the comb geometry conversions.
namespace pwg::calib {

// End-to-end detection efficiency. Product of the chain factors, unless the
// chain carries a calibrated override.
double eta_det(const DetectionChain& chain);

struct ScatteringProbabilities {
    double exponent = 0;  // x, the per-pulse scattering exponent
    double p_read = 0;    // 1 - exp(-x), anti-Stokes (red-detuned pulse)
    double p_write = 0;   // exp(x) - 1, Stokes (blue-detuned pulse)
    bool saturated = false;  // p_write beyond the perturbative regime (> 0.3)
};

// Scattering probability of a resonant sideband pulse of the given energy:
//   x = 4 eta_dev g0^2 E / (hbar omega_c (omega_m^2 + (kappa_t/2)^2)).
// p_write is reported unclamped; `saturated` flags p_write > 0.3.
ScatteringProbabilities scattering_probability(const OpticalCavity& optics,
                                               const MechanicalMode& mech,
                                               double pulse_energy);

struct ClickRates {
    double gamma_r = 0;  // anti-Stokes (read) clicks per trial
    double gamma_b = 0;  // Stokes (write) clicks per trial
};

// Per-trial detected click rates for a mode at occupancy n_th:
//   gamma_r = p_read n_th eta,  gamma_b = p_write (1 + n_th) eta.
ClickRates click_rates(double p_read, double p_write, double n_th, double eta);

// Thermal occupancy from the measured sideband asymmetry,
//   n_th = gamma_r / (gamma_b - gamma_r).
// Requires gamma_b > gamma_r (quantum asymmetry); throws otherwise.
double n_th_from_asymmetry(double gamma_r, double gamma_b);

struct CombGeometry {
    double round_trip = 0;  // s
    double fsr_hz = 0;      // cyclic Hz
};

// Round trip 2L/v_g of the waveguide and the resulting comb spacing.
CombGeometry comb_from_geometry(const WaveguideGeometry& geometry);

// Cavity-comb coupling rate from the cavity decay time, amplitude
// convention: |b| ~ exp(-t/t_c) gives rate 1/t_c (rad/s).
double coupling_rate_from_decay_time(double t_c);
double decay_time_from_coupling_rate(double rate);

// Per-mode coupling gamma_e of an equally coupled comb that makes the cavity
// amplitude decay into the quasi-continuum with time constant t_c:
// golden rule, 1/t_c = gamma_e^2 / (2 fsr_hz).
double comb_coupling_for_decay(double fsr_hz, double t_c);

// The measured device: 1541 nm cavity (kappa_e/kappa_i = 2pi x 364/657 MHz),
// 5 GHz mechanical mode (g0 = 2pi x 460 kHz, T1 = 78 us), 20-mode waveguide
// comb with the spacing calibrated so the second cavity-population revival
// sits at the 170 ns read delay, the calibrated detection chain
// (eta_det = 3.8%, 1e-5 darks/trial, 100 ns dead time), and the two-branch
// absorption-heating fits.
Device reference_device();

// Pulse timing of the standard experiment: 40 ns pulses, write at 100 ns,
// read 170 ns later, 45 ns early-late splitting, 5 kHz repetition,
// p_write = p_read = 1.4%.
PulseSequence reference_sequence(PulseScheme scheme);

}  // namespace pwg::calib
