#include "pwg/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "pwg/units.hpp"

namespace pwg::calib {

double eta_det(const DetectionChain& chain) {
    chain.validate();
    if (chain.eta_det_override > 0) return chain.eta_det_override;
    return chain.eta_c * chain.eta_dev * chain.eta_f * chain.eta_snspd *
           chain.eta_loss;
}

ScatteringProbabilities scattering_probability(const OpticalCavity& optics,
                                               const MechanicalMode& mech,
                                               double pulse_energy) {
    optics.validate();
    mech.validate();
    if (pulse_energy <= 0)
        throw std::invalid_argument("pulse energy must be positive");
    const double half_kappa = 0.5 * optics.kappa_t();
    const double x = 4.0 * optics.eta_dev() * mech.g0 * mech.g0 * pulse_energy /
                     (units::hbar * optics.omega_c *
                      (mech.omega_m * mech.omega_m + half_kappa * half_kappa));
    ScatteringProbabilities p;
    p.exponent = x;
    p.p_read = 1.0 - std::exp(-x);
    p.p_write = std::exp(x) - 1.0;
    p.saturated = p.p_write > 0.3;
    return p;
}

ClickRates click_rates(double p_read, double p_write, double n_th, double eta) {
    if (p_read < 0 || p_read > 1 || p_write < 0)
        throw std::invalid_argument("scattering probabilities out of range");
    if (n_th < 0) throw std::invalid_argument("occupancy must be non-negative");
    if (eta < 0 || eta > 1) throw std::invalid_argument("efficiency out of range");
    return {p_read * n_th * eta, p_write * (1.0 + n_th) * eta};
}

double n_th_from_asymmetry(double gamma_r, double gamma_b) {
    if (gamma_r < 0 || gamma_b < 0)
        throw std::invalid_argument("click rates must be non-negative");
    if (gamma_b <= gamma_r)
        throw std::invalid_argument(
            "unphysical asymmetry: Stokes rate must exceed anti-Stokes rate");
    return gamma_r / (gamma_b - gamma_r);
}

CombGeometry comb_from_geometry(const WaveguideGeometry& geometry) {
    geometry.validate();
    const double round_trip = 2.0 * geometry.length / geometry.group_velocity;
    return {round_trip, 1.0 / round_trip};
}

double coupling_rate_from_decay_time(double t_c) {
    if (t_c <= 0) throw std::invalid_argument("decay time must be positive");
    return 1.0 / t_c;
}

double decay_time_from_coupling_rate(double rate) {
    if (rate <= 0) throw std::invalid_argument("coupling rate must be positive");
    return 1.0 / rate;
}

double comb_coupling_for_decay(double fsr_hz, double t_c) {
    if (fsr_hz <= 0) throw std::invalid_argument("comb spacing must be positive");
    if (t_c <= 0) throw std::invalid_argument("decay time must be positive");
    return std::sqrt(2.0 * fsr_hz / t_c);
}

Device reference_device() {
    constexpr double two_pi = 6.283185307179586476925287;
    constexpr double c_light = 299792458.0;
    Device d;
    d.optics.omega_c = two_pi * c_light / 1541e-9;
    d.optics.kappa_e = two_pi * 364e6;
    d.optics.kappa_i = two_pi * 657e6;
    d.mech.omega_m = two_pi * 4.98e9;
    d.mech.gamma_m = 1.0 / 78e-6;
    d.mech.g0 = two_pi * 460e3;
    const double fsr_hz = 13.75e6;  // second revival at the 170 ns read delay
    const double t_c = 10e-9;       // cavity decay time into the waveguide
    d.comb = uniform_comb(d.mech.omega_m + two_pi * fsr_hz / 2.0, fsr_hz, 20,
                          comb_coupling_for_decay(fsr_hz, t_c), two_pi * 10e3);
    d.geometry.length = 92e-6;
    d.geometry.group_velocity = 2530.0;
    d.chain.eta_c = 0.37;
    d.chain.eta_dev = 0.357;
    d.chain.eta_f = 0.38;
    d.chain.eta_snspd = 0.90;
    d.chain.eta_loss = 0.80;
    d.chain.eta_det_override = 0.038;
    d.chain.dark_rate_per_trial = 1e-5;
    d.chain.dead_time = 100e-9;
    d.chain.n_detectors = 2;
    d.heating.base_intercept = 0.070;
    d.heating.base_slope = 5.29;
    d.heating.preceded_intercept = 0.216;
    d.heating.preceded_slope = 5.21;
    d.heating.t_rise = 1e-6;
    d.heating.t1 = 78e-6;
    return d;
}

PulseSequence reference_sequence(PulseScheme scheme) {
    PulseSequence seq;
    seq.scheme = scheme;
    seq.p_write = 0.014;
    seq.p_read = 0.014;
    seq.pulse_fwhm = 40e-9;
    seq.tau = 170e-9;
    seq.delta_tau = 45e-9;
    seq.repetition_period = 200e-6;
    seq.write_center = 100e-9;
    return seq;
}

}  // namespace pwg::calib
