#pragma once
#include <cstdint>
#include <string>
#include <vector>

// Device description for an optomechanical crystal cavity coupled through a
// phononic-crystal waveguide terminated by a mirror, read out by SNSPDs.
// Every rate and frequency below is angular (rad/s); times are seconds.
namespace pwg {

struct OpticalCavity {
    double omega_c = 0;   // optical resonance
    double kappa_e = 0;   // extrinsic (waveguide-coupled) linewidth
    double kappa_i = 0;   // intrinsic linewidth

    double kappa_t() const { return kappa_e + kappa_i; }
    // Fraction of cavity photons leaving through the coupler.
    double eta_dev() const { return kappa_e / kappa_t(); }
    void validate() const;
};

struct MechanicalMode {
    double omega_m = 0;   // mechanical resonance
    double gamma_m = 0;   // intrinsic energy decay rate
    double g0 = 0;        // vacuum optomechanical coupling
    void validate() const;
};

// One propagating waveguide resonance. gamma_e couples it to the cavity
// mechanical mode; gamma is its own energy decay rate.
struct WaveguideMode {
    double omega = 0;
    double gamma_e = 0;
    double gamma = 0;
};

struct ModeComb {
    std::vector<WaveguideMode> modes;  // strictly ascending in omega

    size_t size() const { return modes.size(); }
    void validate() const;
};

// Equally spaced comb with identical couplings, centered at `center`.
ModeComb uniform_comb(double center, double fsr_hz, int n_modes, double gamma_e,
                      double gamma);

struct WaveguideGeometry {
    double length = 0;          // m
    double group_velocity = 0;  // m/s
    void validate() const;
};

struct DetectionChain {
    double eta_c = 0;      // fiber-chip coupling
    double eta_dev = 0;    // cavity extraction, kappa_e/kappa_t
    double eta_f = 0;      // filter transmission
    double eta_snspd = 0;  // detector quantum efficiency
    double eta_loss = 0;   // residual optical path loss
    // When positive, replaces the product of the factors above (an
    // end-to-end calibrated value).
    double eta_det_override = 0;
    double dark_rate_per_trial = 0;  // expected dark counts per trial, all detectors
    double dead_time = 0;            // s, per detector
    int n_detectors = 2;
    void validate() const;
};

// Absorption-induced heating of the mechanical mode: two linear laws in the
// scattering probability of a pulse (occupancy measured during the pulse
// itself vs. during a pulse preceded by an earlier one), plus the slow
// rise/decay envelope of the hot-bath occupancy after a pulse.
struct HeatingModel {
    double base_intercept = 0;
    double base_slope = 0;
    double preceded_intercept = 0;
    double preceded_slope = 0;
    double t_rise = 0;  // s
    double t1 = 0;      // s, phonon lifetime

    double instantaneous(double p_scatter) const {
        return base_intercept + base_slope * p_scatter;
    }
    double preceded(double p_scatter) const {
        return preceded_intercept + preceded_slope * p_scatter;
    }
    // Occupancy envelope a time t after an absorbing pulse, normalized to
    // amplitude 1.
    double envelope(double t) const;
    void validate() const;
};

enum class PulseScheme : uint8_t { single_write_read, double_write_read };

struct PulseSequence {
    PulseScheme scheme = PulseScheme::single_write_read;
    double p_write = 0;            // Stokes scattering probability per write pulse
    double p_read = 0;             // anti-Stokes scattering probability per read pulse
    double pulse_fwhm = 0;         // s, optical pulse envelope FWHM
    double tau = 0;                // s, write-to-read separation
    double delta_tau = 0;          // s, early-to-late separation (double scheme)
    double repetition_period = 0;  // s
    double write_center = 0;       // s, center of the (early) write pulse in the trial
    void validate() const;
};

struct Device {
    OpticalCavity optics;
    MechanicalMode mech;
    ModeComb comb;
    WaveguideGeometry geometry;
    DetectionChain chain;
    HeatingModel heating;
    void validate() const;
};

}  // namespace pwg
