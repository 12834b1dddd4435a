#include "pwg/device.hpp"

#include <cmath>
#include <stdexcept>

#include "pwg/units.hpp"

namespace pwg {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_fraction(double x, const std::string& name) {
    require(x >= 0 && x <= 1, name + " must lie in [0, 1]");
}

}  // namespace

void OpticalCavity::validate() const {
    require(omega_c > 0, "optical cavity frequency must be positive");
    require(kappa_e > 0, "extrinsic linewidth must be positive");
    require(kappa_i >= 0, "intrinsic linewidth must be non-negative");
}

void MechanicalMode::validate() const {
    require(omega_m > 0, "mechanical frequency must be positive");
    require(gamma_m >= 0, "mechanical decay rate must be non-negative");
    require(g0 >= 0, "optomechanical coupling must be non-negative");
}

void ModeComb::validate() const {
    for (size_t i = 0; i < modes.size(); ++i) {
        require(modes[i].omega > 0, "waveguide mode frequency must be positive");
        require(modes[i].gamma_e >= 0, "waveguide mode coupling must be non-negative");
        require(modes[i].gamma >= 0, "waveguide mode decay must be non-negative");
        if (i > 0)
            require(modes[i].omega > modes[i - 1].omega,
                    "waveguide modes must be strictly ascending in frequency");
    }
}

ModeComb uniform_comb(double center, double fsr_hz, int n_modes, double gamma_e,
                      double gamma) {
    if (n_modes < 1) throw std::invalid_argument("comb needs at least one mode");
    if (fsr_hz <= 0 && n_modes > 1)
        throw std::invalid_argument("comb spacing must be positive");
    ModeComb comb;
    comb.modes.reserve(n_modes);
    const double spacing = units::two_pi * fsr_hz;
    const double first = center - 0.5 * (n_modes - 1) * spacing;
    for (int i = 0; i < n_modes; ++i)
        comb.modes.push_back({first + i * spacing, gamma_e, gamma});
    comb.validate();
    return comb;
}

void WaveguideGeometry::validate() const {
    require(length > 0, "waveguide length must be positive");
    require(group_velocity > 0, "group velocity must be positive");
}

void DetectionChain::validate() const {
    require_fraction(eta_c, "eta_c");
    require_fraction(eta_dev, "eta_dev");
    require_fraction(eta_f, "eta_f");
    require_fraction(eta_snspd, "eta_snspd");
    require_fraction(eta_loss, "eta_loss");
    require_fraction(eta_det_override, "eta_det_override");
    require(dark_rate_per_trial >= 0, "dark rate must be non-negative");
    require(dead_time >= 0, "dead time must be non-negative");
    require(n_detectors >= 1, "need at least one detector");
}

double HeatingModel::envelope(double t) const {
    if (t <= 0) return 0;
    return (1.0 - std::exp(-t / t_rise)) * std::exp(-t / t1);
}

void HeatingModel::validate() const {
    require(base_intercept >= 0 && preceded_intercept >= 0,
            "heating intercepts must be non-negative");
    require(base_slope >= 0 && preceded_slope >= 0,
            "heating slopes must be non-negative");
    require(t_rise > 0 && t1 > 0, "heating time constants must be positive");
}

void PulseSequence::validate() const {
    require_fraction(p_write, "p_write");
    require_fraction(p_read, "p_read");
    require(pulse_fwhm > 0, "pulse width must be positive");
    require(tau > 0, "write-read separation must be positive");
    require(repetition_period > tau + write_center,
            "repetition period must cover the pulse sequence");
    if (scheme == PulseScheme::double_write_read)
        require(delta_tau > 0, "early-late separation must be positive");
}

void Device::validate() const {
    optics.validate();
    mech.validate();
    comb.validate();
    geometry.validate();
    chain.validate();
    heating.validate();
}

}  // namespace pwg
