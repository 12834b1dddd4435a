#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "pwg/device.hpp"
#include "pwg/exec.hpp"
#include "pwg/omit.hpp"

namespace pwg::dyn {

using Complex = std::complex<double>;

// Amplitudes of the cavity mechanical mode (b) and the waveguide comb (c).
struct ModeState {
  Complex b{0.0, 0.0};
  std::vector<Complex> c;
};

struct TimeTrace {
  std::vector<double> times;  // s, strictly increasing
  std::vector<ModeState> states;
};

struct CorrelationTrace {
  std::vector<double> taus;  // s
  std::vector<Complex> g1;
  std::vector<double> g2;  // 1 + |g1|^2 elementwise
};

// Exact propagator of the linear coupled-mode system
//   db/dt  = -i w_m b - (Gm/2) b - i sum_l ge_l c_l
//   dc_l/dt = -i w_l c_l - i ge_l b - (Gl/2) c_l
// via eigen-decomposition of the (N+1)x(N+1) non-Hermitian generator:
// z(t) = V exp(-i Lambda t) V^-1 z(0). Unconditionally stable, no step-size
// tuning; a fine-step integrator exists only as a test oracle.
class Evolver {
 public:
  Evolver(const MechanicalMode& mech, const ModeComb& comb);

  size_t dim() const { return static_cast<size_t>(lambda_.size()); }
  ModeState propagate(const ModeState& initial, double t) const;
  Eigen::VectorXcd propagate_vec(const Eigen::VectorXcd& z0, double t) const;

  // Amplitude remaining in the cavity mode at time t from b(0)=1, c(0)=0.
  Complex kernel(double t) const;

  const Eigen::VectorXcd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXcd& eigenvectors() const { return v_; }
  const Eigen::MatrixXcd& eigenvectors_inverse() const { return vinv_; }
  // Per-eigenmode weights of the cavity kernel: K(t) = sum_j w_j e^{-i l_j t}.
  const Eigen::VectorXcd& kernel_weights() const { return kernel_weights_; }

 private:
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd v_, vinv_;
  Eigen::VectorXcd kernel_weights_;  // V[0,j] * Vinv[j,0]
};

// Evolution sampled on t_grid (seconds, increasing, starting at 0).
TimeTrace evolve(const ModeState& initial, const MechanicalMode& mech,
                 const ModeComb& comb, const std::vector<double>& t_grid);

// (t, |b|^2) pairs from a trace.
std::vector<std::pair<double, double>> cavity_population(const TimeTrace& trace);

// Round-trip time implied by the comb's median spacing; falls back to decay
// scales for degenerate combs. Used for default horizons.
double round_trip_time(const MechanicalMode& mech, const ModeComb& comb);

// Stationary first-order coherence of the thermally occupied coupled system,
//   g1(tau) = int K*(t) K(t+tau) dt / int |K(t)|^2 dt,
// with K the cavity kernel and the integral over a fixed horizon (default
// 10 round trips); g2 = 1 + |g1|^2 (Siegert). Trapezoidal quadrature with a
// fixed reduction order; tau points evaluate independently, so the parallel
// path is bit-identical to the serial one. Negative tau values use
// g1(-tau) = conj(g1(tau)) (stationarity).
// Throws std::invalid_argument if |tau| exceeds the horizon.
CorrelationTrace correlations(const MechanicalMode& mech, const ModeComb& comb,
                              const std::vector<double>& tau_grid,
                              double horizon = 0.0, Exec exec = Exec::parallel);
CorrelationTrace correlations_serial(const MechanicalMode& mech,
                                     const ModeComb& comb,
                                     const std::vector<double>& tau_grid,
                                     double horizon = 0.0);

// Pipeline composition: extract a comb from a transparency spectrum, then
// compute its correlation trace. The extracted comb is returned for
// inspection alongside any extraction warnings.
struct OmitSimulation {
  CorrelationTrace trace;
  ModeComb comb;
  std::vector<std::string> warnings;
};
OmitSimulation simulate_from_omit(const omit::Spectrum& spectrum,
                                  const MechanicalMode& mech,
                                  const omit::PeakExtractionConfig& config,
                                  const std::vector<double>& tau_grid,
                                  double horizon = 0.0,
                                  Exec exec = Exec::parallel);

// Cavity population convolved with a single-pole low-pass of the given
// bandwidth (rad/s): models CW red-detuned readout of a coherently excited
// packet. Infinite bandwidth reproduces the population trace exactly.
std::vector<std::pair<double, double>> coherent_readout_trace(
    const ModeState& initial, const MechanicalMode& mech, const ModeComb& comb,
    double readout_bandwidth, const std::vector<double>& t_grid);

}  // namespace pwg::dyn
