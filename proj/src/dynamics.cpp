#include "pwg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pwg::dyn {

namespace {
constexpr Complex kMinusI{0.0, -1.0};

Eigen::MatrixXcd generator(const MechanicalMode& mech, const ModeComb& comb) {
  const int n = static_cast<int>(comb.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  h(0, 0) = Complex{mech.omega_m, -mech.gamma_m / 2.0};
  for (int l = 0; l < n; ++l) {
    const auto& m = comb.modes[l];
    h(l + 1, l + 1) = Complex{m.omega, -m.gamma / 2.0};
    h(0, l + 1) = m.gamma_e;
    h(l + 1, 0) = m.gamma_e;
  }
  return h;
}
}  // namespace

Evolver::Evolver(const MechanicalMode& mech, const ModeComb& comb) {
  comb.validate();
  Eigen::MatrixXcd h = generator(mech, comb);
  if (comb.size() == 0) {
    lambda_ = Eigen::VectorXcd::Constant(1, h(0, 0));
    v_ = Eigen::MatrixXcd::Identity(1, 1);
    vinv_ = v_;
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("mode-system eigendecomposition failed");
    lambda_ = solver.eigenvalues();
    v_ = solver.eigenvectors();
    vinv_ = v_.inverse();
  }
  kernel_weights_.resize(lambda_.size());
  for (Eigen::Index j = 0; j < lambda_.size(); ++j)
    kernel_weights_(j) = v_(0, j) * vinv_(j, 0);
}

Eigen::VectorXcd Evolver::propagate_vec(const Eigen::VectorXcd& z0,
                                        double t) const {
  Eigen::VectorXcd y = vinv_ * z0;
  for (Eigen::Index j = 0; j < y.size(); ++j)
    y(j) *= std::exp(kMinusI * lambda_(j) * t);
  return v_ * y;
}

ModeState Evolver::propagate(const ModeState& initial, double t) const {
  if (initial.c.size() + 1 != dim())
    throw std::invalid_argument("state size does not match comb size");
  Eigen::VectorXcd z0(dim());
  z0(0) = initial.b;
  for (size_t l = 0; l < initial.c.size(); ++l) z0(l + 1) = initial.c[l];
  Eigen::VectorXcd z = propagate_vec(z0, t);
  ModeState out;
  out.b = z(0);
  out.c.resize(initial.c.size());
  for (size_t l = 0; l < out.c.size(); ++l) out.c[l] = z(l + 1);
  return out;
}

Complex Evolver::kernel(double t) const {
  Complex acc{0.0, 0.0};
  for (Eigen::Index j = 0; j < lambda_.size(); ++j)
    acc += kernel_weights_(j) * std::exp(kMinusI * lambda_(j) * t);
  return acc;
}

TimeTrace evolve(const ModeState& initial, const MechanicalMode& mech,
                 const ModeComb& comb, const std::vector<double>& t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw std::invalid_argument("time grid must start at 0");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1])
      throw std::invalid_argument("time grid must be increasing");
  Evolver evolver(mech, comb);
  TimeTrace trace;
  trace.times = t_grid;
  trace.states.reserve(t_grid.size());
  for (double t : t_grid) trace.states.push_back(evolver.propagate(initial, t));
  return trace;
}

std::vector<std::pair<double, double>> cavity_population(
    const TimeTrace& trace) {
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.times.size());
  for (size_t i = 0; i < trace.times.size(); ++i)
    out.emplace_back(trace.times[i], std::norm(trace.states[i].b));
  return out;
}

double round_trip_time(const MechanicalMode& mech, const ModeComb& comb) {
  if (comb.size() >= 2) {
    std::vector<double> gaps;
    for (size_t l = 1; l < comb.size(); ++l)
      gaps.push_back(comb.modes[l].omega - comb.modes[l - 1].omega);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    double median_gap = gaps[gaps.size() / 2];
    return 2.0 * M_PI / median_gap;  // 1/FSR
  }
  double gamma = mech.gamma_m;
  if (comb.size() == 1) gamma = std::max(gamma, comb.modes[0].gamma);
  if (gamma > 0) return 5.0 / gamma;
  return 1e-7;
}

namespace {

CorrelationTrace correlations_impl(const MechanicalMode& mech,
                                   const ModeComb& comb,
                                   const std::vector<double>& tau_grid,
                                   double horizon, bool parallel) {
  if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
  if (horizon <= 0.0) horizon = 10.0 * round_trip_time(mech, comb);
  double tau_max = 0.0;
  for (double tau : tau_grid) tau_max = std::max(tau_max, std::abs(tau));
  if (tau_max > horizon)
    throw std::invalid_argument("tau exceeds integration horizon");

  Evolver evolver(mech, comb);
  const auto& lambda = evolver.eigenvalues();
  const Eigen::Index m = lambda.size();

  // Quadrature grid: fine enough to resolve the fastest eigenvalue
  // difference (the integrand oscillates only at difference frequencies).
  double spread = 0.0;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k)
      spread = std::max(spread, std::abs(lambda(j).real() - lambda(k).real()));
  double dt = spread > 0 ? (2.0 * M_PI / spread) / 16.0 : horizon / 4096.0;
  int n_t = std::max(64, static_cast<int>(std::ceil(horizon / dt)) + 1);
  if (n_t > 2000000) throw std::invalid_argument("correlation grid too fine");
  dt = horizon / (n_t - 1);

  // K(t_i) decomposed per eigenmode: K_j(t_i) = w_j exp(-i lambda_j t_i), so
  // K(t_i + tau) = sum_j K_j(t_i) exp(-i lambda_j tau).
  Eigen::MatrixXcd comp(m, n_t);
  for (int i = 0; i < n_t; ++i) {
    double t = dt * i;
    for (Eigen::Index j = 0; j < m; ++j)
      comp(j, i) = std::exp(kMinusI * lambda(j) * t);
  }
  const auto& w = evolver.kernel_weights();
  Eigen::VectorXcd k0 = comp.transpose() * w;  // K on the grid

  double denom = 0.0;
  for (int i = 0; i < n_t; ++i) {
    double weight = (i == 0 || i == n_t - 1) ? 0.5 : 1.0;
    denom += weight * std::norm(k0(i));
  }
  if (denom <= 0.0) throw std::runtime_error("vanishing kernel norm");

  CorrelationTrace out;
  out.taus = tau_grid;
  out.g1.resize(tau_grid.size());
  out.g2.resize(tau_grid.size());

  const int n_tau = static_cast<int>(tau_grid.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (int p = 0; p < n_tau; ++p) {
    const double tau = std::abs(tau_grid[p]);
    Eigen::VectorXcd shifted = w;
    for (Eigen::Index j = 0; j < m; ++j)
      shifted(j) *= std::exp(kMinusI * lambda(j) * tau);
    Complex num{0.0, 0.0};
    for (int i = 0; i < n_t; ++i) {
      Complex k_tau{0.0, 0.0};
      for (Eigen::Index j = 0; j < m; ++j) k_tau += shifted(j) * comp(j, i);
      double weight = (i == 0 || i == n_t - 1) ? 0.5 : 1.0;
      num += weight * std::conj(k0(i)) * k_tau;
    }
    Complex g1 = num / denom;
    if (tau_grid[p] < 0) g1 = std::conj(g1);
    out.g1[p] = g1;
    out.g2[p] = 1.0 + std::norm(g1);
  }
  return out;
}

}  // namespace

CorrelationTrace correlations(const MechanicalMode& mech, const ModeComb& comb,
                              const std::vector<double>& tau_grid,
                              double horizon, Exec exec) {
  return correlations_impl(mech, comb, tau_grid, horizon,
                           exec == Exec::parallel);
}

CorrelationTrace correlations_serial(const MechanicalMode& mech,
                                     const ModeComb& comb,
                                     const std::vector<double>& tau_grid,
                                     double horizon) {
  return correlations_impl(mech, comb, tau_grid, horizon, false);
}

OmitSimulation simulate_from_omit(const omit::Spectrum& spectrum,
                                  const MechanicalMode& mech,
                                  const omit::PeakExtractionConfig& config,
                                  const std::vector<double>& tau_grid,
                                  double horizon, Exec exec) {
  auto extraction = omit::extract_mode_comb(spectrum, config);
  OmitSimulation out;
  out.comb = extraction.comb;
  out.warnings = std::move(extraction.warnings);
  out.trace = correlations(mech, out.comb, tau_grid, horizon, exec);
  return out;
}

std::vector<std::pair<double, double>> coherent_readout_trace(
    const ModeState& initial, const MechanicalMode& mech, const ModeComb& comb,
    double readout_bandwidth, const std::vector<double>& t_grid) {
  if (readout_bandwidth <= 0)
    throw std::invalid_argument("readout bandwidth must be > 0");
  auto population = cavity_population(evolve(initial, mech, comb, t_grid));
  if (std::isinf(readout_bandwidth)) return population;
  // Exact one-pole response on a (possibly nonuniform) grid:
  // y' = B (p - y), stepped with the interval-exact decay factor.
  std::vector<std::pair<double, double>> out = population;
  double y = population.front().second;
  out.front().second = y;
  for (size_t i = 1; i < population.size(); ++i) {
    double dt = population[i].first - population[i - 1].first;
    double a = 1.0 - std::exp(-readout_bandwidth * dt);
    y += a * (population[i].second - y);
    out[i].second = y;
  }
  return out;
}

}  // namespace pwg::dyn
