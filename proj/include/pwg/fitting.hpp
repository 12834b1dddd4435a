#pragma once
#include <Eigen/Dense>
#include <functional>
#include <vector>

// Small least-squares toolbox: closed-form weighted line fits and a dense
// Levenberg-Marquardt with numeric Jacobians for the few nonlinear models
// used here (double exponential lifetime, Lorentzian peaks).
namespace pwg::fit {

struct LineFit {
    double slope = 0, intercept = 0;
    double slope_err = 0, intercept_err = 0;
    double chi2 = 0;
    int dof = 0;
};

// Weighted least-squares straight line. When `sigma` is empty the fit is
// unweighted and parameter errors are scaled by the residual variance.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& sigma = {});

// Residuals r(p); the minimizer drives sum r^2 to a local minimum.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmResult {
    Eigen::VectorXd params;
    Eigen::VectorXd errors;  // 1 sigma, from (J^T J)^-1 scaled by residual variance
    double chi2 = 0;
    int iterations = 0;
    bool converged = false;
};

LmResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd init,
                             int max_iterations = 200, double tolerance = 1e-12);

struct DoubleExpFit {
    double amplitude = 0, t_rise = 0, t_fall = 0;
    double amplitude_err = 0, t_rise_err = 0, t_fall_err = 0;
    double chi2 = 0;
    bool converged = false;
};

// Fits y(t) = A (1 - exp(-t/t_rise)) exp(-t/t_fall) with t_rise < t_fall.
// Times in seconds; y dimensionless (occupancy).
DoubleExpFit fit_double_exponential(const std::vector<double>& t,
                                    const std::vector<double>& y);

struct LorentzianFit {
    double center = 0, fwhm = 0, amplitude = 0, offset = 0;
    double chi2 = 0;
    bool converged = false;
};

// Fits y(x) = offset + amplitude / (1 + (2 (x - center) / fwhm)^2).
LorentzianFit fit_lorentzian(const std::vector<double>& x,
                             const std::vector<double>& y, double center_init,
                             double fwhm_init);

}  // namespace pwg::fit
