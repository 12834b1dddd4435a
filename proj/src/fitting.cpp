#include "pwg/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pwg::fit {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& sigma) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("line fit needs at least two (x, y) points");
    const bool weighted = !sigma.empty();
    if (weighted && sigma.size() != x.size())
        throw std::invalid_argument("sigma length mismatch");

    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double w = 1.0;
        if (weighted) {
            if (sigma[i] <= 0) throw std::invalid_argument("sigma must be positive");
            w = 1.0 / (sigma[i] * sigma[i]);
        }
        s += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = s * sxx - sx * sx;
    if (det <= 0) throw std::invalid_argument("degenerate abscissas in line fit");

    LineFit f;
    f.slope = (s * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.dof = static_cast<int>(x.size()) - 2;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
        f.chi2 += w * r * r;
    }
    double var_slope = s / det;
    double var_intercept = sxx / det;
    if (!weighted && f.dof > 0) {
        // Unweighted: estimate the common point variance from the residuals.
        const double s2 = f.chi2 / f.dof;
        var_slope *= s2;
        var_intercept *= s2;
    }
    f.slope_err = std::sqrt(var_slope);
    f.intercept_err = std::sqrt(var_intercept);
    return f;
}

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residuals,
                                 const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& r0) {
    Eigen::MatrixXd j(r0.size(), p.size());
    for (int k = 0; k < p.size(); ++k) {
        const double step = 1e-7 * std::max(1.0, std::abs(p[k]));
        Eigen::VectorXd q = p;
        q[k] += step;
        j.col(k) = (residuals(q) - r0) / step;
    }
    return j;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, Eigen::VectorXd init,
                             int max_iterations, double tolerance) {
    LmResult out;
    Eigen::VectorXd p = std::move(init);
    Eigen::VectorXd r = residuals(p);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;

    for (int it = 0; it < max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::MatrixXd j = numeric_jacobian(residuals, p, r);
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < tolerance) {
            out.converged = true;
            break;
        }
        bool stepped = false;
        for (int damp = 0; damp < 30; ++damp) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd delta = a.ldlt().solve(-g);
            const Eigen::VectorXd q = p + delta;
            const Eigen::VectorXd rq = residuals(q);
            const double chi2q = rq.squaredNorm();
            if (std::isfinite(chi2q) && chi2q <= chi2) {
                const double gain = chi2 - chi2q;
                p = q;
                r = rq;
                chi2 = chi2q;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (gain < tolerance * (1.0 + chi2)) out.converged = true;
                break;
            }
            lambda *= 8.0;
        }
        if (!stepped || out.converged) {
            out.converged = out.converged || !stepped;
            break;
        }
    }

    out.params = p;
    out.chi2 = chi2;
    // 1 sigma errors from the local quadratic model, residual-variance scaled.
    const Eigen::MatrixXd j = numeric_jacobian(residuals, p, r);
    Eigen::MatrixXd jtj = j.transpose() * j;
    jtj.diagonal() += Eigen::VectorXd::Constant(p.size(), 1e-300);
    const int dof = std::max<int>(1, static_cast<int>(r.size()) - static_cast<int>(p.size()));
    const Eigen::MatrixXd cov = jtj.inverse() * (chi2 / dof);
    out.errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

DoubleExpFit fit_double_exponential(const std::vector<double>& t,
                                    const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 4)
        throw std::invalid_argument("double exponential fit needs >= 4 points");

    // Initial guesses: peak location fixes the rise scale, the tail the decay.
    const auto peak = std::max_element(y.begin(), y.end());
    const double t_peak = t[static_cast<size_t>(peak - y.begin())];
    double rise0 = std::max(t_peak / 3.0, 1e-9);
    double fall0 = std::max(t.back() / 2.0, 10 * rise0);
    double amp0 = std::max(*peak, 1e-12);

    // Work in log parameters to keep all three positive.
    auto model = [&](const Eigen::VectorXd& lp, double tt) {
        const double a = std::exp(lp[0]), tr = std::exp(lp[1]), tf = std::exp(lp[2]);
        return a * (1.0 - std::exp(-tt / tr)) * std::exp(-tt / tf);
    };
    ResidualFn residuals = [&](const Eigen::VectorXd& lp) {
        Eigen::VectorXd r(t.size());
        for (size_t i = 0; i < t.size(); ++i)
            r[i] = model(lp, t[i]) - y[i];
        return r;
    };
    Eigen::Vector3d init(std::log(amp0), std::log(rise0), std::log(fall0));
    const LmResult lm = levenberg_marquardt(residuals, init);

    DoubleExpFit f;
    f.amplitude = std::exp(lm.params[0]);
    f.t_rise = std::exp(lm.params[1]);
    f.t_fall = std::exp(lm.params[2]);
    f.amplitude_err = f.amplitude * lm.errors[0];
    f.t_rise_err = f.t_rise * lm.errors[1];
    f.t_fall_err = f.t_fall * lm.errors[2];
    f.chi2 = lm.chi2;
    f.converged = lm.converged;
    if (f.t_rise > f.t_fall)
        throw std::runtime_error("double exponential fit found rise slower than decay");
    return f;
}

LorentzianFit fit_lorentzian(const std::vector<double>& x,
                             const std::vector<double>& y, double center_init,
                             double fwhm_init) {
    if (x.size() != y.size() || x.size() < 5)
        throw std::invalid_argument("lorentzian fit needs >= 5 points");
    if (fwhm_init <= 0) throw std::invalid_argument("initial width must be positive");

    const double offset0 = *std::min_element(y.begin(), y.end());
    const double amp0 =
        std::max(*std::max_element(y.begin(), y.end()) - offset0, 1e-12);

    // Parameters: offset, amplitude, center, log-width.
    auto model = [&](const Eigen::VectorXd& p, double xx) {
        const double w = std::exp(p[3]);
        const double u = 2.0 * (xx - p[2]) / w;
        return p[0] + p[1] / (1.0 + u * u);
    };
    ResidualFn residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(x.size());
        for (size_t i = 0; i < x.size(); ++i)
            r[i] = model(p, x[i]) - y[i];
        return r;
    };
    Eigen::Vector4d init(offset0, amp0, center_init, std::log(fwhm_init));
    const LmResult lm = levenberg_marquardt(residuals, init);

    LorentzianFit f;
    f.offset = lm.params[0];
    f.amplitude = lm.params[1];
    f.center = lm.params[2];
    f.fwhm = std::exp(lm.params[3]);
    f.chi2 = lm.chi2;
    f.converged = lm.converged;
    return f;
}

}  // namespace pwg::fit
