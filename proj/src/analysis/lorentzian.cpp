#include "phc/analysis.hpp"
#include "phc/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phc
{
namespace
{
// Parameters are scaled: x = ((l0 - c) / s, G / s, A / h, B / h).
struct LorentzResidual
{
    const std::vector<double> *lambda;
    const std::vector<double> *value;
    double centre;
    double width_scale;
    double height_scale;

    int inputs() const { return 4; }
    int values() const { return static_cast<int>(lambda->size()); }

    int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &f) const
    {
        const double l0 = centre + x[0] * width_scale;
        const double g = x[1] * width_scale;
        const double hg2 = 0.25 * g * g;
        for (int i = 0; i < values(); ++i)
        {
            const double d = (*lambda)[i] - l0;
            const double model = x[2] * hg2 / (d * d + hg2) + x[3];
            f[i] = model - (*value)[i] / height_scale;
        }
        return 0;
    }

    int df(const Eigen::VectorXd &x, Eigen::MatrixXd &J) const
    {
        const double l0 = centre + x[0] * width_scale;
        const double g = x[1] * width_scale;
        const double hg2 = 0.25 * g * g;
        for (int i = 0; i < values(); ++i)
        {
            const double d = (*lambda)[i] - l0;
            const double den = d * d + hg2;
            const double shape = hg2 / den;
            // d shape / d l0 and d shape / d g
            const double ds_dl0 = hg2 * 2.0 * d / (den * den);
            const double ds_dg = (0.5 * g * den - hg2 * 0.5 * g) / (den * den);
            J(i, 0) = x[2] * ds_dl0 * width_scale;
            J(i, 1) = x[2] * ds_dg * width_scale;
            J(i, 2) = shape;
            J(i, 3) = 1.0;
        }
        return 0;
    }
};

} // namespace

LorentzianFit lorentzian_fit(const Spectrum &spectrum, double guess_nm, const FitOptions &options)
{
    spectrum.validate();
    const auto &lam = spectrum.wavelength_nm;
    const auto &val = spectrum.amplitude;
    if (lam.size() < 5)
    {
        throw FitError("too few spectrum samples for a Lorentzian fit", {});
    }
    if (guess_nm < lam.front() || guess_nm > lam.back())
    {
        throw FitError("peak guess lies outside the spectrum", {});
    }
    // Climb from the guess to the nearest local maximum.
    std::size_t p = static_cast<std::size_t>(std::lower_bound(lam.begin(), lam.end(), guess_nm) - lam.begin());
    p = std::min(p, lam.size() - 1);
    while (p + 1 < val.size() && val[p + 1] > val[p])
    {
        ++p;
    }
    while (p > 0 && val[p - 1] > val[p])
    {
        --p;
    }
    const double lo = *std::min_element(val.begin(), val.end());
    const double hi = *std::max_element(val.begin(), val.end());
    const double height = val[p] - lo;
    if (!(height > 1e-12 * std::max(std::abs(hi), std::abs(lo))) || hi == lo)
    {
        throw FitError("no peak in the spectrum", {});
    }
    const double half_level = lo + 0.5 * height;
    std::size_t left = p;
    while (left > 0 && val[left] > half_level)
    {
        --left;
    }
    std::size_t right = p;
    while (right + 1 < val.size() && val[right] > half_level)
    {
        ++right;
    }
    const double min_step = (lam.back() - lam.front()) / static_cast<double>(lam.size() - 1);
    const double width0 = std::max(lam[right] - lam[left], 2.0 * min_step);

    std::vector<double> x_data;
    std::vector<double> y_data;
    for (std::size_t i = 0; i < lam.size(); ++i)
    {
        if (options.window_fwhm > 0.0 && std::abs(lam[i] - lam[p]) > options.window_fwhm * width0)
        {
            continue;
        }
        x_data.push_back(lam[i]);
        y_data.push_back(val[i]);
    }
    if (x_data.size() < 5)
    {
        throw FitError("too few samples inside the fit window", {});
    }

    const double scale = std::max(std::abs(hi), std::abs(lo));
    LorentzResidual functor{&x_data, &y_data, lam[p], width0, scale};
    Eigen::VectorXd x(4);
    x << 0.0, 1.0, height / scale, lo / scale;
    Eigen::LevenbergMarquardt<LorentzResidual> lm(functor);
    lm.parameters.maxfev = options.max_iterations * 10;
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    std::vector<double> history;
    auto status = lm.minimizeInit(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
    {
        throw FitError("invalid Lorentzian fit setup", history);
    }
    int iterations = 0;
    do
    {
        status = lm.minimizeOneStep(x);
        history.push_back(lm.fvec.norm() * scale);
        ++iterations;
    } while (status == Eigen::LevenbergMarquardtSpace::Running && iterations < options.max_iterations);

    const bool converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                           status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
    LorentzianFit fit;
    fit.lambda0_nm = lam[p] + x[0] * width0;
    fit.fwhm_nm = std::abs(x[1]) * width0;
    fit.peak = x[2] * scale;
    fit.background = x[3] * scale;
    fit.residual_norm = history.empty() ? 0.0 : history.back();
    fit.iterations = iterations;
    if (!converged)
    {
        std::ostringstream os;
        os << "Lorentzian fit did not converge after " << iterations << " iterations (status "
           << static_cast<int>(status) << ")";
        throw FitError(os.str(), history);
    }
    if (!(fit.peak > 0.0) || !(fit.fwhm_nm > 0.0) || fit.lambda0_nm < lam.front() || fit.lambda0_nm > lam.back() ||
        fit.fwhm_nm > lam.back() - lam.front())
    {
        throw FitError("Lorentzian fit converged to a non-peak", history);
    }
    fit.Q = fit.lambda0_nm / fit.fwhm_nm;
    return fit;
}

} // namespace phc
