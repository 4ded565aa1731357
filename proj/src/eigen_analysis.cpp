#include "grushin/eigen_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grushin/errors.hpp"

namespace grushin {

double carleman_exponent(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("carleman_exponent: gamma out of (0,1]");
    return gamma >= 0.5 ? 0.5 : 2.0 / 3.0;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double vxx = sxx - sx * sx / n;
    const double vxy = sxy - sx * sy / n;
    const double vyy = syy - sy * sy / n;
    if (vxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
    LineFit f;
    f.slope = vxy / vxx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
    return f;
}

ScalingFitReport lambda_sweep(double gamma, std::shared_ptr<const CoefficientField> coeff,
                              const SpectralBasisY& basis, const std::vector<int>& n_list,
                              std::shared_ptr<const Grid1D> grid) {
    if (n_list.empty()) throw std::invalid_argument("lambda_sweep: empty n_list");
    if (!std::is_sorted(n_list.begin(), n_list.end()))
        throw std::invalid_argument("lambda_sweep: n_list must be ascending");
    if (n_list.back() > basis.N_max)
        throw std::invalid_argument("lambda_sweep: n exceeds basis N_max");

    ScalingFitReport rep;
    rep.gamma = gamma;
    rep.n_list = n_list;
    rep.slope_theory = 1.0 / (1.0 + gamma);
    rep.p_gamma = carleman_exponent(gamma);

    // Ground-state length scale of the largest mode must be resolved.
    const double mu_max = basis.mu[n_list.back() - 1];
    const double ground_scale = std::pow(mu_max, 1.0 / (2.0 * (1.0 + gamma)));
    if (grid->h * ground_scale > 0.1) {
        std::ostringstream os;
        os << "lambda_sweep: grid too coarse to resolve the ground state of n = "
           << n_list.back() << " (h * mu^{1/(2(1+gamma))} = " << grid->h * ground_scale
           << " > 0.1)";
        throw NumericError(os.str());
    }

    rep.mu_list.reserve(n_list.size());
    rep.lambda_list.reserve(n_list.size());
    for (int n : n_list) {
        const double mu = basis.mu[n - 1];
        const ModeOperator op = assemble_operator(grid, gamma, mu, coeff);
        const ModeSpectrum sp = eigendecompose(op, 1);
        rep.mu_list.push_back(mu);
        rep.lambda_list.push_back(sp.eigenvalues[0]);
    }

    rep.c_star_lo = std::numeric_limits<double>::infinity();
    rep.c_star_hi = 0.0;
    for (std::size_t i = 0; i < rep.mu_list.size(); ++i) {
        const double ratio = rep.lambda_list[i] / std::pow(rep.mu_list[i], rep.slope_theory);
        rep.c_star_lo = std::min(rep.c_star_lo, ratio);
        rep.c_star_hi = std::max(rep.c_star_hi, ratio);
    }

    if (n_list.size() >= 2) {
        std::vector<double> lx(rep.mu_list.size()), ly(rep.mu_list.size());
        for (std::size_t i = 0; i < rep.mu_list.size(); ++i) {
            lx[i] = std::log(rep.mu_list[i]);
            ly[i] = std::log(rep.lambda_list[i]);
        }
        const LineFit f = fit_line(lx, ly);
        rep.slope = f.slope;
        rep.r_squared = f.r_squared;
        rep.fit_valid = true;
    } else {
        rep.slope = std::numeric_limits<double>::quiet_NaN();
        rep.r_squared = std::numeric_limits<double>::quiet_NaN();
        rep.fit_valid = false;
    }
    return rep;
}

double decay_rate_estimate(const ModeTrajectory& traj, const Grid1D& grid) {
    if (traj.times.size() < 10)
        throw std::invalid_argument("decay_rate_estimate: need at least 10 stored steps");

    std::vector<double> norms(traj.times.size());
    for (std::size_t j = 0; j < traj.states.size(); ++j)
        norms[j] = l2_norm(traj.states[j], grid);
    if (norms[0] == 0.0)
        throw std::invalid_argument("decay_rate_estimate: zero initial norm");

    // Tail half, skipping transients from non-ground components.
    const std::size_t start = traj.times.size() / 2;
    std::vector<double> t, logn;
    for (std::size_t j = start; j < norms.size(); ++j) {
        if (norms[j] < 1e-300) continue;
        t.push_back(traj.times[j]);
        logn.push_back(std::log(norms[j]));
    }
    if (t.size() < 2)
        throw NumericError("decay_rate_estimate: trajectory norms underflow; use a shorter T");

    return -fit_line(t, logn).slope;
}

} // namespace grushin
