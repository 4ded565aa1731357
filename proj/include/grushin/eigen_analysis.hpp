#pragma once
// Dissipation-speed checks: sweep the smallest eigenvalue lambda_{n,1} across
// mode indices, fit the scaling exponent against mu_n, and estimate decay
// rates of trajectories.

#include <memory>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/mode_pde.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

struct ScalingFitReport {
    double gamma = 0.0;
    std::vector<int> n_list;
    std::vector<double> mu_list;
    std::vector<double> lambda_list;
    double slope = 0.0;        // log-log least squares, lambda vs mu
    double slope_theory = 0.0; // 1 / (1 + gamma)
    double c_star_lo = 0.0;    // min lambda / mu^{1/(1+gamma)}
    double c_star_hi = 0.0;    // max of the same ratio
    double p_gamma = 0.0;      // 1/2 for gamma in [1/2,1], 2/3 for gamma in (0,1/2)
    double r_squared = 0.0;
    bool fit_valid = false;    // false for a single-entry sweep
};

// Carleman-step exponent p(gamma).
double carleman_exponent(double gamma);

// Smallest eigenvalue of G_{n,gamma} for each n in n_list. The grid must
// resolve the ground state: h * mu_max^{1/(2(1+gamma))} <= 0.1.
ScalingFitReport lambda_sweep(double gamma, std::shared_ptr<const CoefficientField> coeff,
                              const SpectralBasisY& basis, const std::vector<int>& n_list,
                              std::shared_ptr<const Grid1D> grid);

// Positive decay rate from the tail half of log ||u(t_j)|| vs t_j.
double decay_rate_estimate(const ModeTrajectory& traj, const Grid1D& grid);

// Least-squares line through (x_i, y_i); returns {slope, intercept, r^2}.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace grushin
