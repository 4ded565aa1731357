#pragma once
// The x-operator of one Fourier mode, -d^2/dx^2 + mu_n |x|^{2 gamma} b(x) with
// Dirichlet conditions, its implicit time integration, the Dirichlet heat
// semigroup on a subdomain, eigendecomposition and fractional-power norms.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

struct ModeOperator {
    std::shared_ptr<const Grid1D> grid;
    double gamma = 1.0;
    double mu_n = 0.0;
    std::shared_ptr<const CoefficientField> coeff; // null means b == 1
    std::vector<double> diag;                      // 2/h^2 + mu_n |x_i|^{2 gamma} b(x_i)
    std::vector<double> offdiag;                   // -1/h^2

    int dim() const { return static_cast<int>(diag.size()); }
};

ModeOperator assemble_operator(std::shared_ptr<const Grid1D> grid, double gamma, double mu_n,
                               std::shared_ptr<const CoefficientField> coeff);

// Pure Dirichlet Laplacian (mu_n = 0).
ModeOperator assemble_laplacian(std::shared_ptr<const Grid1D> grid);

void apply_operator(const ModeOperator& op, std::span<const double> u, std::span<double> out);

enum class Scheme { CrankNicolson, BackwardEuler };

// One theta-step of d/dt u + G u = g (theta = 1/2 or 1), direct tridiagonal solve.
std::vector<double> step_mode(std::span<const double> state, const ModeOperator& op,
                              std::span<const double> g_now, std::span<const double> g_next,
                              double dt, Scheme scheme);

using SourceFn = std::function<void(double t, std::span<double> out)>;

struct ModeTrajectory {
    std::vector<double> times;                // stored times, uniform stride (plus final step)
    std::vector<std::vector<double>> states;  // u at stored times
    std::vector<std::vector<double>> dstates; // -G u + g at stored times
    std::vector<std::vector<double>> source;  // g at stored times; empty for zero source
    Scheme scheme = Scheme::CrankNicolson;
    double dt = 0.0;
    int store_stride = 1;

    int index_of_time(double t) const; // nearest stored index
};

// Integrate up to T with uniform step (dt is adjusted to divide T exactly).
// Every store_stride-th step is kept, the final step always.
ModeTrajectory solve_mode(std::span<const double> u0, const SourceFn& source, const ModeOperator& op,
                          double T, double dt, Scheme scheme, int store_stride = 1);

// Discrete time derivative by the operator identity -G u + g on the stored
// states; not a difference quotient in t.
std::vector<std::vector<double>> time_derivative(const ModeTrajectory& traj, const ModeOperator& op);

// Same quantity by the second route: integrate the differentiated system with
// initial state -G u0 + g(0) and source dg/dt. Used to cross-check the identity.
ModeTrajectory solve_differentiated_system(std::span<const double> u0, const SourceFn& source,
                                           const SourceFn& dsource, const ModeOperator& op,
                                           double T, double dt, Scheme scheme, int store_stride = 1);

// Dirichlet heat flow on a subdomain grid, backward Euler sub-stepped.
std::vector<double> heat_semigroup_subdomain(std::span<const double> phi0, double t,
                                             const Grid1D& subgrid, int n_steps = 2048);

struct ModeSpectrum {
    std::vector<double> eigenvalues;              // ascending
    std::vector<std::vector<double>> eigenvectors; // orthonormal under l2_inner
    double lambda_upper = 0.0;                     // Gershgorin bound of the operator
    int op_dim = 0;

    bool complete() const { return static_cast<int>(eigenvalues.size()) == op_dim; }
};

// k smallest eigenpairs via Sturm bisection + inverse iteration.
ModeSpectrum eigendecompose(const ModeOperator& op, int k);

// || u ||_{D(G^{s/2})} by spectral calculus over the per-mode decompositions:
// squared norm = sum_n sum_k lambda_{n,k}^s <u_n, e_{n,k}>^2. The spectra must
// be aligned with stack.n_indices; an insufficient spectral tail is an error.
double fractional_norm(const ModeStack& u0, double s, const std::vector<ModeSpectrum>& spectra);

// Same norm for even integer s through operator powers: || G^{s/2} u ||.
// Algebraically identical to the spectral route; no eigendecomposition needed.
double fractional_norm_via_powers(const ModeStack& u0, int s, const std::vector<ModeOperator>& ops);

} // namespace grushin
