#pragma once
// Executable form of the stability pipeline: admissible-class membership of
// initial data, the maximum-principle comparison bound, Harnack ratios,
// the Duhamel decay bound, pointwise coefficient reconstruction from the
// time-derivative snapshot, and the empirical two-sided stability ratio.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/mode_pde.hpp"
#include "grushin/spectral.hpp"

namespace grushin {

struct ClassMembershipReport {
    int N = 0;
    double K1 = 0.0;
    double t1 = 0.0;
    double T1 = 0.0;
    double s = 0.0;
    bool nonneg_ok = false;
    double lhs = 0.0;    // sup over the window of e^{t1 Lap} u0_N
    double rhs = 0.0;    // K1 e^{delta^{2 gamma} m T1 mu_N} ||u0||
    double K1_max = 0.0; // largest admissible K1 for this datum
    double norm = 0.0;   // ||u0||_{D(G^{s/2})}
    bool member = false;
};

// norm_value is ||u0||_{D(G^{s/2})} computed by the caller (spectral route or
// operator powers). A zero datum is a non-member with K1_max = 0.
ClassMembershipReport check_class_membership(const ModeStack& u0, double norm_value, int N,
                                             double mu_N, double K1, double t1, double T1,
                                             double s, double m, double delta, double gamma,
                                             const SubdomainSpec& support, int heat_steps = 2048);

// Damping constant for the comparison solution nu(t, x) = e^{-rate t} (heat flow).
//   ClassLowerBound    : mu_N delta^{2 gamma} m, the constant the class carries.
//   PotentialUpperBound: max of mu_N |x|^{2 gamma} b(x) over window nodes; with
//                        this rate the backward-Euler comparison u_tilde >= nu
//                        is provable (M-matrix + domain monotonicity).
enum class ComparisonRate { ClassLowerBound, PotentialUpperBound };

double comparison_freeze_rate(const ModeOperator& op, const SubdomainSpec& support, double m,
                              double delta, ComparisonRate kind);

// Discretization of the comparison solution nu.
//   Product       : e^{-rate t} times the backward-Euler heat flow, the
//                   continuum closed form evaluated on discrete factors.
//   ImplicitDamped: backward-Euler solve of the damped heat equation with the
//                   rate inside the implicit operator. With the upper-bound
//                   rate this is the form for which u_tilde >= nu is provable
//                   step by step (M-matrix inverse positivity), so the margin
//                   is certified to round-off; the product form commutes the
//                   scalar past the solve and leaks O(rate^2 dt) per step.
enum class NuForm { Product, ImplicitDamped };

struct ComparisonReport {
    double margin = 0.0;     // min over stored times and window nodes of (u_tilde - nu)
    double margin_rel = 0.0; // margin / sup |u_tilde|
    double sup_utilde = 0.0;
    double freeze_rate = 0.0;
    int worst_time_index = -1;
    int worst_node = -1; // parent node index
};

// u_tilde must be a backward-Euler trajectory with nonnegative initial data;
// sub is the aligned subgrid of the comparison window, sub_offset its parent
// node offset.
ComparisonReport comparison_lower_bound(const ModeTrajectory& utilde, std::span<const double> u0,
                                        const Grid1D& grid, const Grid1D& sub, int sub_offset,
                                        double freeze_rate, NuForm form = NuForm::Product);

struct HarnackReport {
    double t1 = 0.0;
    double T1 = 0.0;
    double inf_late = 0.0;
    double sup_early = 0.0;
    double ratio = 0.0;
    bool unbounded = false; // sup_early == 0
};

// traj must be a zero-potential (pure heat) evolution of nonnegative data on
// the U grid; V is a compactly contained window of U.
HarnackReport harnack_ratio(const ModeTrajectory& traj, const ModeOperator& op, const Grid1D& ugrid,
                            const SubdomainSpec& V, double t1, double T1);

struct DuhamelReport {
    double worst_violation = 0.0;     // max over t_j of ||w(T1)|| - rhs(t_j)
    double worst_violation_rel = 0.0; // normalized by ||w(T1)||
    int worst_index = -1;
    double lhs_norm = 0.0;
};

// w_traj holds the time-derivative field at stored times; source_norms are
// L2 norms of the derivative-system source at the same times (empty = zero).
// Checks ||w(T1)|| <= e^{-lambda (T1 - t_j)} ||w(t_j)|| + tail for every
// stored t_j < T1.
DuhamelReport duhamel_bound_check(const ModeTrajectory& w_traj, const Grid1D& grid, double lambda,
                                  double T1, std::span<const double> source_norms = {});

// One measured mode snapshot: state and its discrete time derivative at t.
struct ModeSnapshot {
    std::vector<double> state;
    std::vector<double> dstate;
    double t = 0.0;
};

struct ReconstructionResult {
    std::vector<double> diff; // estimate of b - b_tilde on the full grid, 0 outside the window
    IndexRange window;
    double residual_sup = 0.0; // sup-norm residual of the mode identity at T1
    double denom_floor = 0.0;
};

// Pointwise identity solved for the coefficient difference on the window:
//   (b - b_tilde)(x) = -[d/dt v + G_btilde v](T1, x) / (mu_N |x|^{2g} u(T1, x)),
// v = u - u_tilde. Nodes where |u(T1)| drops below eps_den * max |u(T1)| over
// the window are an error (lists the offending nodes).
ReconstructionResult reconstruct_coefficient(const ModeSnapshot& measured, const ModeTrajectory& utilde,
                                             const ModeOperator& op_btilde, const SubdomainSpec& support,
                                             double eps_den = 1e-6);

struct StabilityReport {
    int N = 0;
    double gamma = 0.0;
    double T = 0.0;
    double T1 = 0.0;
    double lhs = 0.0;          // int over the window of (b - b_tilde)^2
    double lhs_weighted = 0.0; // same with the |x|^{4 gamma} weight
    double obs_term = 0.0;     // int_0^T int_omega |d/dt (u - u_tilde)|^2
    double snapshot_term = 0.0;// int |G (u - u_tilde)(T1)|^2 over window x Omega_2
    double norm_sq = 0.0;      // ||u_tilde^0||^2_{D(G^{s/2})}, the normalizing norm
    double u0_norm_sq = 0.0;   // ||u^0||^2 in the same norm, logged alongside
    double ratio = 0.0;        // lhs * norm_sq / (obs_term + snapshot_term)
    double lambda_N = 0.0;
    double p_gamma = 0.0;
    std::uint64_t seed = 0;
    bool membership_ok = false;
    double K1_max = 0.0;
    double t_snapshot = 0.0;   // stored time actually used for the snapshot
    bool violation_flag = false; // vanishing RHS with nonzero LHS
};

struct StabilityProblem {
    std::shared_ptr<const Grid1D> grid;
    std::shared_ptr<const SpectralBasisY> basis;
    std::shared_ptr<const CoefficientField> b;
    std::shared_ptr<const CoefficientField> btilde;
    ModeStack u0;
    ModeStack u0tilde;
    int N = 1;
    double T = 1.0;
    double T1 = 0.25;
    double t1 = 0.05;
    Interval omega1{-0.9, -0.4};
    double gamma = 0.5;
    double s = 2.0;
    double dt = 5e-4;
    double K1 = 1e-9;
    double m = 0.5;
    Scheme scheme = Scheme::CrankNicolson;
    int store_stride = 1;
    int heat_steps = 2048;
};

// Solves both systems mode by mode and evaluates both sides of the stability
// inequality. Class membership of u0tilde is enforced; failure is an error.
StabilityReport stability_ratio(const StabilityProblem& p, std::uint64_t seed = 0);

ModeStack scale_stack(const ModeStack& stack, double factor);

} // namespace grushin
