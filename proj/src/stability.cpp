#include "grushin/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grushin/eigen_analysis.hpp"
#include "grushin/errors.hpp"

namespace grushin {

namespace {

constexpr double kNonnegTol = 1e-12;

bool nonneg(std::span<const double> v, double scale) {
    for (double c : v)
        if (c < -kNonnegTol * scale) return false;
    return true;
}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s = std::max(s, std::abs(c));
    return s;
}

double potential_at(const ModeOperator& op, int i) {
    return op.diag[i] - 2.0 / (op.grid->h * op.grid->h);
}

} // namespace

ClassMembershipReport check_class_membership(const ModeStack& u0, double norm_value, int N,
                                             double mu_N, double K1, double t1, double T1,
                                             double s, double m, double delta, double gamma,
                                             const SubdomainSpec& support, int heat_steps) {
    if (!(t1 > 0.0 && t1 < T1))
        throw std::invalid_argument("check_class_membership: require 0 < t1 < T1");
    if (!u0.grid) throw std::invalid_argument("check_class_membership: stack has no grid");

    ClassMembershipReport rep;
    rep.N = N;
    rep.K1 = K1;
    rep.t1 = t1;
    rep.T1 = T1;
    rep.s = s;
    rep.norm = norm_value;

    const Grid1D& grid = *u0.grid;
    const std::vector<double>* modeN = u0.mode_for(N);
    std::vector<double> zero;
    if (!modeN) {
        zero.assign(grid.n_nodes(), 0.0);
        modeN = &zero;
    }

    rep.nonneg_ok = nonneg(*modeN, std::max(sup_abs(*modeN), 1.0));

    const Grid1D sub = subgrid_aligned(grid, support.lo, support.hi);
    const int offset = subgrid_parent_offset(grid, sub);
    std::vector<double> phi0(sub.n_nodes());
    for (int j = 0; j < sub.n_nodes(); ++j) phi0[j] = (*modeN)[offset + j];

    const std::vector<double> heat = heat_semigroup_subdomain(phi0, t1, sub, heat_steps);
    rep.lhs = *std::max_element(heat.begin(), heat.end());

    const double factor = std::exp(std::pow(delta, 2.0 * gamma) * m * T1 * mu_N);
    rep.rhs = K1 * factor * norm_value;
    rep.K1_max = norm_value > 0.0 ? rep.lhs / (factor * norm_value) : 0.0;
    if (rep.K1_max < 0.0) rep.K1_max = 0.0;

    // A zero datum is defined out of the class: the theorem divides by its norm.
    rep.member = rep.nonneg_ok && norm_value > 0.0 && rep.lhs >= rep.rhs;
    return rep;
}

double comparison_freeze_rate(const ModeOperator& op, const SubdomainSpec& support, double m,
                              double delta, ComparisonRate kind) {
    switch (kind) {
    case ComparisonRate::ClassLowerBound:
        return op.mu_n * std::pow(delta, 2.0 * op.gamma) * m;
    case ComparisonRate::PotentialUpperBound: {
        const IndexRange r = restrict_to(*op.grid, support.lo, support.hi);
        double rate = 0.0;
        for (int i = r.first; i < r.last; ++i) rate = std::max(rate, potential_at(op, i));
        return rate;
    }
    }
    return 0.0;
}

ComparisonReport comparison_lower_bound(const ModeTrajectory& utilde, std::span<const double> u0,
                                        const Grid1D& grid, const Grid1D& sub, int sub_offset,
                                        double freeze_rate, NuForm form) {
    if (utilde.scheme != Scheme::BackwardEuler)
        throw NumericError("comparison_lower_bound: the discrete comparison principle "
                           "requires a backward-Euler trajectory");
    if (static_cast<int>(u0.size()) != grid.n_nodes())
        throw std::invalid_argument("comparison_lower_bound: initial state size mismatch");
    if (!nonneg(u0, std::max(sup_abs(u0), 1.0)))
        throw std::invalid_argument("comparison_lower_bound: initial data must be nonnegative");

    // nu on the window with the same step and storage as utilde.
    std::vector<double> phi0(sub.n_nodes());
    for (int j = 0; j < sub.n_nodes(); ++j) phi0[j] = u0[sub_offset + j];

    auto sub_ptr = std::make_shared<const Grid1D>(sub);
    ModeOperator op_nu = assemble_laplacian(sub_ptr);
    if (form == NuForm::ImplicitDamped)
        for (double& d : op_nu.diag) d += freeze_rate;
    const double T = utilde.times.back();
    const ModeTrajectory nu_traj =
        solve_mode(phi0, SourceFn{}, op_nu, T, utilde.dt, Scheme::BackwardEuler, utilde.store_stride);
    if (nu_traj.times.size() != utilde.times.size())
        throw NumericError("comparison_lower_bound: storage mismatch between trajectories");

    ComparisonReport rep;
    rep.freeze_rate = freeze_rate;
    rep.margin = std::numeric_limits<double>::infinity();
    for (const auto& state : utilde.states) rep.sup_utilde = std::max(rep.sup_utilde, sup_abs(state));

    for (std::size_t j = 0; j < utilde.times.size(); ++j) {
        const double damp =
            form == NuForm::Product ? std::exp(-freeze_rate * utilde.times[j]) : 1.0;
        for (int i = 0; i < sub.n_nodes(); ++i) {
            const double nu = damp * nu_traj.states[j][i];
            const double diff = utilde.states[j][sub_offset + i] - nu;
            if (diff < rep.margin) {
                rep.margin = diff;
                rep.worst_time_index = static_cast<int>(j);
                rep.worst_node = sub_offset + i;
            }
        }
    }
    rep.margin_rel = rep.sup_utilde > 0.0 ? rep.margin / rep.sup_utilde : rep.margin;
    return rep;
}

HarnackReport harnack_ratio(const ModeTrajectory& traj, const ModeOperator& op, const Grid1D& ugrid,
                            const SubdomainSpec& V, double t1, double T1) {
    if (op.mu_n != 0.0)
        throw std::invalid_argument("harnack_ratio: trajectory must evolve with zero potential");
    if (!(t1 > 0.0 && t1 <= T1))
        throw std::invalid_argument("harnack_ratio: require 0 < t1 <= T1");
    if (traj.states.empty())
        throw std::invalid_argument("harnack_ratio: empty trajectory");
    if (!nonneg(traj.states.front(), std::max(sup_abs(traj.states.front()), 1.0)))
        throw std::invalid_argument("harnack_ratio: initial data must be nonnegative");

    const IndexRange r = restrict_to(ugrid, V.lo, V.hi);
    if (r.empty())
        throw std::invalid_argument("harnack_ratio: window V contains no nodes");

    HarnackReport rep;
    rep.t1 = t1;
    rep.T1 = T1;

    const int j_early = traj.index_of_time(t1);
    const int j_late = traj.index_of_time(T1);

    double sup_early = 0.0;
    double inf_late = std::numeric_limits<double>::infinity();
    for (int i = r.first; i < r.last; ++i) {
        sup_early = std::max(sup_early, traj.states[j_early][i]);
        inf_late = std::min(inf_late, traj.states[j_late][i]);
    }
    rep.sup_early = sup_early;
    rep.inf_late = inf_late;
    if (sup_early > 0.0) {
        rep.ratio = inf_late / sup_early;
    } else {
        rep.ratio = std::numeric_limits<double>::infinity();
        rep.unbounded = true;
    }
    return rep;
}

DuhamelReport duhamel_bound_check(const ModeTrajectory& w_traj, const Grid1D& grid, double lambda,
                                  double T1, std::span<const double> source_norms) {
    if (!source_norms.empty() && source_norms.size() != w_traj.times.size())
        throw std::invalid_argument("duhamel_bound_check: source norms not aligned with trajectory");

    const int jT = w_traj.index_of_time(T1);
    const double lhs = l2_norm(w_traj.states[jT], grid);
    const double actual_T1 = w_traj.times[jT];

    DuhamelReport rep;
    rep.lhs_norm = lhs;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < jT; ++j) {
        const double t = w_traj.times[j];
        double rhs = std::exp(-lambda * (actual_T1 - t)) * l2_norm(w_traj.states[j], grid);
        if (!source_norms.empty()) {
            // Trapezoid of e^{-lambda (T1 - tau)} ||g'(tau)|| over stored tau in [t, T1].
            double tail = 0.0;
            for (int q = j; q < jT; ++q) {
                const double ta = w_traj.times[q], tb = w_traj.times[q + 1];
                const double fa = std::exp(-lambda * (actual_T1 - ta)) * source_norms[q];
                const double fb = std::exp(-lambda * (actual_T1 - tb)) * source_norms[q + 1];
                tail += 0.5 * (fa + fb) * (tb - ta);
            }
            rhs += tail;
        }
        const double violation = lhs - rhs;
        if (violation > rep.worst_violation) {
            rep.worst_violation = violation;
            rep.worst_index = j;
        }
    }
    if (rep.worst_index < 0) rep.worst_violation = 0.0;
    rep.worst_violation_rel = lhs > 0.0 ? rep.worst_violation / lhs : rep.worst_violation;
    return rep;
}

ReconstructionResult reconstruct_coefficient(const ModeSnapshot& measured, const ModeTrajectory& utilde,
                                             const ModeOperator& op_btilde, const SubdomainSpec& support,
                                             double eps_den) {
    const Grid1D& grid = *op_btilde.grid;
    const int n = grid.n_nodes();
    if (static_cast<int>(measured.state.size()) != n || static_cast<int>(measured.dstate.size()) != n)
        throw std::invalid_argument("reconstruct_coefficient: snapshot size mismatch");

    const int jT = utilde.index_of_time(measured.t);
    const auto& ut_state = utilde.states[jT];
    const auto& ut_dstate = utilde.dstates[jT];

    std::vector<double> v_state(n), numerator(n);
    for (int i = 0; i < n; ++i) v_state[i] = measured.state[i] - ut_state[i];
    apply_operator(op_btilde, v_state, numerator);
    for (int i = 0; i < n; ++i) numerator[i] += measured.dstate[i] - ut_dstate[i];

    ReconstructionResult res;
    res.window = restrict_to(grid, support.lo, support.hi);
    if (res.window.empty())
        throw std::invalid_argument("reconstruct_coefficient: window contains no nodes");

    double u_sup = 0.0;
    for (int i = res.window.first; i < res.window.last; ++i)
        u_sup = std::max(u_sup, std::abs(measured.state[i]));
    res.denom_floor = eps_den * u_sup;

    std::vector<int> offending;
    for (int i = res.window.first; i < res.window.last; ++i)
        if (std::abs(measured.state[i]) < res.denom_floor) offending.push_back(i);
    if (!offending.empty() || u_sup == 0.0) {
        std::ostringstream os;
        os << "reconstruct_coefficient: |u_N(T1)| below the denominator floor at "
           << (u_sup == 0.0 ? res.window.count() : static_cast<int>(offending.size()))
           << " window node(s):";
        for (std::size_t k = 0; k < offending.size() && k < 8; ++k) os << ' ' << offending[k];
        if (offending.size() > 8) os << " ...";
        throw NumericError(os.str());
    }

    res.diff.assign(n, 0.0);
    for (int i = res.window.first; i < res.window.last; ++i) {
        const double denom =
            op_btilde.mu_n * std::pow(std::abs(grid.nodes[i]), 2.0 * op_btilde.gamma) * measured.state[i];
        res.diff[i] = -numerator[i] / denom;
    }

    res.residual_sup = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = op_btilde.mu_n * std::pow(std::abs(grid.nodes[i]), 2.0 * op_btilde.gamma);
        res.residual_sup = std::max(res.residual_sup,
                                    std::abs(numerator[i] + w * res.diff[i] * measured.state[i]));
    }
    return res;
}

ModeStack scale_stack(const ModeStack& stack, double factor) {
    ModeStack out = stack;
    for (auto& mode : out.modes)
        for (double& c : mode) c *= factor;
    return out;
}

StabilityReport stability_ratio(const StabilityProblem& p, std::uint64_t seed) {
    if (!p.grid || !p.basis || !p.b || !p.btilde)
        throw std::invalid_argument("stability_ratio: incomplete problem");
    if (!(p.T1 > 0.0 && p.T1 < p.T))
        throw std::invalid_argument("stability_ratio: require 0 < T1 < T");
    if (p.u0.grid.get() != p.grid.get() || p.u0tilde.grid.get() != p.grid.get())
        throw std::invalid_argument("stability_ratio: stacks must share the problem grid");

    const Grid1D& grid = *p.grid;
    const int n_nodes = grid.n_nodes();

    StabilityReport rep;
    rep.N = p.N;
    rep.gamma = p.gamma;
    rep.T = p.T;
    rep.T1 = p.T1;
    rep.seed = seed;
    rep.p_gamma = carleman_exponent(p.gamma);
    rep.lambda_N = eigendecompose(assemble_operator(p.grid, p.gamma, p.basis->mu[p.N - 1], p.btilde), 1)
                       .eigenvalues[0];

    // Modes that can carry a nonzero solution.
    std::vector<int> active;
    for (int n = 1; n <= p.basis->N_max; ++n) {
        const auto* m0 = p.u0.mode_for(n);
        const auto* mt = p.u0tilde.mode_for(n);
        const bool nz0 = m0 && sup_abs(*m0) > 0.0;
        const bool nzt = mt && sup_abs(*mt) > 0.0;
        if (nz0 || nzt) active.push_back(n);
    }

    // Norms of both data, with the known-coefficient operator.
    auto data_norm = [&](const ModeStack& stack) {
        std::vector<ModeOperator> ops;
        ops.reserve(stack.modes.size());
        for (int n : stack.n_indices)
            ops.push_back(assemble_operator(p.grid, p.gamma, p.basis->mu[n - 1], p.btilde));
        const long s_rounded = std::lround(p.s);
        if (std::abs(p.s - static_cast<double>(s_rounded)) < 1e-12 && s_rounded >= 0 &&
            s_rounded % 2 == 0)
            return fractional_norm_via_powers(stack, static_cast<int>(s_rounded), ops);
        std::vector<ModeSpectrum> spectra;
        spectra.reserve(ops.size());
        for (const auto& op : ops) spectra.push_back(eigendecompose(op, op.dim()));
        return fractional_norm(stack, p.s, spectra);
    };
    const double norm_value = data_norm(p.u0tilde);
    rep.norm_sq = norm_value * norm_value;
    const double u0_norm = data_norm(p.u0);
    rep.u0_norm_sq = u0_norm * u0_norm;

    const SubdomainSpec& support = p.b->support;
    const ClassMembershipReport membership =
        check_class_membership(p.u0tilde, norm_value, p.N, p.basis->mu[p.N - 1], p.K1, p.t1, p.T1,
                               p.s, p.m, support.delta, p.gamma, support, p.heat_steps);
    rep.membership_ok = membership.member;
    rep.K1_max = membership.K1_max;
    if (!membership.member) {
        std::ostringstream os;
        os << "stability_ratio: u0tilde is not in the admissible class for N = " << p.N
           << ", K1 = " << p.K1 << " (K1_max = " << membership.K1_max << ")";
        throw NumericError(os.str());
    }

    // Coefficient-difference integrals over the window.
    const IndexRange win = restrict_to(grid, support.lo, support.hi);
    for (int i = win.first; i < win.last; ++i) {
        const double d = p.b->samples[i] - p.btilde->samples[i];
        const double w = std::pow(std::abs(grid.nodes[i]), 4.0 * p.gamma);
        rep.lhs += d * d;
        rep.lhs_weighted += w * d * d;
    }
    rep.lhs *= grid.h;
    rep.lhs_weighted *= grid.h;

    const IndexRange omega = restrict_to(grid, p.omega1.lo, p.omega1.hi);
    if (omega.empty())
        throw std::invalid_argument("stability_ratio: observation window contains no nodes");

    // Solve both systems mode by mode and accumulate both RHS terms.
    const std::vector<double> zero(n_nodes, 0.0);
    std::vector<double> obs_density; // sum over modes of the omega-integral at stored times
    std::vector<double> times;
    double snapshot = 0.0;
    double t_snapshot = 0.0;

    for (int n : active) {
        const double mu = p.basis->mu[n - 1];
        const ModeOperator op_b = assemble_operator(p.grid, p.gamma, mu, p.b);
        const ModeOperator op_bt = assemble_operator(p.grid, p.gamma, mu, p.btilde);

        const auto* m0 = p.u0.mode_for(n);
        const auto* mt = p.u0tilde.mode_for(n);
        const ModeTrajectory tu = solve_mode(m0 ? std::span<const double>(*m0) : std::span<const double>(zero),
                                             SourceFn{}, op_b, p.T, p.dt, p.scheme, p.store_stride);
        const ModeTrajectory tt = solve_mode(mt ? std::span<const double>(*mt) : std::span<const double>(zero),
                                             SourceFn{}, op_bt, p.T, p.dt, p.scheme, p.store_stride);
        if (tu.times.size() != tt.times.size())
            throw NumericError("stability_ratio: trajectory storage mismatch");

        if (obs_density.empty()) {
            obs_density.assign(tu.times.size(), 0.0);
            times = tu.times;
        }
        for (std::size_t j = 0; j < tu.times.size(); ++j) {
            double acc = 0.0;
            for (int i = omega.first; i < omega.last; ++i) {
                const double dv = tu.dstates[j][i] - tt.dstates[j][i];
                acc += dv * dv;
            }
            obs_density[j] += grid.h * acc;
        }

        const int jT = tu.index_of_time(p.T1);
        t_snapshot = tu.times[jT];
        std::vector<double> v(n_nodes), gv(n_nodes);
        for (int i = 0; i < n_nodes; ++i) v[i] = tu.states[jT][i] - tt.states[jT][i];
        apply_operator(op_b, v, gv);
        double acc = 0.0;
        for (int i = win.first; i < win.last; ++i) acc += gv[i] * gv[i];
        snapshot += grid.h * acc;
    }

    // Trapezoid in time over stored steps.
    double obs = 0.0;
    for (std::size_t j = 0; j + 1 < times.size(); ++j)
        obs += 0.5 * (obs_density[j] + obs_density[j + 1]) * (times[j + 1] - times[j]);

    rep.obs_term = obs;
    rep.snapshot_term = snapshot;
    rep.t_snapshot = t_snapshot;

    const double denom = rep.obs_term + rep.snapshot_term;
    if (denom > 0.0) {
        rep.ratio = rep.lhs * rep.norm_sq / denom;
    } else if (rep.lhs > 0.0) {
        rep.violation_flag = true;
        rep.ratio = std::numeric_limits<double>::infinity();
    } else {
        rep.ratio = 0.0;
    }
    return rep;
}

} // namespace grushin
