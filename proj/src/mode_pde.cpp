#include "grushin/mode_pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grushin/errors.hpp"
#include "grushin/tridiag.hpp"

namespace grushin {

ModeOperator assemble_operator(std::shared_ptr<const Grid1D> grid, double gamma, double mu_n,
                               std::shared_ptr<const CoefficientField> coeff) {
    if (!grid) throw std::invalid_argument("assemble_operator: null grid");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("assemble_operator: gamma out of (0,1]");
    if (!(mu_n >= 0.0))
        throw std::invalid_argument("assemble_operator: require mu_n >= 0");
    if (coeff && coeff->grid.get() != grid.get())
        throw std::invalid_argument("assemble_operator: coefficient lives on a different grid");

    ModeOperator op;
    op.grid = grid;
    op.gamma = gamma;
    op.mu_n = mu_n;
    op.coeff = coeff;

    const int n = grid->n_nodes();
    const double inv_h2 = 1.0 / (grid->h * grid->h);
    op.diag.resize(n);
    op.offdiag.assign(n > 0 ? n - 1 : 0, -inv_h2);
    for (int i = 0; i < n; ++i) {
        const double x = grid->nodes[i];
        const double b = coeff ? coeff->samples[i] : 1.0;
        op.diag[i] = 2.0 * inv_h2 + mu_n * std::pow(std::abs(x), 2.0 * gamma) * b;
    }
    return op;
}

ModeOperator assemble_laplacian(std::shared_ptr<const Grid1D> grid) {
    return assemble_operator(std::move(grid), 1.0, 0.0, nullptr);
}

void apply_operator(const ModeOperator& op, std::span<const double> u, std::span<double> out) {
    const int n = op.dim();
    if (static_cast<int>(u.size()) != n || static_cast<int>(out.size()) != n)
        throw std::invalid_argument("apply_operator: size mismatch");
    for (int i = 0; i < n; ++i) {
        double v = op.diag[i] * u[i];
        if (i > 0) v += op.offdiag[i - 1] * u[i - 1];
        if (i + 1 < n) v += op.offdiag[i] * u[i + 1];
        out[i] = v;
    }
}

namespace {

double theta_of(Scheme scheme) {
    return scheme == Scheme::CrankNicolson ? 0.5 : 1.0;
}

// Solve (I + theta dt G) x = rhs.
void implicit_solve(const ModeOperator& op, double theta_dt, std::vector<double>& rhs_to_x) {
    static thread_local std::vector<double> diag, off;
    const int n = op.dim();
    diag.resize(n);
    off.resize(n > 0 ? n - 1 : 0);
    for (int i = 0; i < n; ++i) diag[i] = 1.0 + theta_dt * op.diag[i];
    for (int i = 0; i + 1 < n; ++i) off[i] = theta_dt * op.offdiag[i];
    SymTridiag T{diag, off};
    solve_shifted_tridiag(T, 0.0, rhs_to_x);
}

} // namespace

std::vector<double> step_mode(std::span<const double> state, const ModeOperator& op,
                              std::span<const double> g_now, std::span<const double> g_next,
                              double dt, Scheme scheme) {
    const int n = op.dim();
    if (static_cast<int>(state.size()) != n)
        throw std::invalid_argument("step_mode: state size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("step_mode: require dt > 0");

    const double theta = theta_of(scheme);
    std::vector<double> rhs(n);
    // rhs = (I - (1-theta) dt G) u + dt ((1-theta) g_now + theta g_next)
    if (theta < 1.0) {
        apply_operator(op, state, rhs);
        for (int i = 0; i < n; ++i) rhs[i] = state[i] - (1.0 - theta) * dt * rhs[i];
    } else {
        rhs.assign(state.begin(), state.end());
    }
    if (!g_now.empty() || !g_next.empty()) {
        for (int i = 0; i < n; ++i) {
            double g = 0.0;
            if (!g_now.empty()) g += (1.0 - theta) * g_now[i];
            if (!g_next.empty()) g += theta * g_next[i];
            rhs[i] += dt * g;
        }
    }
    implicit_solve(op, theta * dt, rhs);
    for (double v : rhs)
        if (!std::isfinite(v)) throw NumericError("step_mode: non-finite state after solve");
    return rhs;
}

int ModeTrajectory::index_of_time(double t) const {
    if (times.empty()) throw std::invalid_argument("trajectory: empty");
    int best = 0;
    double dist = std::abs(times[0] - t);
    for (std::size_t j = 1; j < times.size(); ++j) {
        const double d = std::abs(times[j] - t);
        if (d < dist) {
            dist = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

ModeTrajectory solve_mode(std::span<const double> u0, const SourceFn& source, const ModeOperator& op,
                          double T, double dt, Scheme scheme, int store_stride) {
    const int n = op.dim();
    if (static_cast<int>(u0.size()) != n)
        throw std::invalid_argument("solve_mode: initial state size mismatch");
    if (!(T > 0.0) || !(dt > 0.0) || dt > T * (1.0 + 1e-12))
        throw std::invalid_argument("solve_mode: require 0 < dt <= T");
    if (store_stride < 1) throw std::invalid_argument("solve_mode: store_stride >= 1");

    const long n_steps = std::max(1L, std::lround(T / dt));
    const double dt_eff = T / static_cast<double>(n_steps);

    ModeTrajectory traj;
    traj.scheme = scheme;
    traj.dt = dt_eff;
    traj.store_stride = store_stride;

    const bool has_source = static_cast<bool>(source);
    std::vector<double> g_now(has_source ? n : 0), g_next(has_source ? n : 0);
    if (has_source) source(0.0, g_now);

    std::vector<double> state(u0.begin(), u0.end());

    auto store = [&](long step) {
        traj.times.push_back(step * dt_eff);
        traj.states.push_back(state);
        std::vector<double> d(n);
        apply_operator(op, state, d);
        for (int i = 0; i < n; ++i) d[i] = -d[i] + (has_source ? g_now[i] : 0.0);
        traj.dstates.push_back(std::move(d));
        if (has_source) traj.source.push_back(g_now);
    };

    store(0);
    for (long step = 0; step < n_steps; ++step) {
        if (has_source) source((step + 1) * dt_eff, g_next);
        state = step_mode(state, op,
                          has_source ? std::span<const double>(g_now) : std::span<const double>{},
                          has_source ? std::span<const double>(g_next) : std::span<const double>{},
                          dt_eff, scheme);
        if (has_source) g_now.swap(g_next);
        const long done = step + 1;
        if (done % store_stride == 0 || done == n_steps) store(done);
    }
    return traj;
}

std::vector<std::vector<double>> time_derivative(const ModeTrajectory& traj, const ModeOperator& op) {
    if (!traj.source.empty() && traj.source.size() != traj.states.size())
        throw std::invalid_argument("time_derivative: source/state count mismatch");
    std::vector<std::vector<double>> out(traj.states.size());
    const int n = op.dim();
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        out[j].resize(n);
        apply_operator(op, traj.states[j], out[j]);
        for (int i = 0; i < n; ++i) {
            out[j][i] = -out[j][i] + (traj.source.empty() ? 0.0 : traj.source[j][i]);
        }
    }
    return out;
}

ModeTrajectory solve_differentiated_system(std::span<const double> u0, const SourceFn& source,
                                           const SourceFn& dsource, const ModeOperator& op,
                                           double T, double dt, Scheme scheme, int store_stride) {
    const int n = op.dim();
    std::vector<double> v0(n);
    apply_operator(op, u0, v0);
    if (source) {
        std::vector<double> g0(n);
        source(0.0, g0);
        for (int i = 0; i < n; ++i) v0[i] = -v0[i] + g0[i];
    } else {
        for (int i = 0; i < n; ++i) v0[i] = -v0[i];
    }
    return solve_mode(v0, dsource, op, T, dt, scheme, store_stride);
}

std::vector<double> heat_semigroup_subdomain(std::span<const double> phi0, double t,
                                             const Grid1D& subgrid, int n_steps) {
    if (t < 0.0) throw NumericError("heat_semigroup_subdomain: negative time");
    if (static_cast<int>(phi0.size()) != subgrid.n_nodes())
        throw std::invalid_argument("heat_semigroup_subdomain: state size mismatch");
    std::vector<double> state(phi0.begin(), phi0.end());
    if (t == 0.0) return state;

    auto grid_ptr = std::make_shared<const Grid1D>(subgrid);
    const ModeOperator lap = assemble_laplacian(grid_ptr);
    const double dt = t / std::max(1, n_steps);
    for (int s = 0; s < std::max(1, n_steps); ++s)
        state = step_mode(state, lap, {}, {}, dt, Scheme::BackwardEuler);
    return state;
}

ModeSpectrum eigendecompose(const ModeOperator& op, int k) {
    const int n = op.dim();
    if (k < 1 || k > n)
        throw std::invalid_argument("eigendecompose: k out of [1, dim]");

    SymTridiag T{op.diag, op.offdiag};
    TridiagEigenpairs pairs = smallest_eigenpairs(T, k);

    ModeSpectrum sp;
    sp.op_dim = n;
    sp.lambda_upper = gershgorin_bounds(T).second;
    sp.eigenvalues = std::move(pairs.values);
    sp.eigenvectors = std::move(pairs.vectors);

    if (!sp.eigenvalues.empty() && sp.eigenvalues.front() <= 0.0)
        throw NumericError("eigendecompose: operator is not positive definite");

    // Rescale Euclidean-orthonormal vectors to orthonormality under l2_inner.
    const double inv_sqrt_h = 1.0 / std::sqrt(op.grid->h);
    for (auto& v : sp.eigenvectors)
        for (double& c : v) c *= inv_sqrt_h;
    return sp;
}

double fractional_norm(const ModeStack& u0, double s, const std::vector<ModeSpectrum>& spectra) {
    if (spectra.size() != u0.modes.size())
        throw std::invalid_argument("fractional_norm: spectra not aligned with stack");
    if (!u0.grid) throw std::invalid_argument("fractional_norm: stack has no grid");

    const Grid1D& grid = *u0.grid;
    double total = 0.0;
    double tail_total = 0.0;
    for (std::size_t m = 0; m < u0.modes.size(); ++m) {
        const auto& mode = u0.modes[m];
        const auto& sp = spectra[m];
        double captured = 0.0;
        for (std::size_t kk = 0; kk < sp.eigenvalues.size(); ++kk) {
            const double c = l2_inner(mode, sp.eigenvectors[kk], grid);
            captured += c * c;
            total += std::pow(sp.eigenvalues[kk], s) * c * c;
        }
        if (!sp.complete()) {
            const double mass = l2_inner(mode, mode, grid);
            const double deficit = std::max(0.0, mass - captured);
            tail_total += deficit * std::pow(sp.lambda_upper, s);
        }
    }
    if (tail_total > 1e-8 * std::max(total, std::numeric_limits<double>::min())) {
        std::ostringstream os;
        os << "fractional_norm: spectral tail estimate " << tail_total
           << " exceeds 1e-8 of the captured norm " << total
           << "; compute more eigenpairs";
        throw NumericError(os.str());
    }
    return std::sqrt(total);
}

double fractional_norm_via_powers(const ModeStack& u0, int s, const std::vector<ModeOperator>& ops) {
    if (s < 0 || s % 2 != 0)
        throw std::invalid_argument("fractional_norm_via_powers: s must be an even non-negative integer");
    if (ops.size() != u0.modes.size())
        throw std::invalid_argument("fractional_norm_via_powers: operators not aligned with stack");

    const Grid1D& grid = *u0.grid;
    const int half = s / 2;
    double total = 0.0;
    for (std::size_t m = 0; m < u0.modes.size(); ++m) {
        std::vector<double> w = u0.modes[m];
        std::vector<double> tmp(w.size());
        for (int p = 0; p < half; ++p) {
            apply_operator(ops[m], w, tmp);
            w.swap(tmp);
        }
        total += l2_inner(w, w, grid);
    }
    return std::sqrt(total);
}

} // namespace grushin
