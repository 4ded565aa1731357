#include "grushin/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "grushin/errors.hpp"

namespace grushin {

SpectralBasisY build_basis(double L2, int N_max, int n_y_quad) {
    if (!(L2 > 0.0)) throw ConfigError("build_basis: require L2 > 0");
    if (N_max < 1) throw ConfigError("build_basis: require N_max >= 1");
    if (n_y_quad < 4 * N_max) {
        std::ostringstream os;
        os << "build_basis: n_y_quad = " << n_y_quad << " risks aliasing for N_max = " << N_max
           << "; require n_y_quad >= 4 * N_max = " << 4 * N_max;
        throw ConfigError(os.str());
    }

    SpectralBasisY b;
    b.L2 = L2;
    b.N_max = N_max;
    const double pi = std::numbers::pi;

    b.mu.resize(N_max);
    for (int n = 1; n <= N_max; ++n) {
        const double k = n * pi / L2;
        b.mu[n - 1] = k * k;
    }

    const int ny = n_y_quad - 1;
    const double hy = L2 / n_y_quad;
    b.y_nodes.resize(ny);
    b.y_weights.assign(ny, hy);
    for (int q = 0; q < ny; ++q) b.y_nodes[q] = (q + 1) * hy;

    // Uniform trapezoid with Dirichlet zeros at both endpoints: the discrete
    // sine orthogonality sum_q sin(n pi q/Q) sin(m pi q/Q) = Q/2 delta_nm is
    // exact for n, m < Q, so the basis is orthonormal to round-off.
    const double amp = std::sqrt(2.0 / L2);
    b.phi.resize(static_cast<std::size_t>(N_max) * ny);
    for (int n = 1; n <= N_max; ++n)
        for (int q = 0; q < ny; ++q)
            b.phi[(n - 1) * static_cast<std::size_t>(ny) + q] = amp * std::sin(n * pi * b.y_nodes[q] / L2);

    return b;
}

const std::vector<double>* ModeStack::mode_for(int n) const {
    for (std::size_t i = 0; i < n_indices.size(); ++i)
        if (n_indices[i] == n) return &modes[i];
    return nullptr;
}

ModeStack project(const Field2D& v, std::shared_ptr<const SpectralBasisY> basis,
                  std::shared_ptr<const Grid1D> grid) {
    if (!basis || !grid) throw std::invalid_argument("project: null basis or grid");
    if (v.nx != grid->n_nodes() || v.ny != basis->n_y())
        throw std::invalid_argument("project: field shape does not match grid x basis");

    ModeStack stack;
    stack.grid = grid;
    stack.basis = basis;
    stack.n_indices.resize(basis->N_max);
    stack.modes.assign(basis->N_max, std::vector<double>(v.nx, 0.0));

    const int ny = basis->n_y();
    for (int n = 1; n <= basis->N_max; ++n) {
        stack.n_indices[n - 1] = n;
        auto& mode = stack.modes[n - 1];
        for (int ix = 0; ix < v.nx; ++ix) {
            double s = 0.0;
            for (int q = 0; q < ny; ++q)
                s += basis->y_weights[q] * v.at(ix, q) * basis->phi_at(n, q);
            mode[ix] = s;
        }
    }
    return stack;
}

Field2D synthesize(const ModeStack& stack) {
    if (!stack.grid || !stack.basis) throw std::invalid_argument("synthesize: incomplete stack");
    if (stack.modes.empty()) throw std::invalid_argument("synthesize: empty stack");

    const int nx = stack.grid->n_nodes();
    const int ny = stack.basis->n_y();
    Field2D out(nx, ny);
    for (std::size_t k = 0; k < stack.modes.size(); ++k) {
        const int n = stack.n_indices[k];
        const auto& mode = stack.modes[k];
        if (static_cast<int>(mode.size()) != nx)
            throw std::invalid_argument("synthesize: mode length does not match grid");
        for (int ix = 0; ix < nx; ++ix) {
            const double c = mode[ix];
            if (c == 0.0) continue;
            for (int q = 0; q < ny; ++q)
                out.at(ix, q) += c * stack.basis->phi_at(n, q);
        }
    }
    return out;
}

} // namespace grushin
