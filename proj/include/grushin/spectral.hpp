#pragma once
// Closed-form Dirichlet sine eigenbasis on Omega_2 = (0, L2), with a uniform
// trapezoid y-quadrature that is exactly orthonormal for the retained modes,
// and projection/synthesis between (x, y) fields and Fourier x-modes.

#include <memory>
#include <span>
#include <vector>

#include "grushin/grid.hpp"

namespace grushin {

struct SpectralBasisY {
    double L2 = 0.0;
    int N_max = 0;
    std::vector<double> mu;        // mu[n-1] = (n pi / L2)^2
    std::vector<double> y_nodes;   // interior quadrature nodes, count n_y_quad - 1
    std::vector<double> y_weights; // uniform trapezoid weights, L2 / n_y_quad
    std::vector<double> phi;       // phi[(n-1)*n_y + q] = sqrt(2/L2) sin(n pi y_q / L2)

    int n_y() const { return static_cast<int>(y_nodes.size()); }
    double phi_at(int n, int q) const { return phi[(n - 1) * y_nodes.size() + q]; }
};

// n_y_quad is the cell count of the quadrature rule; anti-aliasing requires
// n_y_quad >= 4 * N_max.
SpectralBasisY build_basis(double L2, int N_max, int n_y_quad);

// Samples of a function of (x, y) on grid nodes x tensor basis y-nodes.
struct Field2D {
    int nx = 0;
    int ny = 0;
    std::vector<double> values; // row-major, values[ix * ny + q]

    Field2D() = default;
    Field2D(int nx_, int ny_) : nx(nx_), ny(ny_), values(static_cast<std::size_t>(nx_) * ny_, 0.0) {}

    double& at(int ix, int q) { return values[static_cast<std::size_t>(ix) * ny + q]; }
    double at(int ix, int q) const { return values[static_cast<std::size_t>(ix) * ny + q]; }
};

// Fourier x-modes v_n(x) of a field, all sharing one x-grid.
struct ModeStack {
    std::shared_ptr<const Grid1D> grid;
    std::shared_ptr<const SpectralBasisY> basis;
    std::vector<int> n_indices;
    std::vector<std::vector<double>> modes;

    const std::vector<double>* mode_for(int n) const;
};

ModeStack project(const Field2D& v, std::shared_ptr<const SpectralBasisY> basis,
                  std::shared_ptr<const Grid1D> grid);

Field2D synthesize(const ModeStack& stack);

} // namespace grushin
