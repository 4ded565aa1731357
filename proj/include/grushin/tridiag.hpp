#pragma once
// Symmetric tridiagonal kernels: LDL^T solves, Sturm-sequence eigenvalue
// counts, bisection for the k smallest eigenvalues and inverse iteration
// for their eigenvectors. Robust for the stiff potentials mu_n |x|^{2g} b(x)
// because bisection never loses small eigenvalues under a huge spectral span.

#include <span>
#include <utility>
#include <vector>

namespace grushin {

struct SymTridiag {
    std::span<const double> diag; // size n
    std::span<const double> off;  // size n-1
};

// Solve (T + shift I) x = rhs in place by LDL^T without pivoting.
// Intended for positive definite T + shift; near-zero pivots are perturbed
// so the factorization also serves shifted solves in inverse iteration.
void solve_shifted_tridiag(const SymTridiag& T, double shift, std::span<double> rhs_to_x);

// Number of eigenvalues of T strictly below x (Sturm sequence count).
int sturm_count_below(const SymTridiag& T, double x);

// Enclosing interval for the whole spectrum.
std::pair<double, double> gershgorin_bounds(const SymTridiag& T);

// k smallest eigenvalues, ascending, each bisected to relative width rel_tol.
std::vector<double> smallest_eigenvalues(const SymTridiag& T, int k, double rel_tol = 1e-13);

struct TridiagEigenpairs {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors; // Euclidean-orthonormal
};

// Eigenvalues by bisection plus inverse iteration; eigenvectors in a cluster of
// close eigenvalues are re-orthogonalized. Throws NumericError with a residual
// report if an iterate fails to converge within the iteration cap.
TridiagEigenpairs smallest_eigenpairs(const SymTridiag& T, int k);

} // namespace grushin
