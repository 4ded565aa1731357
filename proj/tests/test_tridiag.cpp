#include <doctest.h>

#include <cmath>
#include <numbers>

#include "grushin/errors.hpp"
#include "grushin/rng.hpp"
#include "grushin/tridiag.hpp"

#include "oracles.hpp"

using namespace grushin;

namespace {

// random symmetric tridiagonal with controllable definiteness
void random_tridiag(int n, double diag_shift, CounterRng& rng, std::vector<double>& d,
                    std::vector<double>& e) {
    d.resize(n);
    e.resize(n - 1);
    for (int i = 0; i < n; ++i) d[i] = diag_shift + rng.uniform(0.0, 2.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = rng.uniform(-1.0, 1.0);
}

} // namespace

TEST_CASE("shifted tridiagonal solve reproduces the right-hand side") {
    CounterRng rng(2024);
    std::vector<double> d, e;
    random_tridiag(50, 3.0, rng, d, e);
    SymTridiag T{d, e};

    std::vector<double> x(50), b(50);
    for (auto& v : b) v = rng.uniform(-1, 1);
    x = b;
    solve_shifted_tridiag(T, 0.7, x);

    // residual of (T + 0.7 I) x against b
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        double r = (d[i] + 0.7) * x[i];
        if (i > 0) r += e[i - 1] * x[i - 1];
        if (i + 1 < 50) r += e[i] * x[i + 1];
        worst = std::max(worst, std::abs(r - b[i]));
    }
    CHECK(worst < 1e-11);
}

TEST_CASE("Sturm counts agree with a dense Jacobi oracle") {
    CounterRng rng(7);
    std::vector<double> d, e;
    random_tridiag(40, 0.0, rng, d, e);
    SymTridiag T{d, e};
    const auto ev = oracles::jacobi_eigenvalues(oracles::dense_from_tridiag(d, e));

    for (double x : {-2.0, -0.5, 0.0, 0.9, 1.7, 3.5}) {
        int oracle = 0;
        for (double lambda : ev)
            if (lambda < x) ++oracle;
        CHECK(sturm_count_below(T, x) == oracle);
    }
    auto [lo, hi] = gershgorin_bounds(T);
    CHECK(sturm_count_below(T, lo) == 0);
    CHECK(sturm_count_below(T, hi) == 40);
}

TEST_CASE("bisection eigenvalues match the dense oracle") {
    CounterRng rng(5150);
    std::vector<double> d, e;
    random_tridiag(60, 1.0, rng, d, e);
    SymTridiag T{d, e};

    const auto ours = smallest_eigenvalues(T, 6);
    const auto oracle = oracles::jacobi_eigenvalues(oracles::dense_from_tridiag(d, e));
    for (int k = 0; k < 6; ++k)
        CHECK(ours[k] == doctest::Approx(oracle[k]).epsilon(1e-9));
}

TEST_CASE("discrete Dirichlet Laplacian eigenvalues hit the closed form") {
    // T = (1/h^2) tridiag(-1, 2, -1) on n interior nodes of (0, L):
    // lambda_k = (4/h^2) sin^2(k pi h / (2 L)).
    const int n_cells = 64;
    const double L = std::numbers::pi;
    const double h = L / n_cells;
    std::vector<double> d(n_cells - 1, 2.0 / (h * h)), e(n_cells - 2, -1.0 / (h * h));
    SymTridiag T{d, e};

    const auto ev = smallest_eigenvalues(T, 5);
    for (int k = 1; k <= 5; ++k) {
        const double s = std::sin(k * std::numbers::pi * h / (2.0 * L));
        const double closed = 4.0 / (h * h) * s * s;
        CHECK(ev[k - 1] == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("eigenpairs: residuals and Euclidean orthonormality") {
    CounterRng rng(31);
    std::vector<double> d, e;
    random_tridiag(80, 2.0, rng, d, e);
    SymTridiag T{d, e};

    const auto pairs = smallest_eigenpairs(T, 80); // full spectrum
    REQUIRE(pairs.values.size() == 80);
    for (int k = 0; k + 1 < 80; ++k) CHECK(pairs.values[k] <= pairs.values[k + 1] + 1e-12);

    // a dense random spectrum has tight gaps; orthogonality degrades like
    // residual / gap, so the bound here is looser than for mode operators
    for (int p = 0; p < 80; ++p) {
        for (int q = p; q < 80; ++q) {
            double dot = 0.0;
            for (int i = 0; i < 80; ++i) dot += pairs.vectors[p][i] * pairs.vectors[q][i];
            CHECK(std::abs(dot - (p == q ? 1.0 : 0.0)) < 1e-8);
        }
    }

    // completeness: expansion of a random vector carries its full mass
    std::vector<double> v(80);
    for (auto& c : v) c = rng.uniform(-1, 1);
    double mass = 0.0, captured = 0.0;
    for (double c : v) mass += c * c;
    for (int k = 0; k < 80; ++k) {
        double c = 0.0;
        for (int i = 0; i < 80; ++i) c += v[i] * pairs.vectors[k][i];
        captured += c * c;
    }
    CHECK(captured == doctest::Approx(mass).epsilon(1e-10));
}

TEST_CASE("k out of range is rejected") {
    std::vector<double> d(5, 2.0), e(4, -1.0);
    SymTridiag T{d, e};
    CHECK_THROWS_AS(smallest_eigenvalues(T, 0), std::invalid_argument);
    CHECK_THROWS_AS(smallest_eigenvalues(T, 6), std::invalid_argument);
}
