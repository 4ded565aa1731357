#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "grushin/eigen_analysis.hpp"
#include "grushin/errors.hpp"

using namespace grushin;

namespace {

struct SweepFixture {
    std::shared_ptr<const Grid1D> grid;
    std::shared_ptr<const CoefficientField> unit_coeff;
    SpectralBasisY basis;

    explicit SweepFixture(int n_cells, int n_max)
        : grid(std::make_shared<const Grid1D>(build_grid(-1.0, 1.0, n_cells))),
          unit_coeff(std::make_shared<const CoefficientField>(
              make_coefficient(grid, SubdomainSpec{0.3, 0.9, 0.3},
                               ProfileSpec::constant_profile(1.0), 1.0, 1.0))),
          basis(build_basis(std::numbers::pi, n_max, 4 * n_max)) {}
};

std::vector<int> range_list(int lo, int hi) {
    std::vector<int> out;
    for (int n = lo; n <= hi; ++n) out.push_back(n);
    return out;
}

} // namespace

TEST_CASE("carleman exponent by regime") {
    CHECK(carleman_exponent(1.0) == 0.5);
    CHECK(carleman_exponent(0.5) == 0.5);
    CHECK(carleman_exponent(0.49) == doctest::Approx(2.0 / 3.0));
    CHECK(carleman_exponent(0.1) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(carleman_exponent(1.5), ConfigError);
}

TEST_CASE("lambda sweep recovers the scaling exponent") {
    SweepFixture fx(1024, 32);

    SUBCASE("gamma = 1 slope near 1/2") {
        const auto rep = lambda_sweep(1.0, fx.unit_coeff, fx.basis, range_list(8, 32), fx.grid);
        CHECK(rep.fit_valid);
        CHECK(rep.slope_theory == doctest::Approx(0.5));
        CHECK(std::abs(rep.slope - 0.5) < 0.05);
        CHECK(rep.r_squared > 0.999);
        CHECK(rep.p_gamma == 0.5);
    }
    SUBCASE("gamma = 1/4 slope near 0.8") {
        const auto rep = lambda_sweep(0.25, fx.unit_coeff, fx.basis, range_list(8, 32), fx.grid);
        CHECK(std::abs(rep.slope - 0.8) < 0.05);
        CHECK(rep.p_gamma == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("ratio band and monotonicity") {
        const auto rep = lambda_sweep(0.5, fx.unit_coeff, fx.basis, range_list(8, 32), fx.grid);
        CHECK(rep.c_star_lo > 0.0);
        CHECK(rep.c_star_hi / rep.c_star_lo < 3.0);
        for (std::size_t i = 0; i + 1 < rep.lambda_list.size(); ++i)
            CHECK(rep.lambda_list[i] < rep.lambda_list[i + 1]);
    }
}

TEST_CASE("single-entry sweep carries ratios but no fit") {
    SweepFixture fx(512, 8);
    const auto rep = lambda_sweep(0.5, fx.unit_coeff, fx.basis, {8}, fx.grid);
    CHECK_FALSE(rep.fit_valid);
    CHECK(std::isnan(rep.slope));
    CHECK(rep.c_star_lo == doctest::Approx(rep.c_star_hi));
    CHECK(rep.c_star_lo > 0.0);
}

TEST_CASE("unresolved ground state is rejected, naming n") {
    SweepFixture fx(64, 64);
    CHECK_THROWS_WITH_AS(lambda_sweep(0.25, fx.unit_coeff, fx.basis, range_list(8, 64), fx.grid),
                         doctest::Contains("n = 64"), NumericError);
}

TEST_CASE("decay rate estimation against the spectral oracle") {
    auto grid = std::make_shared<const Grid1D>(build_grid(-1.0, 1.0, 512));
    auto coeff = std::make_shared<const CoefficientField>(
        make_coefficient(grid, SubdomainSpec{0.3, 0.9, 0.3},
                         ProfileSpec::constant_profile(1.0), 1.0, 1.0));
    const ModeOperator op = assemble_operator(grid, 0.5, 1.0, coeff);
    const ModeSpectrum sp = eigendecompose(op, 2);

    SUBCASE("ground eigenvector") {
        const auto traj =
            solve_mode(sp.eigenvectors[0], SourceFn{}, op, 2.0, 1e-3, Scheme::CrankNicolson, 10);
        CHECK(decay_rate_estimate(traj, *grid) ==
              doctest::Approx(sp.eigenvalues[0]).epsilon(0.02));
    }
    SUBCASE("second eigenvector") {
        const auto traj =
            solve_mode(sp.eigenvectors[1], SourceFn{}, op, 1.0, 1e-3, Scheme::CrankNicolson, 10);
        CHECK(decay_rate_estimate(traj, *grid) ==
              doctest::Approx(sp.eigenvalues[1]).epsilon(0.02));
    }
    SUBCASE("mixed data settles on the slowest mode") {
        std::vector<double> u0(op.dim());
        for (int i = 0; i < op.dim(); ++i)
            u0[i] = sp.eigenvectors[0][i] + sp.eigenvectors[1][i];
        const auto traj = solve_mode(u0, SourceFn{}, op, 3.0, 1e-3, Scheme::CrankNicolson, 10);
        CHECK(decay_rate_estimate(traj, *grid) ==
              doctest::Approx(sp.eigenvalues[0]).epsilon(0.02));
    }
    SUBCASE("error from the scheme shrinks at order two or better") {
        double prev = 0.0, order = 0.0;
        const ModeOperator stiff = assemble_operator(grid, 0.5, 256.0, coeff);
        const ModeSpectrum ssp = eigendecompose(stiff, 1);
        for (double dt : {2e-3, 1e-3}) {
            const auto traj =
                solve_mode(ssp.eigenvectors[0], SourceFn{}, stiff, 0.5, dt, Scheme::CrankNicolson, 10);
            const double err = std::abs(decay_rate_estimate(traj, *grid) - ssp.eigenvalues[0]);
            if (prev > 0.0) order = std::log2(prev / err);
            prev = err;
        }
        CHECK(order >= 1.8);
    }
    SUBCASE("underflowing trajectories are an error") {
        const ModeOperator stiff = assemble_operator(grid, 0.5, 4096.0, coeff);
        const ModeSpectrum ssp = eigendecompose(stiff, 1);
        const auto traj =
            solve_mode(ssp.eigenvectors[0], SourceFn{}, stiff, 8.0, 2e-3, Scheme::BackwardEuler, 10);
        CHECK_THROWS_WITH_AS(decay_rate_estimate(traj, *grid), doctest::Contains("shorter T"),
                             NumericError);
    }
    SUBCASE("too few steps or zero data rejected") {
        const auto traj =
            solve_mode(sp.eigenvectors[0], SourceFn{}, op, 0.01, 2e-3, Scheme::CrankNicolson, 1);
        CHECK_THROWS_AS(decay_rate_estimate(traj, *grid), std::invalid_argument);
        std::vector<double> zero(op.dim(), 0.0);
        const auto ztraj = solve_mode(zero, SourceFn{}, op, 0.1, 2e-3, Scheme::CrankNicolson, 1);
        CHECK_THROWS_AS(decay_rate_estimate(ztraj, *grid), std::invalid_argument);
    }
}
