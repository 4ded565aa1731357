#include "grushin/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "grushin/errors.hpp"
#include "grushin/rng.hpp"

namespace grushin {

namespace {

double spectrum_scale(const SymTridiag& T) {
    auto [lo, hi] = gershgorin_bounds(T);
    return std::max(std::abs(lo), std::abs(hi));
}

} // namespace

void solve_shifted_tridiag(const SymTridiag& T, double shift, std::span<double> x) {
    const std::size_t n = T.diag.size();
    if (x.size() != n || T.off.size() + 1 != n)
        throw std::invalid_argument("solve_shifted_tridiag: size mismatch");

    // Gaussian elimination with partial pivoting; row swaps introduce one
    // level of fill-in (second superdiagonal). Near-zero pivots are perturbed
    // so the solve also serves nearly singular shifts in inverse iteration.
    static thread_local std::vector<double> d, u1, u2, sub;
    d.assign(n, 0.0);
    u1.assign(n, 0.0);
    u2.assign(n, 0.0);
    sub.assign(n, 0.0);

    double pivmin = std::numeric_limits<double>::min();
    for (double v : T.off) pivmin = std::max(pivmin, 1e-30 * v * v);

    for (std::size_t i = 0; i < n; ++i) {
        d[i] = T.diag[i] + shift;
        if (i + 1 < n) u1[i] = T.off[i];
        if (i > 0) sub[i] = T.off[i - 1];
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(sub[i + 1]) > std::abs(d[i])) {
            std::swap(d[i], sub[i + 1]);
            std::swap(u1[i], d[i + 1]);
            u2[i] = u1[i + 1];
            u1[i + 1] = 0.0;
            std::swap(x[i], x[i + 1]);
        }
        if (std::abs(d[i]) < pivmin) d[i] = (d[i] < 0 ? -pivmin : pivmin);
        const double mult = sub[i + 1] / d[i];
        d[i + 1] -= mult * u1[i];
        if (i + 2 < n) u1[i + 1] -= mult * u2[i];
        x[i + 1] -= mult * x[i];
    }
    if (std::abs(d[n - 1]) < pivmin) d[n - 1] = (d[n - 1] < 0 ? -pivmin : pivmin);

    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        if (i + 1 < n) s -= u1[i] * x[i + 1];
        if (i + 2 < n) s -= u2[i] * x[i + 2];
        x[i] = s / d[i];
    }
}

int sturm_count_below(const SymTridiag& T, double x) {
    const std::size_t n = T.diag.size();
    double pivmin = std::numeric_limits<double>::min();
    for (double v : T.off) pivmin = std::max(pivmin, 1e-30 * v * v);

    int count = 0;
    double q = T.diag[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(q) < pivmin) q = -pivmin;
        q = T.diag[i] - x - T.off[i - 1] * T.off[i - 1] / q;
        if (q < 0) ++count;
    }
    return count;
}

std::pair<double, double> gershgorin_bounds(const SymTridiag& T) {
    const std::size_t n = T.diag.size();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.off[i - 1]);
        if (i + 1 < n) r += std::abs(T.off[i]);
        lo = std::min(lo, T.diag[i] - r);
        hi = std::max(hi, T.diag[i] + r);
    }
    // Widen slightly so the strict count at the endpoints is unambiguous.
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    return {lo - pad, hi + pad};
}

std::vector<double> smallest_eigenvalues(const SymTridiag& T, int k, double rel_tol) {
    const int n = static_cast<int>(T.diag.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("smallest_eigenvalues: k out of range");

    auto [glo, ghi] = gershgorin_bounds(T);
    std::vector<double> values(k);
    for (int j = 1; j <= k; ++j) {
        double lo = glo, hi = ghi;
        // Invariant: count(lo) < j <= count(hi).
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break; // interval exhausted at this precision
            if (sturm_count_below(T, mid) >= j)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid)))
                break;
        }
        values[j - 1] = 0.5 * (lo + hi);
    }
    return values;
}

TridiagEigenpairs smallest_eigenpairs(const SymTridiag& T, int k) {
    const int n = static_cast<int>(T.diag.size());
    TridiagEigenpairs out;
    out.values = smallest_eigenvalues(T, k);
    out.vectors.assign(k, std::vector<double>(n));

    const double scale = spectrum_scale(T);
    const double cluster_gap = std::max(1e-6 * scale, 1e3 * std::numeric_limits<double>::min());

    CounterRng rng(0x5eedULL);
    int cluster_begin = 0;
    for (int j = 0; j < k; ++j) {
        if (j > 0 && out.values[j] - out.values[j - 1] > cluster_gap)
            cluster_begin = j;

        auto& v = out.vectors[j];
        for (double& c : v) c = rng.uniform(-1.0, 1.0);

        double residual = std::numeric_limits<double>::infinity();
        const int cap = 16;
        for (int iter = 0; iter < cap; ++iter) {
            solve_shifted_tridiag(T, -out.values[j], v);
            // Orthogonalize within the current cluster (close eigenvalues give
            // solves that collapse onto already-found directions).
            for (int p = cluster_begin; p < j; ++p) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += v[i] * out.vectors[p][i];
                for (int i = 0; i < n; ++i) v[i] -= dot * out.vectors[p][i];
            }
            double norm = 0.0;
            for (double c : v) norm += c * c;
            norm = std::sqrt(norm);
            if (norm == 0.0) {
                for (double& c : v) c = rng.uniform(-1.0, 1.0);
                continue;
            }
            for (double& c : v) c /= norm;

            // Residual ||T v - lambda v||.
            residual = 0.0;
            for (int i = 0; i < n; ++i) {
                double r = (T.diag[i] - out.values[j]) * v[i];
                if (i > 0) r += T.off[i - 1] * v[i - 1];
                if (i + 1 < n) r += T.off[i] * v[i + 1];
                residual += r * r;
            }
            residual = std::sqrt(residual);
            // Achievable floor: rounding of the residual evaluation itself.
            const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
            if (residual <= std::max(1e-9 * std::max(std::abs(out.values[j]), 1.0), floor))
                break;
        }
        const double floor = 256.0 * std::numeric_limits<double>::epsilon() * scale;
        if (!(residual <= std::max(1e-8 * std::abs(out.values[j]), floor))) {
            std::ostringstream os;
            os << "smallest_eigenpairs: inverse iteration did not converge for eigenvalue "
               << j + 1 << " (lambda = " << out.values[j] << ", residual = " << residual << ")";
            throw NumericError(os.str());
        }
    }
    return out;
}

} // namespace grushin
