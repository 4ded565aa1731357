#pragma once
// Test-only oracles, independent of the library solver paths.

#include <cmath>
#include <span>
#include <vector>

namespace oracles {

// Dense symmetric eigenvalues by cyclic Jacobi rotations. O(n^3) per sweep;
// intended for the moderate sizes used in tests. Ascending order.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a, int max_sweeps = 60) {
    const int n = static_cast<int>(a.size());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline std::vector<std::vector<double>> dense_from_tridiag(std::span<const double> diag,
                                                           std::span<const double> off) {
    const int n = static_cast<int>(diag.size());
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        a[i][i] = diag[i];
        if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = off[i];
    }
    return a;
}

} // namespace oracles
