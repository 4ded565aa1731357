#include "grushin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "grushin/errors.hpp"

namespace grushin {

Grid1D build_grid(double a, double b, int n_cells) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("build_grid: domain bounds must be finite");
    if (!(a < b))
        throw ConfigError("build_grid: require a < b");
    if (n_cells < 4)
        throw ConfigError("build_grid: require n_cells >= 4");

    Grid1D g;
    g.a = a;
    g.b = b;
    g.n_cells = n_cells;
    g.h = (b - a) / n_cells;
    g.nodes.resize(n_cells - 1);
    for (int i = 0; i < n_cells - 1; ++i)
        g.nodes[i] = a + (i + 1) * g.h;
    return g;
}

IndexRange restrict_to(const Grid1D& grid, double lo, double hi) {
    const auto& x = grid.nodes;
    auto first = std::upper_bound(x.begin(), x.end(), lo);
    auto last = std::lower_bound(x.begin(), x.end(), hi);
    IndexRange r;
    r.first = static_cast<int>(first - x.begin());
    r.last = static_cast<int>(last - x.begin());
    if (r.last < r.first) r.last = r.first;
    return r;
}

double l2_inner(std::span<const double> f, std::span<const double> g, const Grid1D& grid) {
    if (f.size() != g.size() || static_cast<int>(f.size()) != grid.n_nodes())
        throw std::invalid_argument("l2_inner: length mismatch with grid");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return grid.h * s;
}

double l2_norm(std::span<const double> f, const Grid1D& grid) {
    return std::sqrt(l2_inner(f, f, grid));
}

Grid1D subgrid_aligned(const Grid1D& grid, double lo, double hi) {
    // Snap endpoints inward onto parent nodes.
    const double tol = 1e-12 * (grid.b - grid.a);
    long k_lo = static_cast<long>(std::ceil((lo - grid.a) / grid.h - tol));
    long k_hi = static_cast<long>(std::floor((hi - grid.a) / grid.h + tol));
    k_lo = std::max(k_lo, 1L);
    k_hi = std::min(k_hi, static_cast<long>(grid.n_cells) - 1);
    const long cells = k_hi - k_lo;
    if (cells < 4)
        throw NumericError("subgrid_aligned: fewer than 4 cells inside the window; refine the grid");
    Grid1D sub = build_grid(grid.a + k_lo * grid.h, grid.a + k_hi * grid.h, static_cast<int>(cells));
    return sub;
}

int subgrid_parent_offset(const Grid1D& grid, const Grid1D& sub) {
    // sub.nodes[0] = sub.a + h = grid.a + (k+1) h, hence parent node index k.
    const long k = std::lround((sub.a - grid.a) / grid.h);
    const int offset = static_cast<int>(k);
    if (offset < 0 || offset + sub.n_nodes() > grid.n_nodes())
        throw std::invalid_argument("subgrid_parent_offset: subgrid not contained in parent");
    for (int j = 0; j < sub.n_nodes(); ++j) {
        if (std::abs(grid.nodes[offset + j] - sub.nodes[j]) > 1e-10 * (grid.b - grid.a))
            throw std::invalid_argument("subgrid_parent_offset: subgrid nodes not aligned with parent");
    }
    return offset;
}

void validate_subdomain(const SubdomainSpec& s, const Grid1D& grid) {
    if (!(s.lo < s.hi))
        throw ConfigError("subdomain: require lo < hi");
    if (!(s.lo > grid.a && s.hi < grid.b))
        throw ConfigError("subdomain: [lo, hi] must be strictly inside the domain");
    if (!(s.delta > 0.0))
        throw ConfigError("subdomain: require delta > 0");
    if (s.lo <= 0.0 && s.hi >= 0.0)
        throw ConfigError("subdomain: interval must not contain x = 0");
    const double min_abs = std::min(std::abs(s.lo), std::abs(s.hi));
    if (min_abs < s.delta)
        throw ConfigError("subdomain: |x| >= delta fails on [lo, hi]");
}

ProfileSpec ProfileSpec::constant_profile(double value) {
    ProfileSpec p;
    p.kind = Kind::Constant;
    p.constant = value;
    return p;
}

ProfileSpec ProfileSpec::bump_profile(double center, double width, double amplitude) {
    if (!(width > 0.0))
        throw ConfigError("bump profile: require width > 0");
    ProfileSpec p;
    p.kind = Kind::Bump;
    p.bump = {center, width, amplitude};
    return p;
}

ProfileSpec ProfileSpec::table_profile(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("table profile: need matching x/y with at least 2 knots");
    if (!std::is_sorted(x.begin(), x.end()))
        throw ConfigError("table profile: knots must be increasing");
    ProfileSpec p;
    p.kind = Kind::Table;
    p.table = {std::move(x), std::move(y)};
    return p;
}

double ProfileSpec::evaluate(double x) const {
    switch (kind) {
    case Kind::Constant:
        return constant;
    case Kind::Bump: {
        const double t = (x - bump.center) / bump.width;
        if (std::abs(t) >= 1.0) return 1.0;
        return 1.0 + bump.amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
    case Kind::Table: {
        const auto& xs = table.x;
        const auto& ys = table.y;
        if (x <= xs.front()) return x < xs.front() ? 1.0 : ys.front();
        if (x >= xs.back()) return x > xs.back() ? 1.0 : ys.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return ys[j - 1] + w * (ys[j] - ys[j - 1]);
    }
    }
    return 1.0;
}

namespace {

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

} // namespace

double blended_coefficient_value(const ProfileSpec& profile, const SubdomainSpec& support,
                                 double margin, double x) {
    if (x <= support.lo || x >= support.hi) return 1.0;
    const double ramp = smoothstep((x - support.lo) / margin) * smoothstep((support.hi - x) / margin);
    return 1.0 + ramp * (profile.evaluate(x) - 1.0);
}

CoefficientField make_coefficient(std::shared_ptr<const Grid1D> grid, const SubdomainSpec& support,
                                  const ProfileSpec& profile, double m, double M,
                                  double lipschitz_bound, double blend_margin_frac) {
    if (!grid) throw std::invalid_argument("make_coefficient: null grid");
    validate_subdomain(support, *grid);
    if (!(m > 0.0 && m <= 1.0 && M >= 1.0))
        throw ConfigError("make_coefficient: require 0 < m <= 1 <= M");
    if (!(blend_margin_frac > 0.0 && blend_margin_frac < 0.5))
        throw ConfigError("make_coefficient: blend margin fraction out of (0, 0.5)");

    const double margin = blend_margin_frac * (support.hi - support.lo);

    CoefficientField field;
    field.grid = grid;
    field.m = m;
    field.M = M;
    field.support = support;
    field.lipschitz_bound = lipschitz_bound;
    field.samples.resize(grid->nodes.size());

    for (std::size_t i = 0; i < grid->nodes.size(); ++i) {
        const double x = grid->nodes[i];
        if (x > support.lo && x < support.hi) {
            const double raw = profile.evaluate(x);
            if (raw < m || raw > M) {
                std::ostringstream os;
                os << "make_coefficient: raw profile value " << raw << " at x = " << x
                   << " leaves [" << m << ", " << M << "]; rejected (no clipping)";
                throw ConfigError(os.str());
            }
            field.samples[i] = blended_coefficient_value(profile, support, margin, x);
        } else {
            field.samples[i] = 1.0;
        }
    }

    validate_coefficient(field);
    return field;
}

void validate_coefficient(const CoefficientField& field) {
    if (!field.grid) throw NumericError("coefficient: missing grid");
    const Grid1D& g = *field.grid;
    if (static_cast<int>(field.samples.size()) != g.n_nodes())
        throw NumericError("coefficient: sample count does not match grid");
    if (!(field.m > 0.0 && field.m <= 1.0 && field.M >= 1.0))
        throw NumericError("coefficient: require 0 < m <= 1 <= M");

    const double tol = 1e-12;
    for (int i = 0; i < g.n_nodes(); ++i) {
        const double x = g.nodes[i];
        const double v = field.samples[i];
        if (v < field.m - tol || v > field.M + tol) {
            std::ostringstream os;
            os << "coefficient: sample " << v << " at node " << i << " (x = " << x
               << ") violates bounds [" << field.m << ", " << field.M << "]";
            throw NumericError(os.str());
        }
        if ((x <= field.support.lo || x >= field.support.hi) && v != 1.0) {
            std::ostringstream os;
            os << "coefficient: sample at x = " << x << " outside the support must equal 1 exactly";
            throw NumericError(os.str());
        }
    }
    for (int i = 0; i + 1 < g.n_nodes(); ++i) {
        const double slope = std::abs(field.samples[i + 1] - field.samples[i]) / g.h;
        if (slope > field.lipschitz_bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "coefficient: discrete Lipschitz bound exceeded between nodes " << i << " and "
               << i + 1 << " (slope " << slope << " > " << field.lipschitz_bound << ")";
            throw NumericError(os.str());
        }
    }
}

} // namespace grushin
