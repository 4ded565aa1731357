#pragma once
// Uniform 1-D Dirichlet grids on Omega_1, window/subdomain bookkeeping and
// admissible coefficient fields: m <= b <= M with b identically 1 outside
// the support interval Omega_1'.

#include <memory>
#include <span>
#include <vector>

namespace grushin {

// Interior nodes only; Dirichlet boundary values are never unknowns.
struct Grid1D {
    double a = 0.0;
    double b = 0.0;
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> nodes; // nodes[i] = a + (i+1)*h, i = 0 .. n_cells-2

    int n_nodes() const { return static_cast<int>(nodes.size()); }
};

Grid1D build_grid(double a, double b, int n_cells);

// Contiguous half-open index range [first, last) of nodes strictly inside (lo, hi).
struct IndexRange {
    int first = 0;
    int last = 0;
    int count() const { return last - first; }
    bool empty() const { return last <= first; }
};

IndexRange restrict_to(const Grid1D& grid, double lo, double hi);

// h * sum_i f_i g_i (composite trapezoid with Dirichlet zeros at both ends).
double l2_inner(std::span<const double> f, std::span<const double> g, const Grid1D& grid);
double l2_norm(std::span<const double> f, const Grid1D& grid);

// Largest subgrid of `grid` contained in [lo, hi] whose boundary sits on
// parent nodes, so nodewise comparison against parent solutions needs no
// interpolation. Parent node index of subgrid node j is offset + j.
Grid1D subgrid_aligned(const Grid1D& grid, double lo, double hi);
int subgrid_parent_offset(const Grid1D& grid, const Grid1D& sub);

// An interval compactly contained in the domain and bounded away from the
// degeneracy point x = 0: |x| >= delta for every x in [lo, hi].
struct SubdomainSpec {
    double lo = 0.0;
    double hi = 0.0;
    double delta = 0.0;
};

void validate_subdomain(const SubdomainSpec& s, const Grid1D& grid);

// A plain interval (no distance-to-origin requirement), e.g. the
// observation window omega_1.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BumpProfile {
    double center = 0.0;
    double width = 1.0;
    double amplitude = 0.0;
};

struct TableProfile {
    std::vector<double> x;
    std::vector<double> y;
};

// Raw coefficient profile before support blending. The bump is the usual
// C-infinity mollifier 1 + amplitude * exp(1 - 1/(1-t^2)), t = (x-center)/width.
struct ProfileSpec {
    enum class Kind { Constant, Bump, Table };

    Kind kind = Kind::Constant;
    double constant = 1.0;
    BumpProfile bump;
    TableProfile table;

    static ProfileSpec constant_profile(double value);
    static ProfileSpec bump_profile(double center, double width, double amplitude);
    static ProfileSpec table_profile(std::vector<double> x, std::vector<double> y);

    double evaluate(double x) const;
};

struct CoefficientField {
    std::shared_ptr<const Grid1D> grid;
    std::vector<double> samples;   // b at interior nodes
    double m = 0.0;
    double M = 0.0;
    SubdomainSpec support;
    double lipschitz_bound = 50.0; // discrete surrogate for continuity
};

// Closed form of the blended coefficient at a point: 1 outside the support,
// raw profile ramped to 1 over `margin` at both support edges (C^1 ramp).
double blended_coefficient_value(const ProfileSpec& profile, const SubdomainSpec& support,
                                 double margin, double x);

// Profiles whose raw values leave [m, M] anywhere inside the support are
// rejected; there is no silent clipping.
CoefficientField make_coefficient(std::shared_ptr<const Grid1D> grid, const SubdomainSpec& support,
                                  const ProfileSpec& profile, double m, double M,
                                  double lipschitz_bound = 50.0, double blend_margin_frac = 0.05);

// Node-by-node check of every CoefficientField invariant; throws NumericError.
void validate_coefficient(const CoefficientField& field);

} // namespace grushin
