#pragma once

// Grid quality metrics and the two analytic benchmark problems.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "gridforge/error.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/grid.hpp"
#include "gridforge/ode.hpp"
#include "gridforge/tensor.hpp"

namespace gridforge {

namespace detail {

inline double spacing1(const CurvilinearGrid& g) { return g.coord1_max / static_cast<double>(g.cells1()); }
inline double spacing2(const CurvilinearGrid& g) { return 2.0 * std::numbers::pi / static_cast<double>(g.cells2()); }

/// True when the nodes are the Gauss–Legendre points of uniform cells on [0, coord1_max] × [0, 2π).
inline bool standard_layout(const CurvilinearGrid& g)
{
    const std::size_t p = g.nodes_per_cell;
    if (p < 1 || g.n1() % p != 0 || g.n2() % p != 0 || g.n1() == 0 || g.n2() == 0)
        return false;
    const std::vector<double> a = cell_nodes(g.cells1(), g.coord1_max, p);
    const std::vector<double> b = cell_nodes(g.cells2(), 2.0 * std::numbers::pi, p);
    for (std::size_t i = 0; i < g.n1(); ++i)
        if (std::abs(g.coord1[i] - a[i]) > 1e-9 * g.coord1_max)
            return false;
    for (std::size_t j = 0; j < g.n2(); ++j)
        if (std::abs(g.coord2[j] - b[j]) > 1e-9)
            return false;
    return true;
}

inline void require_layout(const CurvilinearGrid& g, const char* where, bool centers_only = false)
{
    if (g.n1() < 1 || g.n2() < 3 || !(g.coord1_max > 0.0) || !standard_layout(g) ||
        (centers_only && g.nodes_per_cell != 1)) {
        std::ostringstream os;
        os << where << ": grid nodes must be " << (centers_only ? "cell centers" : "Gauss points")
           << " of a uniform partition";
        config_failure("bad_grid", os.str());
    }
}

/// Quadrature weights (including the cell size) along one direction.
inline std::vector<double> layout_weights(std::size_t cells, double length, std::size_t p)
{
    const GaussRule r = gauss_legendre(p);
    const double h = length / static_cast<double>(cells);
    std::vector<double> w;
    w.reserve(cells * p);
    for (std::size_t i = 0; i < cells; ++i)
        for (double wi : r.weights)
            w.push_back(0.5 * h * wi);
    return w;
}

} // namespace detail

/// Per-node cell lengths along the two coordinate directions.
struct CellLengths {
    std::vector<double> lu, lv;
};

/// l_u = √g |∇v| h_u and l_v = √g |∇u| h_v at every node.
inline CellLengths cell_lengths(const CurvilinearGrid& g)
{
    detail::require_layout(g, "cell_lengths");
    const double hu = detail::spacing1(g), hv = detail::spacing2(g);
    CellLengths c;
    c.lu.resize(g.size());
    c.lv.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Jacobian2 j = g.gradients(k);
        const double det = j.det();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det))
            detail::numerical_failure("degenerate_metric", "cell_lengths: singular Jacobian");
        const double sg = 1.0 / std::abs(det);
        c.lu[k] = sg * std::hypot(j.a21, j.a22) * hu;
        c.lv[k] = sg * std::hypot(j.a11, j.a12) * hv;
    }
    return c;
}

struct SizeRatios {
    double a_u = 1.0, a_v = 1.0;
};

inline SizeRatios size_ratios(const CellLengths& c)
{
    if (c.lu.empty() || c.lv.empty())
        detail::config_failure("empty_lengths", "size_ratios: no cell lengths");
    auto ratio = [](const std::vector<double>& l) {
        const auto [lo, hi] = std::minmax_element(l.begin(), l.end());
        if (!(*lo > 0.0))
            detail::numerical_failure("nonpositive_length", "size_ratios: nonpositive cell length");
        return *hi / *lo;
    };
    return {ratio(c.lu), ratio(c.lv)};
}

/**
 * ∫√g d1 d2 over the grid. With cell centers: periodic rule in coord2 and,
 * in coord1, the midpoint rule with the h²/24 endpoint correction (end
 * slopes from one-sided quadratics). Otherwise Gauss quadrature per cell.
 */
inline double domain_area(const CurvilinearGrid& g)
{
    detail::require_layout(g, "domain_area");
    const std::size_t n1 = g.n1(), p = g.nodes_per_cell;
    const std::vector<double> w2 = detail::layout_weights(g.cells2(), 2.0 * std::numbers::pi, p);
    std::vector<double> row(n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < g.n2(); ++j)
            row[i] += w2[j] / std::abs(g.gradients(g.index(i, j)).det());
    const std::vector<double> w1 = detail::layout_weights(g.cells1(), g.coord1_max, p);
    double sum = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
        sum += w1[i] * row[i];
    if (p == 1 && n1 >= 3) {
        const double h1 = detail::spacing1(g);
        const double da = (-2 * row[0] + 3 * row[1] - row[2]) / h1;
        const double db = (2 * row[n1 - 1] - 3 * row[n1 - 2] + row[n1 - 3]) / h1;
        sum += h1 * h1 / 24.0 * (db - da);
    }
    return sum;
}

namespace detail {

/// Gregory rule on equispaced samples f_0..f_n (exact for cubics).
inline double gregory(const std::vector<double>& f, double h)
{
    const std::size_t n = f.size() - 1;
    double t = 0.5 * (f[0] + f[n]);
    for (std::size_t i = 1; i < n; ++i)
        t += f[i];
    t *= h;
    if (n < 6)
        return t;
    const double d1a = f[1] - f[0], d1b = f[n] - f[n - 1];
    const double d2a = f[2] - 2 * f[1] + f[0], d2b = f[n] - 2 * f[n - 1] + f[n - 2];
    const double d3a = f[3] - 3 * f[2] + 3 * f[1] - f[0], d3b = f[n] - 3 * f[n - 1] + 3 * f[n - 2] - f[n - 3];
    return t - h / 12.0 * (d1b - d1a) - h / 24.0 * (d2b + d2a) - 19.0 * h / 720.0 * (d3b - d3a);
}

} // namespace detail

/// ∫√g d1 d2 on a vertex lattice: rows at i·coord1_max/(n1−1) including both
/// ends, columns at j·2π/n2.
inline double lattice_area(const CurvilinearGrid& g)
{
    const std::size_t n1 = g.n1(), n2 = g.n2();
    if (n1 < 2 || n2 < 3)
        detail::config_failure("bad_grid", "lattice_area: lattice too small");
    const double h1 = g.coord1_max / static_cast<double>(n1 - 1), h2 = 2.0 * std::numbers::pi / static_cast<double>(n2);
    for (std::size_t i = 0; i < n1; ++i)
        if (std::abs(g.coord1[i] - static_cast<double>(i) * h1) > 1e-9 * g.coord1_max)
            detail::config_failure("bad_grid", "lattice_area: rows must be equispaced and include both ends");
    for (std::size_t j = 0; j < n2; ++j)
        if (std::abs(g.coord2[j] - static_cast<double>(j) * h2) > 1e-9)
            detail::config_failure("bad_grid", "lattice_area: columns must be equispaced from 0");
    std::vector<double> row(n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            row[i] += h2 / std::abs(g.gradients(g.index(i, j)).det());
    return detail::gregory(row, h1);
}

/// Area between the boundary curves, |∮_outer x dy − ∮_inner x dy|.
inline double green_area(const CurvilinearGrid& g)
{
    const std::vector<double> w2 = detail::layout_weights(g.cells2(), 2.0 * std::numbers::pi, g.nodes_per_cell);
    auto loop = [&](const BoundaryCurve& c) {
        if (c.size() != g.n2())
            detail::config_failure("bad_grid", "green_area: boundary curves must sample the coord2 nodes");
        double s = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j)
            s += w2[j] * c.x[j] * c.dy[j];
        return s;
    };
    return std::abs(loop(g.outer) - loop(g.inner));
}

/// max angle (radians) between ∇coord1 and ∇coord2's normal on both boundary curves.
inline double boundary_orthogonality(const CurvilinearGrid& g)
{
    double worst = 0.0;
    for (const BoundaryCurve* c : {&g.inner, &g.outer})
        for (std::size_t j = 0; j < c->size(); ++j) {
            const double dot = c->g1x[j] * c->g2x[j] + c->g1y[j] * c->g2y[j];
            const double n = std::hypot(c->g1x[j], c->g1y[j]) * std::hypot(c->g2x[j], c->g2y[j]);
            worst = std::max(worst, std::asin(std::min(1.0, std::abs(dot) / n)));
        }
    return worst;
}

/// max |∇1·∇2| / (|∇1||∇2|) over the nodes.
inline double interior_nonorthogonality(const CurvilinearGrid& g)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double dot = g.d1x[k] * g.d2x[k] + g.d1y[k] * g.d2y[k];
        const double n = std::hypot(g.d1x[k], g.d1y[k]) * std::hypot(g.d2x[k], g.d2y[k]);
        worst = std::max(worst, std::abs(dot) / n);
    }
    return worst;
}

struct QualityReport {
    double lu_min = 0, lu_max = 0, lv_min = 0, lv_max = 0;
    double a_u = 1, a_v = 1;
    double area = 0;
    double green_area = 0;
    double boundary_angle = 0;
    double nonorthogonality = 0;
};

inline QualityReport quality_report(const CurvilinearGrid& g)
{
    const CellLengths c = cell_lengths(g);
    QualityReport q;
    const auto [u0, u1] = std::minmax_element(c.lu.begin(), c.lu.end());
    const auto [v0, v1] = std::minmax_element(c.lv.begin(), c.lv.end());
    q.lu_min = *u0;
    q.lu_max = *u1;
    q.lv_min = *v0;
    q.lv_max = *v1;
    const SizeRatios r = size_ratios(c);
    q.a_u = r.a_u;
    q.a_v = r.a_v;
    q.area = domain_area(g);
    if (g.inner.size() == g.n2() && g.outer.size() == g.n2()) {
        q.green_area = green_area(g);
        if (g.inner.g1x.size() == g.n2())
            q.boundary_angle = boundary_orthogonality(g);
    }
    q.nonorthogonality = interior_nonorthogonality(g);
    return q;
}

enum class ErrorNorm { max, l2 };

/**
 * Mismatch between the inverted stored gradients (x_1, x_2, y_1, y_2) and
 * second-order differences of the node positions. `max`: worst node, each
 * column relative to its own magnitude. `l2`: √g-weighted over the grid,
 * columns scaled by the cell size.
 */
inline double jacobian_consistency(const CurvilinearGrid& g, ErrorNorm norm = ErrorNorm::max)
{
    detail::require_layout(g, "jacobian_consistency", true);
    const std::size_t n1 = g.n1(), n2 = g.n2();
    if (n1 < 3)
        detail::config_failure("bad_grid", "jacobian_consistency needs at least 3 rows");
    const double h1 = detail::spacing1(g), h2 = detail::spacing2(g);
    double worst = 0.0, num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            auto diff1 = [&](const std::vector<double>& f) {
                if (i == 0)
                    return (-3 * f[g.index(0, j)] + 4 * f[g.index(1, j)] - f[g.index(2, j)]) / (2 * h1);
                if (i == n1 - 1)
                    return (3 * f[g.index(i, j)] - 4 * f[g.index(i - 1, j)] + f[g.index(i - 2, j)]) / (2 * h1);
                return (f[g.index(i + 1, j)] - f[g.index(i - 1, j)]) / (2 * h1);
            };
            auto diff2 = [&](const std::vector<double>& f) {
                return (f[g.index(i, (j + 1) % n2)] - f[g.index(i, (j + n2 - 1) % n2)]) / (2 * h2);
            };
            const std::size_t k = g.index(i, j);
            const Jacobian2 inv = invert_jacobian(g.gradients(k), 0.0); // x_1 x_2 / y_1 y_2
            const double c1 = std::hypot(inv.a11, inv.a21), c2 = std::hypot(inv.a12, inv.a22);
            const double e1 = std::hypot(diff1(g.x) - inv.a11, diff1(g.y) - inv.a21);
            const double e2 = std::hypot(diff2(g.x) - inv.a12, diff2(g.y) - inv.a22);
            worst = std::max({worst, e1 / c1, e2 / c2});
            const double w = std::abs(inv.det());
            num += w * (e1 * e1 * h1 * h1 + e2 * e2 * h2 * h2);
            den += w * (c1 * c1 * h1 * h1 + c2 * c2 * h2 * h2);
        }
    return norm == ErrorNorm::max ? worst : std::sqrt(num / den);
}

/// log2(e_i / e_{i+1}) for errors at successive 2x refinements.
inline std::vector<double> convergence_order(std::span<const double> errors)
{
    if (errors.size() < 2)
        detail::config_failure("too_few_errors", "convergence_order needs at least two errors");
    std::vector<double> o;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0))
            detail::config_failure("nonpositive_error", "convergence_order needs positive errors");
        o.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    return o;
}

// ---------------------------------------------------------------------------
// Benchmark problems ∇·(χ∇f) = ρ with analytic f.

struct BenchmarkProblem {
    enum class Kind { flux_aligned, localized };
    Kind kind = Kind::flux_aligned;
    double x0 = 550.0;
    double psi0 = -20.0, psi1 = -1.0;
    double xb = 440.0, yb = -220.0, sigma = 40.0;
    ThetaFrame frame{}; ///< angle origin for the localized conduction factor

    static BenchmarkProblem flux_aligned() { return {}; }
    static BenchmarkProblem localized(Point theta_center)
    {
        BenchmarkProblem p;
        p.kind = Kind::localized;
        p.frame.center = theta_center;
        return p;
    }
    const char* name() const { return kind == Kind::flux_aligned ? "flux_aligned" : "localized"; }
};

/// Value, gradient and Laplacian of a scalar at a point.
struct ScalarJet {
    double f = 0, fx = 0, fy = 0, lap = 0;
};

inline ScalarJet analytic_solution(const BenchmarkProblem& pb, const FluxJet& j, Point p)
{
    ScalarJet s;
    if (pb.kind == BenchmarkProblem::Kind::flux_aligned) {
        const double d1 = 0.2 * (j.psi - pb.psi1), d2 = 0.2;
        s.f = 0.1 * (j.psi - pb.psi0) * (j.psi - 2 * pb.psi1 + pb.psi0);
        s.fx = d1 * j.dx;
        s.fy = d1 * j.dy;
        s.lap = d2 * j.grad_sq() + d1 * j.laplacian();
        return s;
    }
    const double s2 = pb.sigma * pb.sigma;
    const double dx = p.x - pb.xb, dy = p.y - pb.yb;
    const double q = (dx * dx + dy * dy) / s2;
    if (q >= 1.0)
        return s;
    const double r = q - 1.0;
    const double f = std::exp(1.0 + 1.0 / r);
    const double g1 = -1.0 / (r * r), g2 = 2.0 / (r * r * r);
    const double qx = 2 * dx / s2, qy = 2 * dy / s2;
    s.f = f;
    s.fx = f * g1 * qx;
    s.fy = f * g1 * qy;
    s.lap = f * ((g1 * g1 + g2) * (qx * qx + qy * qy) + g1 * 4.0 / s2);
    return s;
}

/// Scalar conduction χ and its gradient.
inline ScalarJet benchmark_chi(const BenchmarkProblem& pb, const FluxJet& j, Point p)
{
    if (!(p.x > 0.0))
        detail::numerical_failure("domain_error", "benchmark conduction needs x > 0");
    const double a = pb.x0 / p.x, ax = -pb.x0 / (p.x * p.x);
    const double s = std::sqrt(1.0 + j.grad_sq());
    const double sx = (j.dx * j.dxx + j.dy * j.dxy) / s, sy = (j.dx * j.dxy + j.dy * j.dyy) / s;
    double m = 1.0, mx = 0.0, my = 0.0;
    if (pb.kind == BenchmarkProblem::Kind::localized) {
        const double rx = p.x - pb.frame.center.x, ry = p.y - pb.frame.center.y;
        const double r2 = rx * rx + ry * ry;
        if (!(r2 > 0.0))
            detail::numerical_failure("center_point", "benchmark conduction evaluated at the angle center");
        const double r = std::sqrt(r2);
        const Covector dt = dtheta(pb.frame, p);
        m = 1.0 + 0.5 * ry / r;
        mx = 0.5 * (rx / r) * dt.c1;
        my = 0.5 * (rx / r) * dt.c2;
    }
    ScalarJet c;
    c.f = a * s * m;
    c.fx = ax * s * m + a * sx * m + a * s * mx;
    c.fy = a * sy * m + a * s * my;
    return c;
}

/// ρ = ∇·(χ∇f) = χ Δf + ∇χ·∇f.
inline double rhs_for(const BenchmarkProblem& pb, const FluxJet& j, Point p)
{
    const ScalarJet f = analytic_solution(pb, j, p);
    if (f.fx == 0.0 && f.fy == 0.0 && f.lap == 0.0)
        return 0.0;
    const ScalarJet c = benchmark_chi(pb, j, p);
    return c.f * f.lap + c.fx * f.fx + c.fy * f.fy;
}

struct BenchmarkResult {
    std::vector<double> numeric, exact;
    double rel_error = 0.0;
};

/// (∫√g (a−b)² / ∫√g b²)^{1/2} with the node volume elements.
inline double relative_l2_error(const CurvilinearGrid& g, std::span<const double> a, std::span<const double> b)
{
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double w = 1.0 / std::abs(g.gradients(k).det());
        num += w * (a[k] - b[k]) * (a[k] - b[k]);
        den += w * b[k] * b[k];
    }
    if (!(den > 0.0))
        detail::numerical_failure("zero_norm", "relative error of an identically zero field");
    return std::sqrt(num / den);
}

namespace detail {

/// Sparse linear form Σ c_k f_k + constant.
struct LinearForm {
    std::vector<std::pair<std::size_t, double>> terms;
    double constant = 0.0;

    void add(std::size_t k, double c) { terms.emplace_back(k, c); }
    void add_scaled(const LinearForm& o, double s)
    {
        for (const auto& [k, c] : o.terms)
            terms.emplace_back(k, s * c);
        constant += s * o.constant;
    }
};

} // namespace detail

/**
 * Solves ∇·(χ∇f) = ρ on a cell-centered grid in divergence form,
 * ∂_i(√g χ g^{ij} ∂_j f) = √g ρ, second order. The coord1 = 0 row lies on
 * `psi_inner`, the last row on `psi_outer`; the row on the problem's psi1
 * gets a Neumann condition for the flux-aligned problem, Dirichlet otherwise.
 */
template <FluxFunction F>
BenchmarkResult solve_benchmark(const F& field, const CurvilinearGrid& g, double psi_inner, double psi_outer,
                                const BenchmarkProblem& pb)
{
    detail::require_layout(g, "solve_benchmark", true);
    const std::size_t n1 = g.n1(), n2 = g.n2(), n = g.size();
    if (n1 < 3 || n2 < 4)
        detail::config_failure("bad_grid", "solve_benchmark needs at least 3x4 nodes");
    if (g.inner.size() != n2 || g.outer.size() != n2)
        detail::config_failure("bad_grid", "solve_benchmark needs boundary curves at the coord2 nodes");
    const double h1 = detail::spacing1(g), h2 = detail::spacing2(g);
    const double tol = 1e-6 * std::abs(pb.psi1 - pb.psi0);
    auto is_neumann = [&](double psi) {
        return pb.kind == BenchmarkProblem::Kind::flux_aligned && std::abs(psi - pb.psi1) <= tol;
    };
    const bool neumann_lo = is_neumann(psi_inner), neumann_hi = is_neumann(psi_outer);

    // nodal coefficients A^{ij} = √g χ g^{ij}, source √g ρ, exact solution
    std::vector<double> A11(n), A12(n), A22(n), src(n), exact(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Point p = g.point(k);
        const FluxJet jt = field.jet(p);
        const Jacobian2 j = g.gradients(k);
        const double sg = 1.0 / std::abs(j.det());
        const double chi = benchmark_chi(pb, jt, p).f;
        A11[k] = sg * chi * (j.a11 * j.a11 + j.a12 * j.a12);
        A12[k] = sg * chi * (j.a11 * j.a21 + j.a12 * j.a22);
        A22[k] = sg * chi * (j.a21 * j.a21 + j.a22 * j.a22);
        src[k] = sg * rhs_for(pb, jt, p);
        exact[k] = analytic_solution(pb, jt, p).f;
    }
    std::vector<double> f_lo(n2), f_hi(n2);
    for (std::size_t j = 0; j < n2; ++j) {
        const Point a{g.inner.x[j], g.inner.y[j]}, b{g.outer.x[j], g.outer.y[j]};
        f_lo[j] = analytic_solution(pb, field.jet(a), a).f;
        f_hi[j] = analytic_solution(pb, field.jet(b), b).f;
    }
    auto K = [&](std::size_t i, std::size_t j) { return g.index(i, j % n2); };
    auto jm = [&](std::size_t j) { return (j + n2 - 1) % n2; };

    // ∂_1 f at node (i, j), second order with the boundary data
    auto d1 = [&](std::size_t i, std::size_t j) {
        j %= n2;
        detail::LinearForm L;
        if (i == 0) {
            if (neumann_lo) {
                L.add(K(1, j), 0.5 / h1);
                L.add(K(0, j), -0.5 / h1);
            } else {
                L.constant = -4.0 / 3.0 * f_lo[j] / h1;
                L.add(K(0, j), 1.0 / h1);
                L.add(K(1, j), 1.0 / (3.0 * h1));
            }
        } else if (i == n1 - 1) {
            if (neumann_hi) {
                L.add(K(i, j), 0.5 / h1);
                L.add(K(i - 1, j), -0.5 / h1);
            } else {
                L.constant = 4.0 / 3.0 * f_hi[j] / h1;
                L.add(K(i, j), -1.0 / h1);
                L.add(K(i - 1, j), -1.0 / (3.0 * h1));
            }
        } else {
            L.add(K(i + 1, j), 0.5 / h1);
            L.add(K(i - 1, j), -0.5 / h1);
        }
        return L;
    };
    // ∂_2 f at node (i, j), periodic
    auto d2 = [&](std::size_t i, std::size_t j) {
        detail::LinearForm L;
        L.add(K(i, j + 1), 0.5 / h2);
        L.add(K(i, jm(j)), -0.5 / h2);
        return L;
    };
    // coord1 flux through the face between rows i and i+1 (i+1 may be n1: outer boundary; i = -1 via lower())
    auto flux1_interior = [&](std::size_t i, std::size_t j) {
        const std::size_t p = K(i, j), q = K(i + 1, j);
        detail::LinearForm L;
        const double a = 0.5 * (A11[p] + A11[q]), b = 0.5 * (A12[p] + A12[q]);
        L.add(q, a / h1);
        L.add(p, -a / h1);
        L.add_scaled(d2(i, j), 0.5 * b);
        L.add_scaled(d2(i + 1, j), 0.5 * b);
        return L;
    };
    auto flux1_boundary = [&](bool outer, std::size_t j) {
        detail::LinearForm L;
        const bool neumann = outer ? neumann_hi : neumann_lo;
        if (neumann)
            return L;
        const std::size_t i0 = outer ? n1 - 1 : 0, i1 = outer ? n1 - 2 : 1;
        const double a = 1.5 * A11[K(i0, j)] - 0.5 * A11[K(i1, j)];
        const double b = 1.5 * A12[K(i0, j)] - 0.5 * A12[K(i1, j)];
        const std::vector<double>& fb = outer ? f_hi : f_lo;
        const double dfb = (fb[(j + 1) % n2] - fb[jm(j)]) / (2 * h2);
        // one-sided normal derivative from the boundary value and the first row
        const double s = outer ? 1.0 : -1.0;
        L.add(K(i0, j), -s * 2.0 * a / h1);
        L.constant = s * 2.0 * a * fb[j] / h1 + b * dfb;
        return L;
    };
    // coord2 flux through the face between columns j and j+1 of row i
    auto flux2 = [&](std::size_t i, std::size_t j) {
        const std::size_t p = K(i, j), q = K(i, j + 1);
        detail::LinearForm L;
        const double c = 0.5 * (A22[p] + A22[q]), b = 0.5 * (A12[p] + A12[q]);
        L.add(q, c / h2);
        L.add(p, -c / h2);
        L.add_scaled(d1(i, j), 0.5 * b);
        L.add_scaled(d1(i, j + 1), 0.5 * b);
        return L;
    };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * 20);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            detail::LinearForm row;
            row.add_scaled(i + 1 < n1 ? flux1_interior(i, j) : flux1_boundary(true, j), 1.0 / h1);
            row.add_scaled(i > 0 ? flux1_interior(i - 1, j) : flux1_boundary(false, j), -1.0 / h1);
            row.add_scaled(flux2(i, j), 1.0 / h2);
            row.add_scaled(flux2(i, jm(j)), -1.0 / h2);
            const std::size_t r = K(i, j);
            for (const auto& [k, c] : row.terms)
                trip.emplace_back(static_cast<int>(r), static_cast<int>(k), c);
            rhs[static_cast<Eigen::Index>(r)] = src[r] - row.constant;
        }
    Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
        detail::numerical_failure("no_convergence", "benchmark system is singular");
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite())
        detail::numerical_failure("no_convergence", "benchmark solve failed");

    BenchmarkResult res;
    res.numeric.assign(sol.data(), sol.data() + n);
    res.exact = std::move(exact);
    res.rel_error = relative_l2_error(g, res.numeric, res.exact);
    return res;
}

} // namespace gridforge
