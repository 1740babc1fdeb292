#pragma once

// Pass 1: orthogonal flux-aligned coordinates (ζ, η) built by streamline
// integration. ζ = f0(ψ − ψ0) and dη = h(−ψ_y dx + ψ_x dy), where h is
// carried along each ζ line by ∇ψ·∇h = −hΔψ.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "gridforge/error.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/grid.hpp"
#include "gridforge/ode.hpp"
#include "gridforge/parallel.hpp"

namespace gridforge {

/// Weight w in the adapted orthogonal grid (h is replaced by h/w).
enum class WeightMode {
    unity,    ///< w = 1
    grad_psi, ///< w = |∇ψ|; η becomes proportional to arc length on the first line
};

/// Which boundary contour carries the prescribed η discretization.
enum class FirstLine { inner, outer };

inline double weight_value(WeightMode mode, const FluxJet& j)
{
    return mode == WeightMode::unity ? 1.0 : std::sqrt(j.grad_sq());
}

struct FluxAlignedGrid : CurvilinearGrid {
    /// Coefficient of the η 1-form, dη = h(−ψ_y dx + ψ_x dy); weight included.
    std::vector<double> h;
    double f0 = 0.0;
    double psi0 = 0.0; ///< contour at ζ = 0 (the first line)
    double psi1 = 0.0; ///< contour at ζ = ζ1
    WeightMode weight = WeightMode::unity;
    ThetaFrame frame;
    double closure_error = 0.0; ///< distance between η = 0 and η = 2π on the first line

    double zeta1() const { return coord1_max; }
    std::size_t n_zeta() const { return n1(); }
    std::size_t n_eta() const { return n2(); }
};

struct OrthogonalOptions {
    WeightMode weight = WeightMode::unity;
    FirstLine first_line = FirstLine::inner;
    std::optional<ThetaFrame> frame;  ///< θ center; estimated from `center_hint` if absent
    std::optional<Point> center_hint; ///< a point inside the first-line contour
    double search_radius = 1.0;       ///< initial ray length when searching for contours
    IntegratorConfig ode{};
    double closure_tolerance = 1e-8;  ///< relative to the first-line extent
};

struct F0Result {
    double f0 = 0.0;
    double perimeter = 0.0; ///< arc length of the contour (diagnostic)
};

namespace detail {

inline void require_gradient(const FluxJet& j)
{
    if (!(j.grad_sq() > 0.0) || !std::isfinite(j.grad_sq()))
        numerical_failure("vanishing_gradient", "grad psi vanishes on a streamline");
}

/// Contour point along a ray, growing the ray until a crossing is found.
template <FluxFunction F>
Point contour_on_ray(const F& field, Point origin, Point dir, double psi, double radius, double psi_scale)
{
    for (int attempt = 0; attempt < 40; ++attempt, radius *= 2.0) {
        try {
            return find_flux_point(field, origin, dir, psi, radius, psi_scale, 2000);
        } catch (const Error& e) {
            if (e.code() != "bracket_failure")
                throw;
        }
    }
    numerical_failure("bracket_failure", "no contour crossing found along the search ray");
}

} // namespace detail

/// θ center as the area centroid of a 64-gon inscribed in the contour ψ = psi.
template <FluxFunction F>
ThetaFrame estimate_theta_center(const F& field, double psi, Point hint, double search_radius = 1.0)
{
    constexpr int n = 64;
    std::vector<Point> poly;
    poly.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        poly.push_back(detail::contour_on_ray(field, hint, {std::cos(a), std::sin(a)}, psi, search_radius,
                                              std::max(1.0, std::abs(psi))));
    }
    double area = 0.0, cx = 0.0, cy = 0.0;
    for (int k = 0; k < n; ++k) {
        const Point& p = poly[k];
        const Point& q = poly[(k + 1) % n];
        const double cr = p.x * q.y - q.x * p.y;
        area += cr;
        cx += (p.x + q.x) * cr;
        cy += (p.y + q.y) * cr;
    }
    area *= 0.5;
    if (!(std::abs(area) > 0.0))
        detail::numerical_failure("degenerate_contour", "estimate_theta_center: zero-area contour");
    return {{cx / (6.0 * area), cy / (6.0 * area)}};
}

/**
 * Normalization f0 = 2π / ∮ dθ (∇ψ)² / (w (ψ_x θ_y − ψ_y θ_x)).
 *
 * The contour through `start` is integrated once around in θ. The raw value
 * is replaced by its absolute value, negated when psi1 < psi0, so that ζ
 * increases from the first line towards psi1.
 */
template <FluxFunction F>
F0Result compute_f0(const F& field, Point start, double psi0, double psi1, const ThetaFrame& frame,
                    WeightMode weight, const IntegratorConfig& cfg = {})
{
    if (psi0 == psi1)
        detail::config_failure("equal_contours", "psi0 and psi1 must differ");
    auto rhs = [&](double, const State<4>& s) {
        const Point p{s[0], s[1]};
        const FluxJet j = field.jet(p);
        detail::require_gradient(j);
        const Covector dth = dtheta(frame, p);
        const double den = j.dx * dth.c2 - j.dy * dth.c1;
        if (!(std::abs(den) > 0.0))
            detail::numerical_failure("vanishing_denominator", "compute_f0: contour tangent to a theta ray");
        const double g2 = j.grad_sq();
        return State<4>{-j.dy / den, j.dx / den, g2 / (weight_value(weight, j) * den), std::sqrt(g2) / std::abs(den)};
    };
    DormandPrince<4> dp(cfg);
    const double t0 = theta(frame, start);
    const State<4> end = dp.integrate(rhs, State<4>{start.x, start.y, 0.0, 0.0}, t0, t0 + 2.0 * std::numbers::pi);
    const double raw = 2.0 * std::numbers::pi / end[2];
    F0Result r;
    r.f0 = std::abs(raw) * (psi1 > psi0 ? 1.0 : -1.0);
    r.perimeter = end[3];
    return r;
}

/**
 * Points on the first line at the prescribed η values (ascending, in [0, 2π)),
 * obtained by integrating ∂_η = (−ψ_y ∂_x + ψ_x ∂_y) / (h (∇ψ)²) with
 * h = f0 / w. The last entry of the returned vector is the η = 2π point.
 */
template <FluxFunction F>
std::vector<Point> trace_boundary(const F& field, Point start, std::span<const double> eta_nodes, double f0,
                                  WeightMode weight, const IntegratorConfig& cfg = {})
{
    for (std::size_t j = 0; j < eta_nodes.size(); ++j) {
        if (eta_nodes[j] < 0.0 || eta_nodes[j] >= 2.0 * std::numbers::pi || (j > 0 && eta_nodes[j] <= eta_nodes[j - 1]))
            detail::config_failure("bad_nodes", "eta nodes must be ascending in [0, 2pi)");
    }
    auto rhs = [&](double, const State<2>& s) {
        const FluxJet j = field.jet({s[0], s[1]});
        detail::require_gradient(j);
        const double hw = f0 / weight_value(weight, j);
        const double den = hw * j.grad_sq();
        return State<2>{-j.dy / den, j.dx / den};
    };
    std::vector<double> targets(eta_nodes.begin(), eta_nodes.end());
    targets.push_back(2.0 * std::numbers::pi);
    DormandPrince<2> dp(cfg);
    std::vector<Point> out;
    out.reserve(targets.size());
    for (const State<2>& s : dp.integrate_through(rhs, State<2>{start.x, start.y}, 0.0, targets))
        out.push_back({s[0], s[1]});
    return out;
}

/// One ζ line: positions and h at each requested ζ, plus the ζ1 end point.
struct RadialLine {
    std::vector<State<3>> nodes; ///< (x, y, h)
    State<3> end{};              ///< at ζ = ζ1
};

/// Integrates dx/dζ = ψ_x/(f0(∇ψ)²), dy/dζ = ψ_y/(f0(∇ψ)²), dh/dζ = −Δψ h/(f0(∇ψ)²).
template <FluxFunction F>
RadialLine extend_radial_line(const F& field, Point start, double h0, std::span<const double> zeta_nodes, double f0,
                              double zeta1, const IntegratorConfig& cfg = {})
{
    auto rhs = [&](double, const State<3>& s) {
        const FluxJet j = field.jet({s[0], s[1]});
        detail::require_gradient(j);
        const double den = f0 * j.grad_sq();
        return State<3>{j.dx / den, j.dy / den, -j.laplacian() * s[2] / den};
    };
    DormandPrince<3> dp(cfg);
    RadialLine line;
    State<3> y{start.x, start.y, h0};
    double t = 0.0;
    for (double z : zeta_nodes) {
        y = dp.integrate(rhs, y, t, z);
        t = z;
        line.nodes.push_back(y);
    }
    line.end = dp.integrate(rhs, y, t, zeta1);
    return line;
}

/**
 * Fills the full node arrays from first-line points (step 4) and evaluates
 * ζ_x = f0 ψ_x, ζ_y = f0 ψ_y, η_x = −h ψ_y, η_y = h ψ_x (step 5).
 *
 * `boundary` holds the first-line points at `eta_nodes`; zeta_nodes ⊂ [0, ζ1].
 */
template <FluxFunction F>
FluxAlignedGrid extend_radial(const F& field, std::span<const Point> boundary, std::span<const double> zeta_nodes,
                              std::span<const double> eta_nodes, double f0, double zeta1, WeightMode weight,
                              const IntegratorConfig& cfg = {})
{
    if (boundary.size() < eta_nodes.size())
        detail::config_failure("bad_nodes", "extend_radial: fewer boundary points than eta nodes");
    for (std::size_t i = 0; i < zeta_nodes.size(); ++i) {
        const double z = zeta_nodes[i];
        if (z < 0.0 || z > zeta1 * (1 + 1e-14) || (i > 0 && z <= zeta_nodes[i - 1]))
            detail::config_failure("bad_nodes", "zeta nodes must be ascending in [0, zeta1]");
    }
    FluxAlignedGrid g;
    g.coord1.assign(zeta_nodes.begin(), zeta_nodes.end());
    g.coord2.assign(eta_nodes.begin(), eta_nodes.end());
    g.coord1_max = zeta1;
    g.f0 = f0;
    g.weight = weight;
    g.resize_nodes();
    g.h.assign(g.size(), 0.0);
    const std::size_t ne = eta_nodes.size();
    g.inner.resize(ne);
    g.outer.resize(ne);

    auto store_curve = [&](BoundaryCurve& c, std::size_t j, const State<3>& s) {
        const FluxJet jt = field.jet({s[0], s[1]});
        const double den = s[2] * jt.grad_sq();
        c.x[j] = s[0];
        c.y[j] = s[1];
        c.dx[j] = -jt.dy / den;
        c.dy[j] = jt.dx / den;
        c.g1x[j] = f0 * jt.dx;
        c.g1y[j] = f0 * jt.dy;
        c.g2x[j] = -s[2] * jt.dy;
        c.g2y[j] = s[2] * jt.dx;
    };

    parallel_for(ne, [&](std::size_t j) {
        const Point p0 = boundary[j];
        const FluxJet j0 = field.jet(p0);
        detail::require_gradient(j0);
        const double h0 = f0 / weight_value(weight, j0);
        const RadialLine line = extend_radial_line(field, p0, h0, zeta_nodes, f0, zeta1, cfg);
        for (std::size_t i = 0; i < zeta_nodes.size(); ++i) {
            const std::size_t k = g.index(i, j);
            const State<3>& s = line.nodes[i];
            const FluxJet jt = field.jet({s[0], s[1]});
            g.x[k] = s[0];
            g.y[k] = s[1];
            g.h[k] = s[2];
            g.d1x[k] = f0 * jt.dx;
            g.d1y[k] = f0 * jt.dy;
            g.d2x[k] = -s[2] * jt.dy;
            g.d2y[k] = s[2] * jt.dx;
        }
        store_curve(g.inner, j, State<3>{p0.x, p0.y, h0});
        store_curve(g.outer, j, line.end);
    });
    return g;
}

/// Explicit-node variant of the five-step algorithm. `zeta_fractions` ⊂ [0, 1]
/// are scaled by ζ1 once f0 is known; `eta_nodes` ⊂ [0, 2π).
template <FluxFunction F>
FluxAlignedGrid generate_orthogonal_nodes(const F& field, double psi0, double psi1,
                                          std::span<const double> zeta_fractions,
                                          std::span<const double> eta_nodes, const OrthogonalOptions& opt)
{
    if (psi0 == psi1)
        detail::config_failure("equal_contours", "psi0 and psi1 must differ");
    if (opt.first_line == FirstLine::outer)
        std::swap(psi0, psi1);
    const double psi_scale = std::abs(psi1 - psi0);

    ThetaFrame frame;
    if (opt.frame) {
        frame = *opt.frame;
    } else {
        if (!opt.center_hint)
            detail::config_failure("missing_center", "either a theta frame or a center hint is required");
        frame = estimate_theta_center(field, psi0, *opt.center_hint, opt.search_radius);
    }
    // step 1: η = 0 on the horizontal ray through the θ center
    const Point start = detail::contour_on_ray(field, frame.center, {1.0, 0.0}, psi0, opt.search_radius, psi_scale);
    // step 2
    const F0Result f = compute_f0(field, start, psi0, psi1, frame, opt.weight, opt.ode);
    const double zeta1 = f.f0 * (psi1 - psi0);
    // step 3
    const std::vector<Point> line = trace_boundary(field, start, eta_nodes, f.f0, opt.weight, opt.ode);
    const Point closing = line.back();
    double extent = 0.0;
    for (const Point& p : line)
        extent = std::max(extent, std::hypot(p.x - frame.center.x, p.y - frame.center.y));
    const double closure = std::hypot(closing.x - start.x, closing.y - start.y);
    if (!(closure <= opt.closure_tolerance * std::max(extent, 1e-300))) {
        std::ostringstream os;
        os << "first-line trace does not close: gap " << closure << " vs extent " << extent;
        detail::numerical_failure("closure_failure", os.str());
    }
    // steps 4 and 5
    std::vector<double> zeta(zeta_fractions.size());
    for (std::size_t i = 0; i < zeta.size(); ++i)
        zeta[i] = zeta_fractions[i] * zeta1;
    FluxAlignedGrid g = extend_radial(field, std::span<const Point>(line.data(), eta_nodes.size()), zeta, eta_nodes,
                                      f.f0, zeta1, opt.weight, opt.ode);
    g.psi0 = psi0;
    g.psi1 = psi1;
    g.frame = frame;
    g.closure_error = closure;
    return g;
}

/// Uniform nodes at cell centers: ((i+½)/n) ζ1 and (j+½) 2π/n.
inline std::vector<double> cell_centers(std::size_t n, double length)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (static_cast<double>(i) + 0.5) * length / static_cast<double>(n);
    return v;
}

/// Uniform nodes including both ends of [0, length]: i·length/n, i = 0..n.
inline std::vector<double> vertex_nodes(std::size_t n, double length, bool include_end = true)
{
    std::vector<double> v(include_end ? n + 1 : n);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<double>(i) * length / static_cast<double>(n);
    return v;
}

/// Orthogonal grid on n_zeta × n_eta cells, `nodes_per_cell` Gauss–Legendre
/// points per cell and direction (1: cell centers).
template <FluxFunction F>
FluxAlignedGrid generate_orthogonal(const F& field, double psi0, double psi1, std::size_t n_zeta, std::size_t n_eta,
                                    const OrthogonalOptions& opt, std::size_t nodes_per_cell = 1)
{
    if (n_zeta < 1 || n_eta < 2)
        detail::config_failure("bad_resolution", "need n_zeta >= 1 and n_eta >= 2");
    const std::vector<double> zf = cell_nodes(n_zeta, 1.0, nodes_per_cell);
    const std::vector<double> eta = cell_nodes(n_eta, 2.0 * std::numbers::pi, nodes_per_cell);
    FluxAlignedGrid g = generate_orthogonal_nodes(field, psi0, psi1, zf, eta, opt);
    g.nodes_per_cell = nodes_per_cell;
    return g;
}

/// Flux-alignment residual |ψ(x,y) − ζ/f0 − ψ0| at every node, maximized.
template <FluxFunction F>
double flux_alignment_residual(const F& field, const FluxAlignedGrid& g)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n1(); ++i)
        for (std::size_t j = 0; j < g.n2(); ++j) {
            const std::size_t k = g.index(i, j);
            const double r = field.jet(g.point(k)).psi - g.coord1[i] / g.f0 - g.psi0;
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

/// max |g^{ζη}| / (|∇ζ||∇η|) over the nodes.
inline double max_nonorthogonality(const CurvilinearGrid& g)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double dot = g.d1x[k] * g.d2x[k] + g.d1y[k] * g.d2y[k];
        const double n = std::hypot(g.d1x[k], g.d1y[k]) * std::hypot(g.d2x[k], g.d2y[k]);
        worst = std::max(worst, std::abs(dot) / n);
    }
    return worst;
}

} // namespace gridforge
