#pragma once

// Pass 2: from ū on the flux-aligned lattice to the (u, v) grid. u = c0(ū − ψ0)
// and v is its χ-dual; coordinate lines come from tracing ∂_u and ∂_v.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>
#include <utility>
#include <vector>

#include "gridforge/elliptic_solve.hpp"
#include "gridforge/grid.hpp"
#include "gridforge/interp.hpp"
#include "gridforge/ode.hpp"
#include "gridforge/parallel.hpp"

namespace gridforge {

/**
 * Grid in (u, v) ∈ [0, u1] × [0, 2π). `coord1`/`coord2` hold the u and v
 * nodes; d1x, d1y, d2x, d2y hold u_x, u_y, v_x, v_y.
 */
struct EllipticGrid : CurvilinearGrid {
    double c0 = 0.0;
    double psi0 = 0.0, psi1 = 0.0;
    ChiSpec chi;
    ThetaFrame frame;
    double v_closure_error = 0.0;   ///< distance between the v = 0 and v = 2π points of the boundary trace
    double landing_offset = 0.0;    ///< max |ζ − ζ1| where ∂_u traces reach u1
    double boundary_angle = 0.0;    ///< max angle between u lines and the boundary normals (radians)
    std::size_t solver_iterations = 0;
    double solver_residual = 0.0;

    double u1() const { return coord1_max; }
    std::size_t n_u() const { return n1(); }
    std::size_t n_v() const { return n2(); }
};

/// du and dv at the lattice nodes, components along (dζ, dη).
struct DualForms {
    std::vector<Covector> du, dv;
};

/// ∂_u and ∂_v at the lattice nodes, components along (∂_ζ, ∂_η).
struct BasisFields {
    std::vector<Tangent> du, dv;
};

/// c0 = 2π / ∮ √g χ^{ζj} ū_j dη along ζ = 0 (periodic trapezoid rule).
inline double compute_c0(const ScalarField2& u, const OperatorCoefficients& oc)
{
    const LatticeShape& s = u.shape;
    double q = 0.0;
    int sign = 0;
    for (std::size_t j = 0; j < s.n2; ++j) {
        const double uz = u.d1[j];
        const int sj = uz > 0 ? 1 : (uz < 0 ? -1 : 0);
        if (sj == 0 || (sign != 0 && sj != sign))
            detail::numerical_failure("sign_change", "the normal derivative of ubar changes sign on the first boundary");
        sign = sj;
        q += oc.a[j] * uz + oc.b[j] * u.d2[j];
    }
    q *= s.h2();
    if (!(std::abs(q) > 0.0) || !std::isfinite(q))
        detail::numerical_failure("degenerate_flux", "boundary flux of ubar vanishes");
    return 2.0 * std::numbers::pi / q;
}

inline DualForms dual_derivatives(const ScalarField2& u, const OperatorCoefficients& oc, double c0)
{
    DualForms f;
    const std::size_t n = u.values.size();
    f.du.resize(n);
    f.dv.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double uz = u.d1[k], ue = u.d2[k];
        f.du[k] = {c0 * uz, c0 * ue};
        f.dv[k] = {-c0 * (oc.b[k] * uz + oc.c[k] * ue), c0 * (oc.a[k] * uz + oc.b[k] * ue)};
    }
    return f;
}

namespace detail {

/// Columns of the inverse of [[du_ζ, du_η], [dv_ζ, dv_η]].
inline std::pair<Tangent, Tangent> invert_forms(const Covector& du, const Covector& dv)
{
    const double J = du.c1 * dv.c2 - du.c2 * dv.c1;
    const double scale = std::max(std::abs(du.c1 * dv.c2), std::abs(du.c2 * dv.c1));
    if (!(std::abs(J) > 1e-14 * scale) || !std::isfinite(J))
        numerical_failure("degenerate_basis", "du and dv are linearly dependent");
    return {Tangent{dv.c2 / J, -dv.c1 / J}, Tangent{-du.c2 / J, du.c1 / J}};
}

} // namespace detail

inline BasisFields basis_fields(const DualForms& forms)
{
    BasisFields b;
    b.du.resize(forms.du.size());
    b.dv.resize(forms.du.size());
    for (std::size_t k = 0; k < forms.du.size(); ++k)
        std::tie(b.du[k], b.dv[k]) = detail::invert_forms(forms.du[k], forms.dv[k]);
    return b;
}

/**
 * Everything pass 2 needs after the solve: interpolants of the one-forms
 * and of the pass-1 map. Tracing several output resolutions reuses it.
 */
class EllipticTracer {
public:
    // interpolator slots
    enum Slot : std::size_t { Uz, Ue, Vz, Ve, X, Y, Zx, Zy, Ex, Ey, SlotCount };

    EllipticTracer(const FluxAlignedGrid& lattice, const ScalarField2& ubar, const OperatorCoefficients& oc,
                   const ChiSpec& spec)
        : m_interp(detail::lattice_shape(lattice)), m_spec(spec)
    {
        if (ubar.shape.n1 != lattice.n1() || ubar.shape.n2 != lattice.n2())
            detail::config_failure("lattice_mismatch", "ubar does not live on the given lattice");
        m_c0 = compute_c0(ubar, oc);
        const DualForms f = dual_derivatives(ubar, oc, m_c0);
        const std::size_t n = lattice.size();
        std::vector<double> tmp(n);
        auto add = [&](auto&& get) {
            for (std::size_t k = 0; k < n; ++k)
                tmp[k] = get(k);
            m_interp.add(tmp);
        };
        add([&](std::size_t k) { return f.du[k].c1; });
        add([&](std::size_t k) { return f.du[k].c2; });
        add([&](std::size_t k) { return f.dv[k].c1; });
        add([&](std::size_t k) { return f.dv[k].c2; });
        add([&](std::size_t k) { return lattice.x[k]; });
        add([&](std::size_t k) { return lattice.y[k]; });
        add([&](std::size_t k) { return lattice.d1x[k]; });
        add([&](std::size_t k) { return lattice.d1y[k]; });
        add([&](std::size_t k) { return lattice.d2x[k]; });
        add([&](std::size_t k) { return lattice.d2y[k]; });
        m_zeta1 = lattice.coord1_max;
        m_psi0 = ubar.psi0;
        m_psi1 = ubar.psi1;
        m_frame = lattice.frame;
        m_iterations = ubar.iterations;
        m_residual = ubar.residual;
        for (std::size_t k = 0; k < n; ++k)
            m_scale = std::max(m_scale, std::hypot(lattice.x[k] - m_frame.center.x, lattice.y[k] - m_frame.center.y));
    }

    double c0() const { return m_c0; }
    double u1() const { return m_c0 * (m_psi1 - m_psi0); }
    double zeta1() const { return m_zeta1; }
    double length_scale() const { return m_scale; }
    const LatticeInterpolator& interpolator() const { return m_interp; }

    /// (∂_u, ∂_v) in (ζ, η) components at a lattice point.
    std::pair<Tangent, Tangent> basis_at(double zeta, double eta) const
    {
        std::array<double, 4> f;
        m_interp.evaluate_range(zeta, eta, Uz, f);
        return detail::invert_forms({f[0], f[1]}, {f[2], f[3]});
    }

    /// Position and Cartesian gradients of (u, v) at a lattice point.
    struct Sample {
        Point p;
        Jacobian2 grads;    ///< u_x u_y / v_x v_y
        Jacobian2 pass1;    ///< ζ_x ζ_y / η_x η_y
        Covector du, dv;    ///< along (dζ, dη)
    };

    Sample sample(double zeta, double eta) const
    {
        std::array<double, SlotCount> f;
        m_interp.evaluate(zeta, eta, f);
        Sample s;
        s.p = {f[X], f[Y]};
        s.pass1 = {f[Zx], f[Zy], f[Ex], f[Ey]};
        s.du = {f[Uz], f[Ue]};
        s.dv = {f[Vz], f[Ve]};
        s.grads = {s.du.c1 * f[Zx] + s.du.c2 * f[Ex], s.du.c1 * f[Zy] + s.du.c2 * f[Ey],
                   s.dv.c1 * f[Zx] + s.dv.c2 * f[Ex], s.dv.c1 * f[Zy] + s.dv.c2 * f[Ey]};
        return s;
    }

    /// Traces the grid on n_u × n_v cells with `nodes_per_cell` Gauss–Legendre
    /// points per cell and direction (1: u nodes (i+½)u1/n_u, v nodes (j+½)2π/n_v).
    EllipticGrid trace(std::size_t n_u, std::size_t n_v, const IntegratorConfig& cfg = {},
                       std::size_t nodes_per_cell = 1) const
    {
        if (n_u < 1 || n_v < 2)
            detail::config_failure("bad_resolution", "need n_u >= 1 and n_v >= 2");
        if (!(u1() > 0.0))
            detail::numerical_failure("degenerate_flux", "u1 must be positive");
        EllipticGrid g = trace_nodes(cell_nodes(n_u, u1(), nodes_per_cell),
                                     cell_nodes(n_v, 2.0 * std::numbers::pi, nodes_per_cell), cfg);
        g.nodes_per_cell = nodes_per_cell;
        return g;
    }

    /// η on the ζ = 0 row where it crosses the ray from the frame center in +x.
    double origin_eta() const
    {
        const LatticeShape& sh = m_interp.shape();
        const double yc = m_frame.center.y, xc = m_frame.center.x;
        auto gap = [&](double eta) { return m_interp.evaluate(Y, 0.0, eta) - yc; };
        for (std::size_t j = 0; j < sh.n2; ++j) {
            const double a = static_cast<double>(j) * sh.h2(), b = a + sh.h2();
            double ga = gap(a), gb = gap(b);
            if (ga == 0.0 && m_interp.evaluate(X, 0.0, a) > xc)
                return a;
            if (!(ga < 0.0 && gb >= 0.0) && !(ga > 0.0 && gb <= 0.0))
                continue;
            double lo = a, hi = b;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi), gm = gap(mid);
                if ((gm < 0.0) == (ga < 0.0))
                    lo = mid, ga = gm;
                else
                    hi = mid;
            }
            const double eta = 0.5 * (lo + hi);
            if (m_interp.evaluate(X, 0.0, eta) > xc)
                return eta;
        }
        detail::numerical_failure("bracket_failure", "first boundary does not cross the +x ray of its center");
    }

    /// Traces the grid through explicit ascending nodes in (0, u1) × [0, 2π).
    EllipticGrid trace_nodes(std::vector<double> u_nodes, std::vector<double> v_nodes,
                             const IntegratorConfig& cfg = {}) const
    {
        cfg.validate();
        const double two_pi = 2.0 * std::numbers::pi;
        const double u1v = u1();
        if (!(u1v > 0.0))
            detail::numerical_failure("degenerate_flux", "u1 must be positive");
        if (u_nodes.empty() || v_nodes.size() < 2 || !std::is_sorted(u_nodes.begin(), u_nodes.end()) ||
            !std::is_sorted(v_nodes.begin(), v_nodes.end()) || u_nodes.front() < 0.0 || u_nodes.back() > u1v ||
            v_nodes.front() < 0.0 || v_nodes.back() >= two_pi)
            detail::config_failure("bad_nodes", "u nodes must lie in [0, u1] and v nodes in [0, 2pi), ascending");
        const std::size_t n_u = u_nodes.size(), n_v = v_nodes.size();

        EllipticGrid g;
        g.coord1 = std::move(u_nodes);
        g.coord2 = std::move(v_nodes);
        g.coord1_max = u1v;
        g.c0 = m_c0;
        g.psi0 = m_psi0;
        g.psi1 = m_psi1;
        g.chi = m_spec;
        g.frame = m_frame;
        g.solver_iterations = m_iterations;
        g.solver_residual = m_residual;
        g.resize_nodes();

        // ∂_v along ζ = 0, parameterized by v: dη/dv = η_v
        auto vrhs = [&](double, const State<1>& e) {
            const auto [bu, bv] = basis_at(0.0, e[0]);
            return State<1>{bv.c2};
        };
        std::vector<double> vt(g.coord2);
        vt.push_back(two_pi);
        DormandPrince<1> dpv(cfg);
        const double eta0 = origin_eta();
        const std::vector<State<1>> etas = dpv.integrate_through(vrhs, State<1>{eta0}, 0.0, vt);
        {
            const Sample a = sample(0.0, eta0), b = sample(0.0, etas.back()[0]);
            g.v_closure_error = std::hypot(a.p.x - b.p.x, a.p.y - b.p.y);
            if (!(g.v_closure_error <= 1e-6 * m_scale)) {
                std::ostringstream os;
                os << "v trace does not close: gap " << g.v_closure_error;
                detail::numerical_failure("closure_failure", os.str());
            }
        }

        g.inner.resize(n_v);
        g.outer.resize(n_v);
        std::vector<double> landing(n_v, 0.0), angle(n_v, 0.0);
        std::vector<double> ut(g.coord1);
        ut.push_back(u1v);
        const double slack = m_interp.shape().h1;

        parallel_for(n_v, [&](std::size_t j) {
            // ∂_u from (0, η_j), parameterized by u: d(ζ, η)/du = ∂_u
            auto urhs = [&](double, const State<2>& s) {
                if (s[0] < -slack || s[0] > m_zeta1 + slack)
                    detail::numerical_failure("out_of_box", "a u line left the lattice");
                const auto [bu, bv] = basis_at(s[0], s[1]);
                return State<2>{bu.c1, bu.c2};
            };
            DormandPrince<2> dp(cfg);
            const std::vector<State<2>> line = dp.integrate_through(urhs, State<2>{0.0, etas[j][0]}, 0.0, ut);
            for (std::size_t i = 0; i < n_u; ++i) {
                const Sample s = sample(line[i][0], line[i][1]);
                const std::size_t k = g.index(i, j);
                g.x[k] = s.p.x;
                g.y[k] = s.p.y;
                g.d1x[k] = s.grads.a11;
                g.d1y[k] = s.grads.a12;
                g.d2x[k] = s.grads.a21;
                g.d2y[k] = s.grads.a22;
            }
            landing[j] = std::abs(line.back()[0] - m_zeta1);
            double worst = 0.0;
            store_boundary(g.inner, j, 0.0, etas[j][0], worst);
            store_boundary(g.outer, j, m_zeta1, line.back()[1], worst);
            angle[j] = worst;
        });
        for (std::size_t j = 0; j < n_v; ++j) {
            g.landing_offset = std::max(g.landing_offset, landing[j]);
            g.boundary_angle = std::max(g.boundary_angle, angle[j]);
        }
        return g;
    }

private:
    /// Boundary point with ∂x/∂v, plus the angle between ∂_u and the contour normal.
    void store_boundary(BoundaryCurve& c, std::size_t j, double zeta, double eta, double& worst) const
    {
        const Sample s = sample(zeta, eta);
        const auto [bu, bv] = detail::invert_forms(s.du, s.dv);
        const Jacobian2 inv = invert_jacobian(s.pass1, m_scale); // x_ζ x_η / y_ζ y_η
        c.x[j] = s.p.x;
        c.y[j] = s.p.y;
        c.dx[j] = inv.a11 * bv.c1 + inv.a12 * bv.c2;
        c.dy[j] = inv.a21 * bv.c1 + inv.a22 * bv.c2;
        c.g1x[j] = s.grads.a11;
        c.g1y[j] = s.grads.a12;
        c.g2x[j] = s.grads.a21;
        c.g2y[j] = s.grads.a22;
        const double tx = inv.a11 * bu.c1 + inv.a12 * bu.c2, ty = inv.a21 * bu.c1 + inv.a22 * bu.c2;
        const double nx = s.pass1.a11, ny = s.pass1.a12;
        worst = std::max(worst, std::atan2(std::abs(tx * ny - ty * nx), std::abs(tx * nx + ty * ny)));
    }

    LatticeInterpolator m_interp;
    ChiSpec m_spec;
    double m_c0 = 0.0, m_zeta1 = 0.0, m_psi0 = 0.0, m_psi1 = 0.0, m_scale = 0.0;
    ThetaFrame m_frame;
    std::size_t m_iterations = 0;
    double m_residual = 0.0;
};

/// Pass 2 on a solved lattice.
inline EllipticGrid generate_elliptic(const FluxAlignedGrid& lattice, const ScalarField2& ubar,
                                      const OperatorCoefficients& oc, const ChiSpec& spec, std::size_t n_u,
                                      std::size_t n_v, const IntegratorConfig& cfg = {})
{
    return EllipticTracer(lattice, ubar, oc, spec).trace(n_u, n_v, cfg);
}

/// Options for the full two-pass pipeline.
struct EllipticOptions {
    OrthogonalOptions lattice = default_lattice_options();
    std::size_t lattice_refinement = 2; ///< lattice cells per output cell, in both directions
    std::size_t min_lattice_zeta = 64;
    std::size_t min_lattice_eta = 512;
    std::size_t lattice_zeta = 0;       ///< explicit lattice cell count (overrides the above)
    std::size_t lattice_eta = 0;
    bool richardson = true;             ///< extrapolate ū from the lattice and its 2x refinement
    int trace_derivative_order = 6;     ///< stencil for ū_ζ, ū_η of the extrapolated field
    SolverConfig solver{};
    IntegratorConfig ode{};

    static OrthogonalOptions default_lattice_options()
    {
        OrthogonalOptions o;
        o.weight = WeightMode::grad_psi;
        o.first_line = FirstLine::outer;
        return o;
    }
};

/// Solved lattice: pass-1 nodes, operator coefficients and ū.
struct SolvedLattice {
    FluxAlignedGrid lattice;
    OperatorCoefficients coefficients;
    ScalarField2 ubar;
};

template <FluxFunction F>
SolvedLattice solve_lattice(const F& field, double psi0, double psi1, const ChiSpec& spec, std::size_t n_u,
                            std::size_t n_v, const EllipticOptions& opt = {})
{
    const std::size_t nz =
        opt.lattice_zeta ? opt.lattice_zeta : std::max(opt.min_lattice_zeta, opt.lattice_refinement * n_u);
    const std::size_t ne =
        opt.lattice_eta ? opt.lattice_eta : std::max(opt.min_lattice_eta, opt.lattice_refinement * n_v);
    OrthogonalOptions lo = opt.lattice;
    lo.ode = opt.ode;
    if (!lo.frame) {
        if (!lo.center_hint)
            detail::config_failure("missing_center", "either a theta frame or a center hint is required");
        // one seed frame for both lattices keeps them nested
        lo.frame = estimate_theta_center(field, lo.first_line == FirstLine::outer ? psi1 : psi0, *lo.center_hint,
                                         lo.search_radius);
    }
    SolvedLattice s;
    s.lattice = generate_solver_lattice(field, psi0, psi1, nz, ne, lo);
    s.coefficients = operator_coefficients(field, s.lattice, spec);
    s.ubar = solve_ubar(s.lattice, s.coefficients, opt.solver);
    if (opt.richardson) {
        const FluxAlignedGrid fine = generate_solver_lattice(field, psi0, psi1, 2 * nz, 2 * ne, lo);
        const ScalarField2 uf = solve_ubar(fine, operator_coefficients(field, fine, spec), opt.solver, &s.ubar);
        s.ubar = richardson_extrapolate(s.ubar, uf, opt.trace_derivative_order);
    }
    return s;
}

/// Lattice, solve, and trace in one call.
template <FluxFunction F>
EllipticGrid build_elliptic(const F& field, double psi0, double psi1, const ChiSpec& spec, std::size_t n_u,
                            std::size_t n_v, const EllipticOptions& opt = {}, std::size_t nodes_per_cell = 1)
{
    const SolvedLattice s = solve_lattice(field, psi0, psi1, spec, n_u, n_v, opt);
    return EllipticTracer(s.lattice, s.ubar, s.coefficients, spec).trace(n_u, n_v, opt.ode, nodes_per_cell);
}

} // namespace gridforge
