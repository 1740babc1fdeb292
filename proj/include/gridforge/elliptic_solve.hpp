#pragma once

// Conduction tensors and the divergence-form solve ∂_i(√g χ^{ij} ∂_j ū) = 0
// on a flux-aligned lattice, Dirichlet in ζ and periodic in η.

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "gridforge/error.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/interp.hpp"
#include "gridforge/ortho_grid.hpp"
#include "gridforge/parallel.hpp"
#include "gridforge/tensor.hpp"

namespace gridforge {

struct ChiSpec {
    enum class Kind { conformal, adapted, monitor };
    Kind kind = Kind::conformal;
    WeightMode weight = WeightMode::grad_psi; ///< adapted only
    double k = 0.1;                           ///< monitor: conduction ratio across/along the field
    double eps = 0.001;                       ///< monitor: isotropic floor

    static ChiSpec conformal() { return {}; }
    static ChiSpec adapted(WeightMode w = WeightMode::grad_psi) { return {Kind::adapted, w, 0.1, 0.001}; }
    static ChiSpec monitor(double k = 0.1, double eps = 0.001) { return {Kind::monitor, WeightMode::grad_psi, k, eps}; }

    void validate() const
    {
        if (kind == Kind::monitor && (!(k > 0.0) || !(eps > 0.0) || !std::isfinite(k) || !std::isfinite(eps)))
            detail::config_failure("bad_chi", "monitor parameters k and eps must be positive");
    }

    const char* name() const
    {
        switch (kind) {
        case Kind::conformal: return "conformal";
        case Kind::adapted: return "adapted";
        case Kind::monitor: return "monitor";
        }
        return "?";
    }
};

/// χ in Cartesian components at a point with flux jet `jet`.
inline SymTensor2 build_chi_cartesian(const ChiSpec& spec, const FluxJet& jet)
{
    if (!std::isfinite(jet.dx) || !std::isfinite(jet.dy))
        detail::numerical_failure("nonfinite_jet", "flux gradient is not finite");
    SymTensor2 chi;
    switch (spec.kind) {
    case ChiSpec::Kind::conformal:
        chi = SymTensor2::identity();
        break;
    case ChiSpec::Kind::adapted: {
        const double w = weight_value(spec.weight, jet);
        if (!(w > 0.0))
            detail::numerical_failure("positivity", "adapted weight must be positive");
        chi = SymTensor2::identity(1.0 / w);
        break;
    }
    case ChiSpec::Kind::monitor: {
        // G = T T + k² N N + ε I with T = (−ψ_y, ψ_x), N = −∇ψ
        const double px = jet.dx, py = jet.dy, g2 = jet.grad_sq(), k2 = spec.k * spec.k;
        const SymTensor2 G{py * py + k2 * px * px + spec.eps, -px * py + k2 * px * py,
                           px * px + k2 * py * py + spec.eps};
        const double s = 1.0 / std::sqrt((spec.eps + k2 * g2) * (spec.eps + g2));
        chi = {s * G.xx, s * G.xy, s * G.yy};
        break;
    }
    }
    if (!chi.positive_definite())
        detail::numerical_failure("positivity", "conduction tensor is not positive definite");
    return chi;
}

/// χ in (ζ, η) components, given the gradients of ζ and η.
inline SymTensor2 transform_chi(const SymTensor2& chi_xy, const Jacobian2& grads, double length_scale = 1.0)
{
    return push_tensor(chi_xy, grads, length_scale);
}

struct SolverConfig {
    double tolerance = 1e-11; ///< relative residual ‖b − Ax‖/‖b‖
    std::size_t max_iterations = 100000;
    int derivative_order = 4; ///< 2, 4 or 6

    void validate() const
    {
        if (!(tolerance > 0.0))
            detail::config_failure("bad_tolerance", "solver tolerance must be positive");
        if (max_iterations == 0)
            detail::config_failure("bad_iterations", "max_iterations must be positive");
        detail::check_order(derivative_order);
    }
};

/// ū on a vertex lattice in ζ (boundary rows included) and periodic η.
struct ScalarField2 {
    LatticeShape shape;
    std::vector<double> values, d1, d2; ///< ū, ū_ζ, ū_η
    double psi0 = 0.0, psi1 = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;

    double at(std::size_t i, std::size_t j) const { return values[shape.index(i, j)]; }
};

/// Node-wise coefficients √g χ^{ζζ}, √g χ^{ζη}, √g χ^{ηη} plus √g and χ^{ij}.
struct OperatorCoefficients {
    std::vector<SymTensor2> chi; ///< χ in (ζ, η)
    std::vector<double> sqrt_g;
    std::vector<double> a, b, c;
};

namespace detail {

/// Checks that `g` is a solver lattice: uniform ζ vertices spanning [0, ζ1]
/// and uniform η vertices starting at 0.
inline LatticeShape lattice_shape(const FluxAlignedGrid& g)
{
    const std::size_t n1 = g.n1(), n2 = g.n2();
    if (n1 < 5 || n2 < 5)
        config_failure("bad_lattice", "solver lattice needs at least 5x5 nodes");
    const double z1 = g.coord1_max, h1 = z1 / static_cast<double>(n1 - 1);
    const double h2 = 2.0 * std::numbers::pi / static_cast<double>(n2);
    for (std::size_t i = 0; i < n1; ++i)
        if (std::abs(g.coord1[i] - static_cast<double>(i) * h1) > 1e-12 * std::abs(z1))
            config_failure("bad_lattice", "zeta nodes must be uniform vertices including both boundaries");
    for (std::size_t j = 0; j < n2; ++j)
        if (std::abs(g.coord2[j] - static_cast<double>(j) * h2) > 1e-12)
            config_failure("bad_lattice", "eta nodes must be uniform vertices starting at 0");
    return {n1, n2, 0.0, h1};
}

} // namespace detail

/**
 * The same lattice with ζ' = ζ1 − ζ and η' = −η (mod 2π). Both reflections
 * together keep the map right-handed; row 0 becomes the former last row.
 */
inline FluxAlignedGrid reversed_lattice(const FluxAlignedGrid& g)
{
    const std::size_t n1 = g.n1(), n2 = g.n2();
    FluxAlignedGrid r = g;
    auto src = [&](std::size_t i, std::size_t j) { return g.index(n1 - 1 - i, (n2 - j) % n2); };
    for (std::size_t i = 0; i < n1; ++i) {
        r.coord1[i] = g.coord1_max - g.coord1[n1 - 1 - i];
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t k = r.index(i, j), s = src(i, j);
            r.x[k] = g.x[s];
            r.y[k] = g.y[s];
            r.d1x[k] = -g.d1x[s];
            r.d1y[k] = -g.d1y[s];
            r.d2x[k] = -g.d2x[s];
            r.d2y[k] = -g.d2y[s];
            r.h[k] = -g.h[s];
        }
    }
    r.coord1[0] = 0.0;
    auto flip = [&](const BoundaryCurve& c) {
        BoundaryCurve o = c;
        for (std::size_t j = 0; j < n2 && j < c.x.size(); ++j) {
            const std::size_t s = (n2 - j) % n2;
            o.x[j] = c.x[s];
            o.y[j] = c.y[s];
            o.dx[j] = -c.dx[s];
            o.dy[j] = -c.dy[s];
            o.g1x[j] = -c.g1x[s];
            o.g1y[j] = -c.g1y[s];
            o.g2x[j] = -c.g2x[s];
            o.g2y[j] = -c.g2y[s];
        }
        return o;
    };
    r.inner = flip(g.outer);
    r.outer = flip(g.inner);
    r.f0 = -g.f0;
    std::swap(r.psi0, r.psi1);
    return r;
}

/**
 * Flux-aligned lattice for the elliptic solve: n_zeta cells (n_zeta+1 vertex
 * rows, boundaries included) and n_eta periodic columns at j·2π/n_eta.
 *
 * The η lattice is seeded on the contour chosen by `opt.first_line`; the
 * result is always oriented so that row 0 lies on psi0.
 */
template <FluxFunction F>
FluxAlignedGrid generate_solver_lattice(const F& field, double psi0, double psi1, std::size_t n_zeta,
                                        std::size_t n_eta, const OrthogonalOptions& opt)
{
    if (n_zeta < 4 || n_eta < 5)
        detail::config_failure("bad_resolution", "solver lattice needs n_zeta >= 4 and n_eta >= 5");
    const std::vector<double> zf = vertex_nodes(n_zeta, 1.0, true);
    const std::vector<double> eta = vertex_nodes(n_eta, 2.0 * std::numbers::pi, false);
    FluxAlignedGrid g = generate_orthogonal_nodes(field, psi0, psi1, zf, eta, opt);
    if (opt.first_line == FirstLine::inner)
        return g;
    FluxAlignedGrid r = reversed_lattice(g);
    // angle frame of the row-0 contour, for anchoring later coordinates there
    r.frame = estimate_theta_center(field, psi0, g.frame.center, opt.search_radius);
    return r;
}

template <FluxFunction F>
OperatorCoefficients operator_coefficients(const F& field, const FluxAlignedGrid& g, const ChiSpec& spec)
{
    spec.validate();
    OperatorCoefficients oc;
    const std::size_t n = g.size();
    oc.chi.resize(n);
    oc.sqrt_g.resize(n);
    oc.a.resize(n);
    oc.b.resize(n);
    oc.c.resize(n);
    parallel_for(n, [&](std::size_t k) {
        const Jacobian2 grads = g.gradients(k);
        const SymTensor2 chi = transform_chi(build_chi_cartesian(spec, field.jet(g.point(k))), grads);
        const double sg = std::abs(1.0 / grads.det());
        oc.chi[k] = chi;
        oc.sqrt_g[k] = sg;
        oc.a[k] = sg * chi.xx;
        oc.b[k] = sg * chi.xy;
        oc.c[k] = sg * chi.yy;
    });
    return oc;
}

/**
 * Symmetric stiffness operator of the discrete energy
 * ½ Σ (a ū_ζ² + 2 b ū_ζ ū_η + c ū_η²) ΔζΔη, negated so that it is positive
 * definite on the interior rows. Boundary rows enter through `boundary_rhs`.
 */
class StiffnessOperator {
public:
    StiffnessOperator(const LatticeShape& s, const OperatorCoefficients& oc) : m_shape(s)
    {
        const std::size_t n1 = s.n1, n2 = s.n2;
        const double dz = s.h1, de = s.h2();
        m_unknowns = (n1 - 2) * n2;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(m_unknowns * 9);
        m_coupling.assign(n1 * n2, {});

        auto scatter = [&](std::size_t r, std::size_t c, double v) {
            const std::size_t ir = r / n2, ic = c / n2;
            if (ir == 0 || ir == n1 - 1)
                return;
            if (ic == 0 || ic == n1 - 1)
                m_coupling[r].push_back({c, v});
            else
                trip.emplace_back(static_cast<int>(r - n2), static_cast<int>(c - n2), v);
        };
        auto K = [&](std::size_t i, std::size_t j) { return i * n2 + (j % n2); };

        for (std::size_t i = 0; i + 1 < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                // ζ face between (i,j) and (i+1,j)
                const std::size_t p = K(i, j), q = K(i + 1, j);
                const double w = 0.5 * (oc.a[p] + oc.a[q]) * de / dz;
                scatter(p, p, w);
                scatter(q, q, w);
                scatter(p, q, -w);
                scatter(q, p, -w);
                // mixed term on the cell (i..i+1, j..j+1)
                const std::size_t nodes[4] = {K(i, j), K(i + 1, j), K(i, j + 1), K(i + 1, j + 1)};
                const double bc = 0.25 * (oc.b[nodes[0]] + oc.b[nodes[1]] + oc.b[nodes[2]] + oc.b[nodes[3]]);
                if (bc != 0.0) {
                    static constexpr double pz[4] = {-1, 1, -1, 1}, pe[4] = {-1, -1, 1, 1};
                    const double scale = bc * dz * de / (4.0 * dz * de);
                    for (int r = 0; r < 4; ++r)
                        for (int c = 0; c < 4; ++c)
                            scatter(nodes[r], nodes[c], scale * (pz[r] * pe[c] + pe[r] * pz[c]));
                }
            }
        for (std::size_t i = 1; i + 1 < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                const std::size_t p = K(i, j), q = K(i, j + 1);
                const double w = 0.5 * (oc.c[p] + oc.c[q]) * dz / de;
                scatter(p, p, w);
                scatter(q, q, w);
                scatter(p, q, -w);
                scatter(q, p, -w);
            }
        m_matrix.resize(static_cast<int>(m_unknowns), static_cast<int>(m_unknowns));
        m_matrix.setFromTriplets(trip.begin(), trip.end());
    }

    const Eigen::SparseMatrix<double>& matrix() const { return m_matrix; }
    std::size_t unknowns() const { return m_unknowns; }

    /// Right-hand side from Dirichlet rows ū(0,·) = lo, ū(ζ1,·) = hi.
    Eigen::VectorXd boundary_rhs(double lo, double hi) const
    {
        const std::size_t n1 = m_shape.n1, n2 = m_shape.n2;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<int>(m_unknowns));
        for (std::size_t r = n2; r < (n1 - 1) * n2; ++r)
            for (const auto& [c, v] : m_coupling[r])
                b[static_cast<int>(r - n2)] -= v * (c / n2 == 0 ? lo : hi);
        return b;
    }

private:
    struct Entry {
        std::size_t col;
        double value;
    };
    LatticeShape m_shape;
    std::size_t m_unknowns = 0;
    Eigen::SparseMatrix<double> m_matrix;
    std::vector<std::vector<Entry>> m_coupling;
};

/// ū_ζ and ū_η with the configured stencil order.
inline void fill_derivatives(ScalarField2& u, int order)
{
    u.d1 = derivative_coord1(u.shape, u.values, order);
    u.d2 = derivative_coord2(u.shape, u.values, order);
}

/// Solves for ū with boundary values grid.psi0 at ζ = 0 and grid.psi1 at ζ = ζ1.
/// `start`, if given, is a solution on any lattice with the same ζ range;
/// its interpolant seeds the iteration instead of the linear profile.
inline ScalarField2 solve_ubar(const FluxAlignedGrid& g, const OperatorCoefficients& oc, const SolverConfig& cfg = {},
                               const ScalarField2* start = nullptr)
{
    cfg.validate();
    const LatticeShape shape = detail::lattice_shape(g);
    const std::size_t n1 = shape.n1, n2 = shape.n2;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!(oc.a[k] > 0.0) || !(oc.c[k] > 0.0) || !(oc.a[k] * oc.c[k] > oc.b[k] * oc.b[k]))
            detail::numerical_failure("indefinite_operator", "coefficient tensor is not positive definite");

    StiffnessOperator A(shape, oc);
    const Eigen::VectorXd rhs = A.boundary_rhs(g.psi0, g.psi1);

    Eigen::VectorXd guess(static_cast<int>(A.unknowns()));
    for (std::size_t i = 1; i + 1 < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            guess[static_cast<int>((i - 1) * n2 + j)] =
                g.psi0 + (g.psi1 - g.psi0) * static_cast<double>(i) / static_cast<double>(n1 - 1);
    if (start) {
        if (std::abs(start->shape.c1_max() - shape.c1_max()) > 1e-9 * std::abs(shape.c1_max()) ||
            std::abs(start->shape.c1_min - shape.c1_min) > 1e-9 * std::abs(shape.c1_max()))
            detail::config_failure("lattice_mismatch", "starting field spans a different zeta range");
        LatticeInterpolator ip(start->shape);
        ip.add(start->values);
        for (std::size_t i = 1; i + 1 < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j)
                guess[static_cast<int>((i - 1) * n2 + j)] =
                    ip.evaluate(0, shape.c1_min + static_cast<double>(i) * shape.h1,
                                static_cast<double>(j) * shape.h2());
    }

    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(cfg.tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(cfg.max_iterations));
    cg.compute(A.matrix());
    if (cg.info() != Eigen::Success)
        detail::numerical_failure("indefinite_operator", "preconditioner setup failed");
    const Eigen::VectorXd sol = cg.solveWithGuess(rhs, guess);
    if (cg.info() != Eigen::Success) {
        std::ostringstream os;
        os << "conjugate gradient did not converge in " << cg.iterations() << " iterations (residual "
           << cg.error() << ")";
        detail::numerical_failure("no_convergence", os.str());
    }

    ScalarField2 u;
    u.shape = shape;
    u.psi0 = g.psi0;
    u.psi1 = g.psi1;
    u.iterations = static_cast<std::size_t>(cg.iterations());
    u.residual = cg.error();
    u.values.assign(n1 * n2, 0.0);
    for (std::size_t j = 0; j < n2; ++j) {
        u.values[j] = g.psi0;
        u.values[(n1 - 1) * n2 + j] = g.psi1;
    }
    for (std::size_t r = 0; r < A.unknowns(); ++r)
        u.values[n2 + r] = sol[static_cast<int>(r)];
    fill_derivatives(u, cfg.derivative_order);
    return u;
}

template <FluxFunction F>
ScalarField2 solve_ubar(const F& field, const FluxAlignedGrid& g, const ChiSpec& spec, const SolverConfig& cfg = {})
{
    return solve_ubar(g, operator_coefficients(field, g, spec), cfg);
}

/**
 * Discrete flux through the ring between rows i and i+1:
 * Σ_j Δη (√g χ^{ζζ} ū_ζ + √g χ^{ζη} ū_η) with the operator's own stencil.
 * Independent of i up to the solver residual.
 */
inline double ring_flux(const ScalarField2& u, const OperatorCoefficients& oc, std::size_t i)
{
    const LatticeShape& s = u.shape;
    if (i + 1 >= s.n1)
        detail::config_failure("bad_row", "ring_flux: row out of range");
    const std::size_t n2 = s.n2;
    const double dz = s.h1, de = s.h2();
    double sum = 0.0;
    for (std::size_t j = 0; j < n2; ++j) {
        const std::size_t jn = (j + 1) % n2;
        const std::size_t p = s.index(i, j), q = s.index(i + 1, j);
        sum += 0.5 * (oc.a[p] + oc.a[q]) * (u.values[q] - u.values[p]) * de / dz;
        const std::size_t p1 = s.index(i, jn), q1 = s.index(i + 1, jn);
        const double bc = 0.25 * (oc.b[p] + oc.b[q] + oc.b[p1] + oc.b[q1]);
        const double ue = 0.5 * (u.values[p1] + u.values[q1] - u.values[p] - u.values[q]) / de;
        sum += bc * ue * de;
    }
    return sum;
}

/**
 * Richardson extrapolation (4 ū_fine − ū_coarse)/3 on the coarse lattice,
 * cancelling the h² term of the second-order scheme. `fine` must halve
 * both coarse spacings.
 */
inline ScalarField2 richardson_extrapolate(const ScalarField2& coarse, const ScalarField2& fine, int derivative_order = 4)
{
    const LatticeShape &c = coarse.shape, &f = fine.shape;
    if (f.n1 - 1 != 2 * (c.n1 - 1) || f.n2 != 2 * c.n2)
        detail::config_failure("lattice_mismatch", "fine lattice must halve both coarse spacings");
    ScalarField2 r = coarse;
    for (std::size_t i = 0; i < c.n1; ++i)
        for (std::size_t j = 0; j < c.n2; ++j)
            r.values[c.index(i, j)] = (4.0 * fine.at(2 * i, 2 * j) - coarse.at(i, j)) / 3.0;
    r.iterations = coarse.iterations + fine.iterations;
    r.residual = std::max(coarse.residual, fine.residual);
    fill_derivatives(r, derivative_order);
    return r;
}

/**
 * Relative L2 difference (∫(ū₁−ū₂)² / ∫ū₁²)^{1/2} over the computational
 * rectangle, sampling `fine` at the nodes of `coarse`. The fine lattice must
 * refine the coarse one by integer factors.
 */
inline double self_consistency_error(const ScalarField2& coarse, const ScalarField2& fine)
{
    const LatticeShape &c = coarse.shape, &f = fine.shape;
    const std::size_t cells_c = c.n1 - 1, cells_f = f.n1 - 1;
    if (cells_f % cells_c != 0 || f.n2 % c.n2 != 0 || std::abs(c.c1_max() - f.c1_max()) > 1e-9 * c.c1_max())
        detail::config_failure("lattice_mismatch", "fine lattice does not nest the coarse lattice");
    const std::size_t r1 = cells_f / cells_c, r2 = f.n2 / c.n2;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < c.n1; ++i) {
        const double w = (i == 0 || i + 1 == c.n1) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < c.n2; ++j) {
            const double a = coarse.at(i, j), b = fine.at(i * r1, j * r2);
            num += w * (a - b) * (a - b);
            den += w * a * a;
        }
    }
    if (!(den > 0.0))
        return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::sqrt(num / den);
}

} // namespace gridforge
