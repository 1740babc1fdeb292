#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gridforge/final_grid.hpp"
#include "gridforge/quality.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EllipticOptions annulus_options()
{
    EllipticOptions o;
    o.lattice.center_hint = Point{0.1, 0.05};
    o.lattice.search_radius = 0.5;
    return o;
}

// largest distance from the log-polar map r = e^u, θ = v (r0 = 1)
double log_polar_deviation(const EllipticGrid& g)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n1(); ++i)
        for (std::size_t j = 0; j < g.n2(); ++j) {
            const std::size_t k = g.index(i, j);
            const double r = std::exp(g.coord1[i]);
            worst = std::max(worst, std::hypot(g.x[k] - r * std::cos(g.coord2[j]), g.y[k] - r * std::sin(g.coord2[j])));
        }
    return worst;
}

} // namespace

TEST_CASE("annulus conformal grid is the log-polar map")
{
    const EllipticGrid g = build_elliptic(Annulus{}, 0.5, 2.0, ChiSpec::conformal(), 16, 128, annulus_options());
    REQUIRE(g.n1() == 16);
    REQUIRE(g.n2() == 128);
    CHECK_THAT(g.u1(), WithinAbs(std::log(2.0), 1e-6));
    CHECK_THAT(g.c0, WithinRel(std::log(2.0) / 1.5, 1e-6));
    CHECK(log_polar_deviation(g) <= 1e-6 * 2.0);
    CHECK(g.v_closure_error <= 1e-8 * 2.0);
    CHECK(g.boundary_angle < 1e-6);
    CHECK(interior_nonorthogonality(g) < 1e-6);
    // stored gradients: ∇u = x/r², ∇v = (−y, x)/r²
    for (std::size_t k = 0; k < g.size(); k += 37) {
        const double r2 = g.x[k] * g.x[k] + g.y[k] * g.y[k];
        CHECK_THAT(g.d1x[k], WithinAbs(g.x[k] / r2, 1e-5));
        CHECK_THAT(g.d2y[k], WithinAbs(g.x[k] / r2, 1e-5));
        CHECK_THAT(g.d2x[k], WithinAbs(-g.y[k] / r2, 1e-5));
    }
}

TEST_CASE("symmetric annulus: every tensor gives a polar grid")
{
    for (const ChiSpec& spec : {ChiSpec::adapted(), ChiSpec::monitor()}) {
        const EllipticGrid g = build_elliptic(Annulus{}, 0.5, 2.0, spec, 8, 64, annulus_options());
        CHECK(interior_nonorthogonality(g) < 1e-5);
        // v is the polar angle
        for (std::size_t i = 0; i < g.n1(); ++i) {
            const std::size_t k = g.index(i, 5);
            CHECK_THAT(std::atan2(g.y[k], g.x[k]), WithinAbs(g.coord2[5], 1e-6));
        }
        // nodes on a u line share one radius
        for (std::size_t i = 0; i < g.n1(); ++i) {
            const double r0 = std::hypot(g.x[g.index(i, 0)], g.y[g.index(i, 0)]);
            for (std::size_t j = 1; j < g.n2(); ++j)
                CHECK_THAT(std::hypot(g.x[g.index(i, j)], g.y[g.index(i, j)]), WithinRel(r0, 1e-6));
        }
    }
}

TEST_CASE("dual basis: one-forms and vector fields are inverse")
{
    const Annulus an{{0.0, 0.0}, 1.0};
    EllipticOptions o = annulus_options();
    const SolvedLattice s = solve_lattice(an, 0.5, 2.0, ChiSpec::monitor(), 8, 32, o);
    const double c0 = compute_c0(s.ubar, s.coefficients);
    const DualForms f = dual_derivatives(s.ubar, s.coefficients, c0);
    const BasisFields b = basis_fields(f);
    for (std::size_t k = 0; k < f.du.size(); ++k) {
        CHECK_THAT(pair(f.du[k], b.du[k]), WithinAbs(1.0, 1e-10));
        CHECK_THAT(pair(f.du[k], b.dv[k]), WithinAbs(0.0, 1e-10));
        CHECK_THAT(pair(f.dv[k], b.du[k]), WithinAbs(0.0, 1e-10));
        CHECK_THAT(pair(f.dv[k], b.dv[k]), WithinAbs(1.0, 1e-10));
    }
}

TEST_CASE("one solved lattice traces several resolutions")
{
    const ChiSpec spec = ChiSpec::conformal();
    EllipticOptions o = annulus_options();
    const SolvedLattice s = solve_lattice(Annulus{}, 0.5, 2.0, spec, 16, 128, o);
    const EllipticTracer tr(s.lattice, s.ubar, s.coefficients, spec);
    std::vector<double> errs;
    for (std::size_t n : {8, 16, 32}) {
        const EllipticGrid g = tr.trace(n, 8 * n, o.ode);
        CHECK(g.n1() == n);
        CHECK_THAT(g.u1(), WithinAbs(std::log(2.0), 1e-6));
        errs.push_back(jacobian_consistency(g));
    }
    for (double q : convergence_order(errs))
        CHECK(q >= 1.8);
    const EllipticGrid p3 = tr.trace(4, 32, o.ode, 3);
    CHECK(p3.n1() == 12);
    CHECK(p3.n2() == 96);
}

TEST_CASE("solovev monitor grid is sane")
{
    const SolovevField s = SolovevField::standard_x();
    EllipticOptions o;
    o.lattice.center_hint = Point{s.R0, 0.0};
    o.lattice.search_radius = 50;
    o.min_lattice_zeta = 16;
    o.min_lattice_eta = 160;
    const EllipticGrid g = build_elliptic(s, -20, -1, ChiSpec::monitor(), 8, 80, o);
    CHECK(g.u1() > 0.0);
    CHECK(g.c0 > 0.0);
    CHECK(g.v_closure_error <= 1e-8 * 300);
    // every stored Jacobian is nonsingular with one orientation
    const double sign = g.gradients(0).det() > 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(sign * g.gradients(k).det() > 0.0);
    // the first row sits inside the ψ = −20 .. −1 band
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double psi = s.jet(g.point(k)).psi;
        CHECK(psi > -20.0);
        CHECK(psi < -1.0);
    }
}

TEST_CASE("configuration errors")
{
    EllipticOptions none;
    CHECK_THROWS_AS(build_elliptic(Annulus{}, 0.5, 2.0, ChiSpec::conformal(), 8, 64, none), Error);
    CHECK_THROWS_AS(build_elliptic(Annulus{}, 0.5, 0.5, ChiSpec::conformal(), 8, 64, annulus_options()), Error);
    CHECK_THROWS_AS(build_elliptic(Annulus{}, 0.5, 2.0, ChiSpec::monitor(-1, 0.1), 8, 64, annulus_options()), Error);
}
