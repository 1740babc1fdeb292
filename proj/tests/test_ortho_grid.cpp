#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gridforge/ortho_grid.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

OrthogonalOptions annulus_options(WeightMode w = WeightMode::unity)
{
    OrthogonalOptions o;
    o.weight = w;
    o.center_hint = Point{0.05, -0.02};
    o.search_radius = 0.5;
    return o;
}

} // namespace

TEST_CASE("annulus: nodes on circles, eta is the polar angle")
{
    const Annulus an;
    OrthogonalOptions o = annulus_options();
    o.frame = ThetaFrame{{0.0, 0.0}};
    const FluxAlignedGrid g = generate_orthogonal(an, 0.5, 2.0, 8, 32, o);
    REQUIRE(g.n1() == 8);
    REQUIRE(g.n2() == 32);
    for (std::size_t i = 0; i < g.n1(); ++i)
        for (std::size_t j = 0; j < g.n2(); ++j) {
            const std::size_t k = g.index(i, j);
            const double psi = g.psi0 + g.coord1[i] / g.f0;
            CHECK_THAT(std::hypot(g.x[k], g.y[k]), WithinRel(std::sqrt(2 * psi), 1e-9));
            double t = std::atan2(g.y[k], g.x[k]);
            if (t < 0)
                t += 2 * std::numbers::pi;
            CHECK_THAT(t, WithinAbs(g.coord2[j], 1e-8));
        }
    CHECK(max_nonorthogonality(g) < 1e-10);
    CHECK(flux_alignment_residual(an, g) < 1e-10);
    CHECK(g.closure_error < 1e-9);
}

TEST_CASE("theta center estimate")
{
    // polygon centroid from an off-center hint: close, not exact
    const ThetaFrame f = estimate_theta_center(Annulus{{0.3, -0.4}, 1.0}, 1.0, {0.35, -0.42}, 0.5);
    CHECK_THAT(f.center.x, WithinAbs(0.3, 1e-3));
    CHECK_THAT(f.center.y, WithinAbs(-0.4, 1e-3));
    // from the exact center the rays are symmetric
    const ThetaFrame e = estimate_theta_center(Annulus{}, 1.0, {0, 0}, 0.5);
    CHECK_THAT(e.center.x, WithinAbs(0.0, 1e-12));
    CHECK_THAT(e.center.y, WithinAbs(0.0, 1e-12));
}

TEST_CASE("stored gradients are f0 grad psi and h times the rotated gradient")
{
    const Annulus an{{0.2, 0.1}, 1.5};
    OrthogonalOptions o = annulus_options(WeightMode::grad_psi);
    o.center_hint = Point{0.25, 0.1};
    const FluxAlignedGrid g = generate_orthogonal(an, 0.4, 3.0, 6, 24, o);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const FluxJet j = an.jet(g.point(k));
        CHECK_THAT(g.d1x[k], WithinAbs(g.f0 * j.dx, 1e-12 * std::abs(g.f0) * std::sqrt(j.grad_sq())));
        CHECK_THAT(g.d1y[k], WithinAbs(g.f0 * j.dy, 1e-12 * std::abs(g.f0) * std::sqrt(j.grad_sq())));
        CHECK_THAT(g.d2x[k], WithinRel(-g.h[k] * j.dy, 1e-12));
        CHECK_THAT(g.d2y[k], WithinRel(g.h[k] * j.dx, 1e-12));
    }
}

TEST_CASE("solovev orthogonal grid: orthogonality and alignment")
{
    const SolovevField s = SolovevField::standard_x();
    OrthogonalOptions o;
    o.weight = WeightMode::grad_psi;
    o.center_hint = Point{s.R0, 0.0};
    o.search_radius = 50;
    for (FirstLine side : {FirstLine::inner, FirstLine::outer}) {
        o.first_line = side;
        const FluxAlignedGrid g = generate_orthogonal(s, -20, -1, 16, 160, o);
        CHECK(max_nonorthogonality(g) <= 1e-8);
        CHECK(flux_alignment_residual(s, g) <= 1e-9 * 19);
        CHECK(g.closure_error <= 1e-8 * 300);
        // first line carries psi0
        CHECK(g.psi0 == (side == FirstLine::inner ? -20.0 : -1.0));
    }
}

TEST_CASE("gauss nodes per cell")
{
    const FluxAlignedGrid g = generate_orthogonal(Annulus{}, 0.5, 2.0, 4, 16, annulus_options(), 3);
    CHECK(g.n1() == 12);
    CHECK(g.n2() == 48);
    CHECK(g.cells1() == 4);
    CHECK(g.nodes_per_cell == 3);
    for (std::size_t i = 1; i < g.n1(); ++i)
        CHECK(g.coord1[i] > g.coord1[i - 1]);
}

TEST_CASE("bad inputs")
{
    const Annulus an;
    CHECK_THROWS_AS(generate_orthogonal(an, 1.0, 1.0, 4, 16, annulus_options()), Error);
    CHECK_THROWS_AS(generate_orthogonal(an, 0.5, 2.0, 0, 16, annulus_options()), Error);
    OrthogonalOptions none;
    CHECK_THROWS_AS(generate_orthogonal(an, 0.5, 2.0, 4, 16, none), Error);
    try {
        generate_orthogonal(an, 1.0, 1.0, 4, 16, annulus_options());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("node helpers")
{
    const auto c = cell_centers(4, 2.0);
    CHECK(c == std::vector<double>{0.25, 0.75, 1.25, 1.75});
    const auto v = vertex_nodes(4, 2.0);
    CHECK(v == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(vertex_nodes(4, 2.0, false).size() == 4);
}
