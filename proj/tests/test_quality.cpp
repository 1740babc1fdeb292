#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gridforge/final_grid.hpp"
#include "gridforge/quality.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// x = a·c1, y = b·c2 on cell centers: constant metric
CurvilinearGrid stretched(std::size_t n1, std::size_t n2, double a, double b)
{
    CurvilinearGrid g;
    g.coord1_max = 2.0;
    g.coord1 = cell_nodes(n1, g.coord1_max);
    g.coord2 = cell_nodes(n2, 2 * std::numbers::pi);
    g.resize_nodes();
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t k = g.index(i, j);
            g.x[k] = a * g.coord1[i];
            g.y[k] = b * g.coord2[j];
            g.d1x[k] = 1 / a;
            g.d2y[k] = 1 / b;
        }
    return g;
}

OrthogonalOptions annulus_options()
{
    OrthogonalOptions o;
    o.frame = ThetaFrame{{3.0, 0.0}};
    o.search_radius = 0.5;
    return o;
}

const Annulus shifted{{3.0, 0.0}, 1.0};

} // namespace

TEST_CASE("constant metric: unit size ratios and exact area")
{
    const CurvilinearGrid g = stretched(6, 12, 1.5, 0.5);
    const QualityReport q = quality_report(g);
    CHECK_THAT(q.a_u, WithinRel(1.0, 1e-14));
    CHECK_THAT(q.a_v, WithinRel(1.0, 1e-14));
    CHECK_THAT(q.lu_min, WithinRel(1.5 * 2.0 / 6, 1e-14));
    CHECK_THAT(q.area, WithinRel(0.75 * 2.0 * 2 * std::numbers::pi, 1e-14));
    CHECK(q.nonorthogonality < 1e-15);
}

TEST_CASE("gregory rule is exact for cubics")
{
    for (std::size_t n : {6, 7, 10, 31}) {
        const double h = 1.7 / static_cast<double>(n);
        std::vector<double> f(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = 0.3 + i * h;
            f[i] = 2 * x * x * x - x * x + 4;
        }
        auto F = [](double x) { return 0.5 * x * x * x * x - x * x * x / 3 + 4 * x; };
        CHECK_THAT(detail::gregory(f, h), WithinRel(F(2.0) - F(0.3), 1e-13));
    }
}

TEST_CASE("convergence order examples")
{
    const std::vector<double> a{4.0, 1.0};
    CHECK_THAT(convergence_order(a)[0], WithinAbs(2.0, 1e-15));
    const std::vector<double> b{1.0, 1.0};
    CHECK(convergence_order(b)[0] == 0.0);
    const std::vector<double> c{1.0, 0.0};
    CHECK_THROWS_AS(convergence_order(c), Error);
}

TEST_CASE("annulus areas agree")
{
    const double exact = std::numbers::pi * (4.0 - 1.0);
    const FluxAlignedGrid o = generate_orthogonal(shifted, 0.5, 2.0, 8, 64, annulus_options(), 3);
    CHECK_THAT(domain_area(o), WithinRel(exact, 1e-8));
    CHECK_THAT(green_area(o), WithinRel(exact, 1e-8));
    EllipticOptions eo;
    eo.lattice.frame = ThetaFrame{{3.0, 0.0}};
    eo.lattice.search_radius = 0.5;
    const SolvedLattice s = solve_lattice(shifted, 0.5, 2.0, ChiSpec::monitor(), 8, 64, eo);
    CHECK_THAT(lattice_area(s.lattice), WithinRel(exact, 1e-8));
    const EllipticGrid e = EllipticTracer(s.lattice, s.ubar, s.coefficients, ChiSpec::monitor()).trace(8, 64, eo.ode, 3);
    CHECK_THAT(domain_area(e), WithinRel(exact, 1e-6));
    CHECK_THAT(green_area(e), WithinRel(exact, 1e-6));
    CHECK_THROWS_AS(lattice_area(e), Error);
}

TEST_CASE("jacobian consistency is second order")
{
    // r ∝ √ψ curves strongly across coarse cells; the order settles from about 32 cells
    for (ErrorNorm norm : {ErrorNorm::max, ErrorNorm::l2}) {
        std::vector<double> e;
        for (std::size_t n : {32, 64, 128})
            e.push_back(jacobian_consistency(generate_orthogonal(shifted, 0.5, 2.0, n, 8 * n, annulus_options()), norm));
        for (double q : convergence_order(e))
            CHECK(q >= 1.8);
    }
}

TEST_CASE("source term matches finite differences of the flux")
{
    const SolovevField s = SolovevField::standard_x();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(420, 700), uy(-350, 350);
    for (const BenchmarkProblem& pb : {BenchmarkProblem::flux_aligned(), BenchmarkProblem::localized({s.R0, 0})}) {
        for (int n = 0; n < 40; ++n) {
            Point p{ux(rng), uy(rng)};
            if (pb.kind == BenchmarkProblem::Kind::localized)
                p = {pb.xb + 0.6 * pb.sigma * (ux(rng) - 560) / 140, pb.yb + 0.6 * pb.sigma * uy(rng) / 350};
            auto flux = [&](Point q, int c) {
                const FluxJet j = s.jet(q);
                const double chi = benchmark_chi(pb, j, q).f;
                const ScalarJet f = analytic_solution(pb, j, q);
                return chi * (c == 0 ? f.fx : f.fy);
            };
            const double h = 0.05;
            auto d = [&](int c, Point dir) {
                auto at = [&](double t) { return flux({p.x + t * dir.x, p.y + t * dir.y}, c); };
                return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
            };
            const double fd = d(0, {1, 0}) + d(1, {0, 1});
            const double exact = rhs_for(pb, s.jet(p), p);
            CHECK_THAT(exact, WithinAbs(fd, 1e-6 * std::max(1e-12, std::abs(fd)) + 1e-14));
        }
    }
}

TEST_CASE("relative error of the exact field against itself is zero")
{
    const FluxAlignedGrid g = generate_orthogonal(shifted, 0.5, 2.0, 4, 16, annulus_options());
    std::vector<double> f(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        f[k] = std::sin(g.x[k]) + 2;
    CHECK(relative_l2_error(g, f, f) == 0.0);
    const std::vector<double> zero(g.size(), 0.0);
    CHECK_THROWS_AS(relative_l2_error(g, f, zero), Error);
}

TEST_CASE("annulus flux-aligned benchmark converges at second order")
{
    BenchmarkProblem pb = BenchmarkProblem::flux_aligned();
    pb.x0 = 3.0;
    pb.psi0 = 0.5;
    pb.psi1 = 2.0;
    EllipticOptions eo;
    eo.lattice.frame = ThetaFrame{{3.0, 0.0}};
    eo.lattice.search_radius = 0.5;
    const SolvedLattice s = solve_lattice(shifted, 0.5, 2.0, ChiSpec::conformal(), 32, 256, eo);
    const EllipticTracer tr(s.lattice, s.ubar, s.coefficients, ChiSpec::conformal());
    std::vector<double> e;
    for (std::size_t n : {8, 16, 32}) {
        const EllipticGrid g = tr.trace(n, 8 * n, eo.ode);
        e.push_back(solve_benchmark(shifted, g, g.psi0, g.psi1, pb).rel_error);
    }
    for (double q : convergence_order(e)) {
        CHECK(q >= 1.8);
        CHECK(q <= 2.3);
    }
}

TEST_CASE("benchmark input checks")
{
    const FluxAlignedGrid p3 = generate_orthogonal(shifted, 0.5, 2.0, 4, 16, annulus_options(), 3);
    CHECK_THROWS_AS(solve_benchmark(shifted, p3, 0.5, 2.0, BenchmarkProblem::flux_aligned()), Error);
    const CurvilinearGrid bare = stretched(6, 12, 1.0, 1.0);
    CHECK_THROWS_AS(solve_benchmark(shifted, bare, 0.5, 2.0, BenchmarkProblem::flux_aligned()), Error);
}
