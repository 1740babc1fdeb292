#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "gridforge/flux.hpp"

using namespace gridforge;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

// ψ = x³: Δ*ψ = 3x, not of the Solovʼev form α x² + β
struct Cube {
    FluxJet jet(Point p) const { return {p.x * p.x * p.x, 3 * p.x * p.x, 0, 6 * p.x, 0, 0}; }
};

// fourth-order central differences of ψ and of the first derivatives
template <class F>
FluxJet fd_jet(const F& f, Point p, double h)
{
    auto d = [&](auto get, Point dir) {
        auto at = [&](double s) { return get(f.jet({p.x + s * dir.x, p.y + s * dir.y})); };
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    };
    const auto psi = [](const FluxJet& j) { return j.psi; };
    const auto px = [](const FluxJet& j) { return j.dx; };
    const auto py = [](const FluxJet& j) { return j.dy; };
    FluxJet r = f.jet(p);
    r.dx = d(psi, {1, 0});
    r.dy = d(psi, {0, 1});
    r.dxx = d(px, {1, 0});
    r.dxy = d(px, {0, 1});
    r.dyy = d(py, {0, 1});
    return r;
}

} // namespace

TEST_CASE("solovev jet matches the symbolic oracle")
{
    // values from tests/oracles/solovev_oracle.py
    struct Row { Point p; std::array<double, 6> v; };
    const double R0 = 547.891714877869;
    const Row rows[] = {
        {{R0, 0}, {-3.06878605526783694e+01, -5.22192046374185259e-02, -9.50598154794225249e-03,
                   1.17144116011513497e-03, -3.61953822722758676e-05, 5.58427661817775833e-04}},
        {{R0 + 100, 50}, {-2.85004858695996646e+01, 1.01395607898650458e-01, 3.09644015065756451e-02,
                          1.87533256397343258e-03, 1.60835434963943269e-04, 8.33403251158343827e-04}},
        {{400, -250}, {-5.84910022109258421e+00, -1.06304640870296452e-01, -5.14402390454151495e-02,
                       6.31382642008072783e-04, -3.29156645590530841e-04, 7.56831312452138074e-05}},
        {{700, 300}, {1.97780153429092138e+01, 3.48153478340045008e-01, 2.85757743344901838e-01,
                      2.40198900332000290e-03, 9.65081531257256406e-04, 1.07465694584574461e-03}},
    };
    const SolovevField s = SolovevField::standard_x();
    for (const Row& r : rows) {
        const FluxJet j = s.jet(r.p);
        const double got[6] = {j.psi, j.dx, j.dy, j.dxx, j.dxy, j.dyy};
        for (int k = 0; k < 6; ++k)
            CHECK_THAT(got[k], WithinRel(r.v[k], 1e-11));
    }
}

TEST_CASE("grad-shafranov operator of the solovev field is R^2/R0^3")
{
    const SolovevField s = SolovevField::standard_x();
    for (Point p : {Point{450, -100}, Point{600, 200}, Point{700, -300}}) {
        const double expect = p.x * p.x / (s.R0 * s.R0 * s.R0);
        CHECK_THAT(grad_shafranov_operator(s.jet(p), p), WithinRel(expect, 1e-8));
    }
}

TEST_CASE("gs_residual separates solutions from non-solutions")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(350, 750), uy(-400, 400);
    std::vector<Point> pts(500);
    for (auto& p : pts)
        p = {ux(rng), uy(rng)};
    CHECK(gs_residual(SolovevField::standard_x(), pts) <= 1e-8);
    CHECK(gs_residual(Cube{}, pts) > 1e-3);
    CHECK_THROWS_AS(gs_residual(Cube{}, std::span<const Point>(pts.data(), 2)), Error);
}

TEST_CASE("every jet component matches finite differences")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(350, 750), uy(-400, 400);
    const SolovevField s = SolovevField::standard_x();
    for (int n = 0; n < 200; ++n) {
        const Point p{ux(rng), uy(rng)};
        const FluxJet a = s.jet(p), b = fd_jet(s, p, 0.5);
        const double scale1 = std::hypot(a.dx, a.dy), scale2 = std::abs(a.dxx) + std::abs(a.dxy) + std::abs(a.dyy);
        CHECK(std::abs(a.dx - b.dx) <= 1e-7 * scale1);
        CHECK(std::abs(a.dy - b.dy) <= 1e-7 * scale1);
        CHECK(std::abs(a.dxx - b.dxx) <= 1e-7 * scale2);
        CHECK(std::abs(a.dxy - b.dxy) <= 1e-7 * scale2);
        CHECK(std::abs(a.dyy - b.dyy) <= 1e-7 * scale2);
    }
}

TEST_CASE("conformal condition of simple fields")
{
    const Annulus an;
    for (Point p : {Point{1, 0}, Point{0.3, -0.7}, Point{-2, 1}}) {
        const double psi = an.jet(p).psi;
        CHECK_THAT(conformal_condition(an, p), WithinRel(1.0 / psi, 1e-14));
    }
    // x⁴: planar gives 3/(4ψ), the axisymmetric operator 1/ψ
    const PowerFour p4;
    const Point q{1.3, 0.2};
    const double psi = p4.jet(q).psi;
    CHECK_THAT(conformal_condition(p4, q), WithinRel(0.75 / psi, 1e-13));
    CHECK_THAT(conformal_condition(p4, q, LaplacianKind::axisymmetric), WithinRel(1.0 / psi, 1e-13));
    // x²y²: 1/(2ψ)
    const ProductSquare ps;
    const Point r{0.7, 1.9};
    CHECK_THAT(conformal_condition(ps, r), WithinRel(0.5 / ps.jet(r).psi, 1e-13));
}

TEST_CASE("annulus conformal condition is constant along a contour")
{
    const Annulus an{{0.3, -0.2}, 2.0};
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < 64; ++k) {
        const double t = 2 * M_PI * k / 64;
        const double v = conformal_condition(an, {0.3 + 1.5 * std::cos(t), -0.2 + 1.5 * std::sin(t)});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo < 1e-12);
}

TEST_CASE("singular points are reported")
{
    CHECK_THROWS_AS(conformal_condition(Annulus{}, {0, 0}), Error);
    CHECK_THROWS_AS(SolovevField::standard_x().jet({-1, 0}), Error);
    CHECK_THROWS_AS(laplacian(FluxJet{}, {0, 0}, LaplacianKind::axisymmetric), Error);
}

TEST_CASE("analytic field dispatch")
{
    const AnalyticField f{Annulus{}};
    CHECK(f.name() == "annulus");
    CHECK_THAT(f.jet({1, 1}).psi, WithinAbs(1.0, 1e-15));
    CHECK(AnalyticField{SolovevField::standard_x()}.name() == "solovev");
}
