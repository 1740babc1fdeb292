#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "gridforge/ode.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exponential decay")
{
    DormandPrince<1> dp({});
    const State<1> y = dp.integrate([](double, const State<1>& s) { return State<1>{-s[0]}; }, {1.0}, 0.0, 3.0);
    CHECK_THAT(y[0], WithinRel(std::exp(-3.0), 1e-10));
}

TEST_CASE("harmonic oscillator forward and back")
{
    auto rhs = [](double, const State<2>& s) { return State<2>{s[1], -s[0]}; };
    DormandPrince<2> dp({});
    const State<2> y = dp.integrate(rhs, {1.0, 0.0}, 0.0, 2 * std::numbers::pi);
    CHECK_THAT(y[0], WithinAbs(1.0, 1e-9));
    CHECK_THAT(y[1], WithinAbs(0.0, 1e-9));
    DormandPrince<2> back({});
    const State<2> z = back.integrate(rhs, y, 2 * std::numbers::pi, 0.0);
    CHECK_THAT(z[0], WithinAbs(1.0, 1e-9));
}

TEST_CASE("tolerance controls the error")
{
    auto rhs = [](double t, const State<1>& s) { return State<1>{std::cos(t) * s[0]}; };
    const double exact = std::exp(std::sin(5.0));
    IntegratorConfig loose;
    loose.rtol = 1e-5;
    loose.atol = 1e-7;
    const double e_loose = std::abs(DormandPrince<1>(loose).integrate(rhs, {1.0}, 0, 5)[0] - exact);
    const double e_tight = std::abs(DormandPrince<1>({}).integrate(rhs, {1.0}, 0, 5)[0] - exact);
    CHECK(e_tight < e_loose);
    CHECK(e_tight < 1e-9 * exact);
}

TEST_CASE("streamline of a rotation reparameterized by angle")
{
    // v = (−y, x) with f = θ: dθ along v is 1, so integrating θ from 0 to π/2 rotates by π/2
    const ThetaFrame fr{{0, 0}};
    auto v = [](Point p) { return Tangent{-p.y, p.x}; };
    auto g = [&](Point p) { return dtheta(fr, p); };
    const Point q = integrate_streamline(v, g, {2, 0}, 0.0, std::numbers::pi / 2);
    CHECK_THAT(q.x, WithinAbs(0.0, 1e-9));
    CHECK_THAT(q.y, WithinAbs(2.0, 1e-9));
    const std::vector<double> ts = {0.5, 1.0, 2.0};
    const auto pts = integrate_streamline_dense(v, g, {2, 0}, 0.0, ts);
    REQUIRE(pts.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK_THAT(pts[k].x, WithinAbs(2 * std::cos(ts[k]), 1e-9));
        CHECK_THAT(pts[k].y, WithinAbs(2 * std::sin(ts[k]), 1e-9));
    }
}

TEST_CASE("auxiliary quantity along a streamline")
{
    // radial field, f = r²/2: arc length accumulates as dr = df / r
    auto v = [](Point p) { return Tangent{p.x, p.y}; };
    auto g = [](Point p) { return Covector{p.x, p.y}; };
    auto aux = [](Point p, double) { return 1.0 / std::hypot(p.x, p.y); };
    const PointWithAux r = integrate_with_aux(v, g, aux, {1, 0}, 0.0, 0.5, 2.0);
    CHECK_THAT(r.point.x, WithinRel(2.0, 1e-10));
    CHECK_THAT(r.aux, WithinRel(1.0, 1e-10));
}

TEST_CASE("theta frame")
{
    const ThetaFrame fr{{1, 1}};
    CHECK_THAT(theta(fr, {2, 1}), WithinAbs(0.0, 1e-15));
    CHECK_THAT(theta(fr, {1, 2}), WithinAbs(std::numbers::pi / 2, 1e-15));
    const Covector d = dtheta(fr, {1, 3});
    CHECK_THAT(d.c1, WithinAbs(-0.5, 1e-15));
    CHECK_THAT(d.c2, WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(dtheta(fr, {1, 1}), Error);
}

TEST_CASE("step budget and bad configurations")
{
    IntegratorConfig c;
    c.max_steps = 3;
    auto stiff = [](double, const State<1>& s) { return State<1>{-1e4 * s[0]}; };
    CHECK_THROWS_AS(DormandPrince<1>(c).integrate(stiff, {1.0}, 0, 10), Error);
    IntegratorConfig bad;
    bad.rtol = 0;
    CHECK_THROWS_AS(DormandPrince<1>(bad), Error);
    // a tangent field that never crosses f: zero denominator
    auto v = [](Point) { return Tangent{0, 1}; };
    auto g = [](Point) { return Covector{1, 0}; };
    CHECK_THROWS_AS(integrate_streamline(v, g, {1, 0}, 0.0, 1.0), Error);
}
