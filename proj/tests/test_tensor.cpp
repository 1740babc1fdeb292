#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gridforge/tensor.hpp"

using namespace gridforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Jacobian2 random_jacobian(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-2, 2);
    for (;;) {
        Jacobian2 j{u(rng), u(rng), u(rng), u(rng)};
        if (std::abs(j.det()) > 0.1)
            return j;
    }
}

} // namespace

TEST_CASE("inverse times matrix is the identity")
{
    std::mt19937_64 rng(1);
    for (int n = 0; n < 100; ++n) {
        const Jacobian2 j = random_jacobian(rng);
        const Jacobian2 p = j * invert_jacobian(j);
        CHECK_THAT(p.a11, WithinAbs(1, 1e-13));
        CHECK_THAT(p.a12, WithinAbs(0, 1e-13));
        CHECK_THAT(p.a21, WithinAbs(0, 1e-13));
        CHECK_THAT(p.a22, WithinAbs(1, 1e-13));
    }
}

TEST_CASE("polar coordinates")
{
    // ζ = r, η = θ at (r cos t, r sin t): gradients (cos, sin), (−sin/r, cos/r)
    const double r = 2.5, t = 0.7;
    const Jacobian2 grads{std::cos(t), std::sin(t), -std::sin(t) / r, std::cos(t) / r};
    CHECK_THAT(sqrt_g_from_gradients(grads), WithinRel(r, 1e-14));
    const Metric2 m = inverse_metric_from_gradients(grads.a11, grads.a12, grads.a21, grads.a22);
    CHECK_THAT(m.g11, WithinRel(1.0, 1e-14));
    CHECK_THAT(m.g12, WithinAbs(0.0, 1e-15));
    CHECK_THAT(m.g22, WithinRel(1.0 / (r * r), 1e-14));
    CHECK_THAT(m.sqrt_g, WithinRel(r, 1e-14));
    const Jacobian2 inv = invert_jacobian(grads);
    // x_r = cos t, x_θ = −r sin t
    CHECK_THAT(inv.a11, WithinRel(std::cos(t), 1e-14));
    CHECK_THAT(inv.a12, WithinRel(-r * std::sin(t), 1e-14));
}

TEST_CASE("push_tensor of the identity is the inverse metric")
{
    std::mt19937_64 rng(2);
    for (int n = 0; n < 50; ++n) {
        const Jacobian2 j = random_jacobian(rng);
        const SymTensor2 t = push_tensor(SymTensor2::identity(), j);
        const Metric2 m = inverse_metric_from_gradients(j.a11, j.a12, j.a21, j.a22);
        CHECK_THAT(t.xx, WithinRel(m.g11, 1e-13));
        CHECK_THAT(t.xy, WithinAbs(m.g12, 1e-13));
        CHECK_THAT(t.yy, WithinRel(m.g22, 1e-13));
    }
}

TEST_CASE("push_tensor composes and keeps positive definiteness")
{
    std::mt19937_64 rng(3);
    const SymTensor2 chi{2.0, 0.3, 0.5};
    for (int n = 0; n < 50; ++n) {
        const Jacobian2 a = random_jacobian(rng), b = random_jacobian(rng);
        const SymTensor2 two = push_tensor(push_tensor(chi, a), b), one = push_tensor(chi, b * a);
        CHECK_THAT(two.xx, WithinRel(one.xx, 1e-11));
        CHECK_THAT(two.xy, WithinAbs(one.xy, 1e-11 * (std::abs(one.xx) + std::abs(one.yy))));
        CHECK_THAT(two.yy, WithinRel(one.yy, 1e-11));
        CHECK(one.positive_definite());
    }
}

TEST_CASE("one-forms and vectors pair invariantly")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int n = 0; n < 50; ++n) {
        const Jacobian2 grads = random_jacobian(rng);  // new from old
        const Jacobian2 back = invert_jacobian(grads); // old from new
        const Covector w{u(rng), u(rng)};              // in new components
        const Tangent v{u(rng), u(rng)};               // in new components
        const double direct = pair(w, v);
        const double mapped = pair(compose_oneforms(w, grads), push_vector(v, back));
        CHECK_THAT(mapped, WithinAbs(direct, 1e-12));
    }
}

TEST_CASE("singular jacobians are reported")
{
    const Jacobian2 s{1, 2, 2, 4};
    CHECK_THROWS_AS(invert_jacobian(s), Error);
    CHECK_THROWS_AS(volume_element(s), Error);
    CHECK_THROWS_AS(push_tensor(SymTensor2::identity(), s), Error);
    CHECK_THROWS_AS(inverse_metric_from_gradients(1, 0, 2, 0), Error);
    try {
        invert_jacobian(s);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::numerical);
        CHECK(e.code() == "singular_jacobian");
    }
    // the threshold scales with the length scale squared
    const Jacobian2 tiny{1e-8, 0, 0, 1e-8};
    CHECK_NOTHROW(invert_jacobian(tiny, 1e-8));
    CHECK_THROWS_AS(invert_jacobian(tiny, 1.0), Error);
}
