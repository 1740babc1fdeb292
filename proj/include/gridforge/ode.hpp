#pragma once

// Adaptive Dormand–Prince 5(4) integration of streamlines, the geometric
// poloidal angle and contour-point root finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "gridforge/error.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/tensor.hpp"

namespace gridforge {

struct IntegratorConfig {
    double rtol = 1e-11;
    double atol = 1e-13;
    std::size_t max_steps = 200000;
    double initial_step = 0.0; ///< 0 selects |t1 - t0| / 64

    void validate() const
    {
        if (!(rtol > 0.0) || !(atol > 0.0) || max_steps < 1)
            detail::config_failure("bad_integrator_config", "rtol, atol must be > 0 and max_steps >= 1");
    }
};

template <std::size_t N>
using State = std::array<double, N>;

/**
 * Embedded 5(4) Runge–Kutta pair with PI step-size control.
 *
 * `rhs(t, y)` returns dy/dt. The integrator keeps the last accepted step
 * size, so consecutive calls continue smoothly along one trajectory.
 */
template <std::size_t N>
class DormandPrince {
public:
    explicit DormandPrince(IntegratorConfig cfg) : m_cfg(cfg) { m_cfg.validate(); }

    template <class Rhs>
    State<N> integrate(Rhs&& rhs, State<N> y, double t0, double t1)
    {
        if (t0 == t1)
            return y;
        const double span = t1 - t0;
        const double dir = span > 0 ? 1.0 : -1.0;
        double h = m_h > 0 ? m_h : (m_cfg.initial_step > 0 ? m_cfg.initial_step : std::abs(span) / 64.0);
        double t = t0;
        State<N> k1 = rhs(t, y);
        double err_prev = 1e-4;
        bool last_rejected = false;
        for (std::size_t step = 0; step < m_cfg.max_steps; ++step) {
            bool final_step = false;
            if (std::abs(h) >= std::abs(t1 - t) * (1.0 - 1e-12)) {
                h = std::abs(t1 - t);
                final_step = true;
            }
            const double hs = dir * h;
            State<N> y5, err;
            State<N> k7;
            attempt(rhs, t, y, k1, hs, y5, err, k7);
            double e = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < N; ++i) {
                if (!std::isfinite(y5[i]))
                    finite = false;
                const double sc = m_cfg.atol + m_cfg.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
                e += (err[i] / sc) * (err[i] / sc);
            }
            e = finite ? std::sqrt(e / N) : 1e10;
            if (e <= 1.0) {
                t = final_step ? t1 : t + hs;
                y = y5;
                k1 = k7; // first-same-as-last
                double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                err_prev = std::max(e, 1e-4);
                last_rejected = false;
                if (!final_step)
                    m_h = h;
                h *= fac;
                if (final_step) {
                    m_h = std::max(m_h, h);
                    return y;
                }
            } else {
                h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
                last_rejected = true;
                if (h < 1e-14 * std::max(std::abs(t), std::abs(span)))
                    detail::numerical_failure("step_failure", "DormandPrince: step size underflow");
            }
        }
        std::ostringstream os;
        os << "DormandPrince: tolerance not met within " << m_cfg.max_steps << " steps";
        detail::numerical_failure("step_failure", os.str());
    }

    /// Integrates sequentially through monotone `targets`, returning the state at each.
    template <class Rhs>
    std::vector<State<N>> integrate_through(Rhs&& rhs, State<N> y, double t0, std::span<const double> targets)
    {
        std::vector<State<N>> out;
        out.reserve(targets.size());
        double t = t0;
        for (double target : targets) {
            y = integrate(rhs, y, t, target);
            t = target;
            out.push_back(y);
        }
        return out;
    }

private:
    template <class Rhs>
    static void attempt(Rhs& rhs, double t, const State<N>& y, const State<N>& k1, double h,
                        State<N>& y5, State<N>& err, State<N>& k7)
    {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                         b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        State<N> tmp;
        auto stage = [&](auto&& combine) {
            for (std::size_t i = 0; i < N; ++i)
                tmp[i] = y[i] + h * combine(i);
            return tmp;
        };
        const State<N> k2 = rhs(t + c2 * h, stage([&](std::size_t i) { return a21 * k1[i]; }));
        const State<N> k3 = rhs(t + c3 * h, stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }));
        const State<N> k4 = rhs(t + c4 * h, stage([&](std::size_t i) {
            return a41 * k1[i] + a42 * k2[i] + a43 * k3[i];
        }));
        const State<N> k5 = rhs(t + c5 * h, stage([&](std::size_t i) {
            return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
        }));
        const State<N> k6 = rhs(t + h, stage([&](std::size_t i) {
            return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
        }));
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(t + h, y5);
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    IntegratorConfig m_cfg;
    double m_h = 0.0;
};

namespace detail {
inline double checked_denominator(double den, double scale)
{
    if (!(std::abs(den) > 1e-300 * std::max(1.0, scale)) || !std::isfinite(den))
        numerical_failure("vanishing_denominator", "streamline reparameterization denominator vanishes");
    return den;
}
} // namespace detail

/**
 * Streamline of `vfield` re-parameterized by a scalar f:
 * dx/df = v^x / (v·∇f), dy/df = v^y / (v·∇f).
 *
 * `vfield(Point) -> Tangent` (Cartesian components) and
 * `grad_f(Point) -> Covector`.
 */
template <class VField, class Grad>
Point integrate_streamline(VField&& vfield, Grad&& grad_f, Point start, double from, double to,
                           const IntegratorConfig& cfg = {})
{
    auto rhs = [&](double, const State<2>& s) {
        const Point p{s[0], s[1]};
        const Tangent v = vfield(p);
        const double den = detail::checked_denominator(pair(grad_f(p), v), std::abs(v.c1) + std::abs(v.c2));
        return State<2>{v.c1 / den, v.c2 / den};
    };
    DormandPrince<2> dp(cfg);
    const State<2> end = dp.integrate(rhs, State<2>{start.x, start.y}, from, to);
    return {end[0], end[1]};
}

/// As integrate_streamline, returning the point at each of the monotone `params`.
template <class VField, class Grad>
std::vector<Point> integrate_streamline_dense(VField&& vfield, Grad&& grad_f, Point start, double from,
                                              std::span<const double> params, const IntegratorConfig& cfg = {})
{
    auto rhs = [&](double, const State<2>& s) {
        const Point p{s[0], s[1]};
        const Tangent v = vfield(p);
        const double den = detail::checked_denominator(pair(grad_f(p), v), std::abs(v.c1) + std::abs(v.c2));
        return State<2>{v.c1 / den, v.c2 / den};
    };
    DormandPrince<2> dp(cfg);
    std::vector<Point> out;
    for (const State<2>& s : dp.integrate_through(rhs, State<2>{start.x, start.y}, from, params))
        out.push_back({s[0], s[1]});
    return out;
}

struct PointWithAux {
    Point point;
    double aux = 0.0;
};

/// Streamline plus an auxiliary scalar with `aux_rhs(Point, aux)` = d aux / d parameter.
template <class VField, class Grad, class AuxRhs>
PointWithAux integrate_with_aux(VField&& vfield, Grad&& grad_f, AuxRhs&& aux_rhs, Point start, double aux_start,
                                double from, double to, const IntegratorConfig& cfg = {})
{
    auto rhs = [&](double, const State<3>& s) {
        const Point p{s[0], s[1]};
        const Tangent v = vfield(p);
        const double den = detail::checked_denominator(pair(grad_f(p), v), std::abs(v.c1) + std::abs(v.c2));
        return State<3>{v.c1 / den, v.c2 / den, aux_rhs(p, s[2])};
    };
    DormandPrince<3> dp(cfg);
    const State<3> end = dp.integrate(rhs, State<3>{start.x, start.y, aux_start}, from, to);
    return {{end[0], end[1]}, end[2]};
}

/// Center of the geometric poloidal angle.
struct ThetaFrame {
    Point center{};
};

namespace detail {
inline double checked_rho2(const ThetaFrame& f, Point p)
{
    const double dx = p.x - f.center.x, dy = p.y - f.center.y;
    const double r2 = dx * dx + dy * dy;
    if (!(r2 > 0.0))
        numerical_failure("center_point", "theta is undefined at the frame center");
    return r2;
}
} // namespace detail

/// Geometric poloidal angle in (-π, π] (two-branch arccos definition).
inline double theta(const ThetaFrame& f, Point p)
{
    const double r2 = detail::checked_rho2(f, p);
    const double c = std::clamp((p.x - f.center.x) / std::sqrt(r2), -1.0, 1.0);
    const double a = std::acos(c);
    return p.y >= f.center.y ? a : -a;
}

/// dθ = -(y-y0)/ρ² dx + (x-x0)/ρ² dy
inline Covector dtheta(const ThetaFrame& f, Point p)
{
    const double r2 = detail::checked_rho2(f, p);
    return {-(p.y - f.center.y) / r2, (p.x - f.center.x) / r2};
}

/**
 * Point on the ray origin + s·direction (s ≥ 0) with ψ = psi_target.
 *
 * The ray is scanned outward for the first sign change of ψ - psi_target,
 * the bracket is bisected and the root polished by Newton steps along the
 * ray. `psi_scale` sets the acceptance tolerance 1e-12·psi_scale.
 */
template <FluxFunction F>
Point find_flux_point(const F& field, Point origin, Point direction, double psi_target, double max_distance,
                      double psi_scale = 1.0, std::size_t scan_samples = 2000)
{
    const double norm = std::hypot(direction.x, direction.y);
    if (!(norm > 0.0) || !(max_distance > 0.0))
        detail::config_failure("bad_ray", "find_flux_point: ray direction and length must be nonzero");
    const Point d{direction.x / norm, direction.y / norm};
    auto at = [&](double s) { return Point{origin.x + s * d.x, origin.y + s * d.y}; };
    auto g = [&](double s) { return field.jet(at(s)).psi - psi_target; };

    double lo = 0.0, glo = g(0.0);
    if (glo == 0.0)
        return origin;
    double hi = -1.0;
    for (std::size_t k = 1; k <= scan_samples; ++k) {
        const double s = max_distance * static_cast<double>(k) / static_cast<double>(scan_samples);
        const double gs = g(s);
        if (gs == 0.0)
            return at(s);
        if ((gs > 0) != (glo > 0)) {
            hi = s;
            break;
        }
        lo = s;
        glo = gs;
    }
    if (hi < 0)
        detail::numerical_failure("bracket_failure", "find_flux_point: no contour crossing on the ray");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const FluxJet j = field.jet(at(s));
        const double slope = j.dx * d.x + j.dy * d.y;
        if (slope == 0.0)
            break;
        const double next = s - (j.psi - psi_target) / slope;
        if (!(next >= lo && next <= hi))
            break;
        s = next;
    }
    const Point p = at(s);
    if (!(std::abs(field.jet(p).psi - psi_target) <= 1e-12 * std::max(psi_scale, std::abs(psi_target)) + 1e-14))
        detail::numerical_failure("bracket_failure", "find_flux_point: root not resolved to tolerance");
    return p;
}

} // namespace gridforge
