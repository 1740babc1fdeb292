#pragma once

// Analytic flux functions ψ(x,y) with exact derivatives through second
// order, plus the equilibrium checks used to validate them.

#include <array>
#include <cmath>
#include <concepts>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gridforge/error.hpp"
#include "gridforge/tensor.hpp"

namespace gridforge {

/// ψ and its partial derivatives at a point.
struct FluxJet {
    double psi = 0.0;
    double dx = 0.0, dy = 0.0;
    double dxx = 0.0, dxy = 0.0, dyy = 0.0;

    double laplacian() const { return dxx + dyy; }
    double grad_sq() const { return dx * dx + dy * dy; }
};

/// Anything that can produce a FluxJet at a point.
template <class F>
concept FluxFunction = requires(const F& f, Point p) {
    { f.jet(p) } -> std::same_as<FluxJet>;
};

/// ψ = scale·((x-cx)² + (y-cy)²)/2
struct Annulus {
    Point center{};
    double scale = 1.0;

    FluxJet jet(Point p) const
    {
        const double dx = p.x - center.x, dy = p.y - center.y;
        return {0.5 * scale * (dx * dx + dy * dy), scale * dx, scale * dy, scale, 0.0, scale};
    }
};

/// ψ = x⁴ (x plays the role of the major radius R).
struct PowerFour {
    FluxJet jet(Point p) const
    {
        const double x2 = p.x * p.x;
        return {x2 * x2, 4.0 * x2 * p.x, 0.0, 12.0 * x2, 0.0, 0.0};
    }
};

/// ψ = x²y²
struct ProductSquare {
    FluxJet jet(Point p) const
    {
        const double x2 = p.x * p.x, y2 = p.y * p.y;
        return {x2 * y2, 2.0 * p.x * y2, 2.0 * x2 * p.y, 2.0 * y2, 4.0 * p.x * p.y, 2.0 * x2};
    }
};

/**
 * Up-down asymmetric Solovʼev equilibrium in the Cerfon–Freidberg basis.
 *
 * ψ(R,Z) = amplitude · P(R/R0, Z/R0) with
 * P = x⁴/8 + A(x² ln x/2 − x⁴/8) + Σ c_i ψ_i(x,y).
 */
struct SolovevField {
    double A = 0.0;
    std::array<double, 12> c{};
    double R0 = 1.0;
    double amplitude = 1.0;
    double inverse_aspect_ratio = 0.0;
    double elongation = 1.0;
    double triangularity = 0.0;

    /// The single-null configuration used throughout the benchmarks.
    static SolovevField standard_x()
    {
        SolovevField f;
        f.A = 0.0;
        f.c = {0.07350114445500399706,  -0.08662417436317227513, -0.14639315434011026207,
               -0.07631237100536276213, 0.09031790113794227394,  -0.09157541239018724584,
               -0.003892282979837564482, 0.04271891225076417603, 0.22755456460027913117,
               -0.13047241360177695448, -0.03006974108476955225, 0.004212671892103931173};
        f.R0 = 547.891714877869;
        // ψ is normalized by R0 so that the closed surfaces span ψ ∈ [ψ_axis≈-30.7, 0].
        f.amplitude = f.R0;
        f.inverse_aspect_ratio = 0.41071428571428575;
        f.elongation = 1.75;
        f.triangularity = 0.47;
        return f;
    }

    double minor_radius() const { return inverse_aspect_ratio * R0; }

    FluxJet jet(Point p) const
    {
        if (!(p.x > 0.0)) {
            std::ostringstream os;
            os << "Solovev field evaluated at x=" << p.x << " (requires x > 0)";
            detail::numerical_failure("domain_error", os.str());
        }
        const double x = p.x / R0, y = p.y / R0;
        const double L = std::log(x);
        const double x2 = x * x, x3 = x2 * x, x4 = x2 * x2, x5 = x4 * x, x6 = x4 * x2;
        const double y2 = y * y, y3 = y2 * y, y4 = y2 * y2, y5 = y4 * y, y6 = y4 * y2;

        // value, d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2 of each basis function
        struct Term { double v, x, y, xx, xy, yy; };
        const std::array<Term, 12> b = {{
            {1.0, 0, 0, 0, 0, 0},
            {x2, 2 * x, 0, 2, 0, 0},
            {y2 - x2 * L, -2 * x * L - x, 2 * y, -2 * L - 3, 0, 2},
            {x4 - 4 * x2 * y2, 4 * x3 - 8 * x * y2, -8 * x2 * y, 12 * x2 - 8 * y2, -16 * x * y,
             -8 * x2},
            {2 * y4 - 9 * y2 * x2 + 3 * x4 * L - 12 * x2 * y2 * L,
             12 * x3 * L + 3 * x3 - 30 * x * y2 - 24 * x * y2 * L,
             8 * y3 - 18 * x2 * y - 24 * x2 * y * L,
             36 * x2 * L + 21 * x2 - 54 * y2 - 24 * y2 * L,
             -60 * x * y - 48 * x * y * L,
             24 * y2 - 18 * x2 - 24 * x2 * L},
            {x6 - 12 * x4 * y2 + 8 * x2 * y4, 6 * x5 - 48 * x3 * y2 + 16 * x * y4,
             -24 * x4 * y + 32 * x2 * y3, 30 * x4 - 144 * x2 * y2 + 16 * y4,
             -96 * x3 * y + 64 * x * y3, -24 * x4 + 96 * x2 * y2},
            {8 * y6 - 140 * y4 * x2 + 75 * y2 * x4 - 15 * x6 * L + 180 * x4 * y2 * L
                 - 120 * x2 * y4 * L,
             -400 * x * y4 - 240 * x * y4 * L + 480 * x3 * y2 + 720 * x3 * y2 * L - 90 * x5 * L
                 - 15 * x5,
             48 * y5 - 560 * x2 * y3 - 480 * x2 * y3 * L + 150 * x4 * y + 360 * x4 * y * L,
             -640 * y4 - 240 * y4 * L + 2160 * x2 * y2 + 2160 * x2 * y2 * L - 450 * x4 * L
                 - 165 * x4,
             -1600 * x * y3 - 960 * x * y3 * L + 960 * x3 * y + 1440 * x3 * y * L,
             240 * y4 - 1680 * x2 * y2 - 1440 * x2 * y2 * L + 150 * x4 + 360 * x4 * L},
            {y, 0, 1, 0, 0, 0},
            {y * x2, 2 * x * y, x2, 2 * y, 2 * x, 0},
            {y3 - 3 * y * x2 * L, -6 * x * y * L - 3 * x * y, 3 * y2 - 3 * x2 * L,
             -6 * y * L - 9 * y, -6 * x * L - 3 * x, 6 * y},
            {3 * y * x4 - 4 * y3 * x2, 12 * x3 * y - 8 * x * y3, 3 * x4 - 12 * x2 * y2,
             36 * x2 * y - 8 * y3, 12 * x3 - 24 * x * y2, -24 * x2 * y},
            {8 * y5 - 45 * y * x4 - 80 * y3 * x2 * L + 60 * y * x4 * L,
             -120 * x3 * y - 160 * x * y3 * L - 80 * x * y3 + 240 * x3 * y * L,
             40 * y4 - 45 * x4 - 240 * x2 * y2 * L + 60 * x4 * L,
             -120 * x2 * y - 160 * y3 * L - 240 * y3 + 720 * x2 * y * L,
             -120 * x3 - 480 * x * y2 * L - 240 * x * y2 + 240 * x3 * L,
             160 * y3 - 480 * x2 * y * L},
        }};

        // particular solution x⁴/8 + A(x² ln x/2 − x⁴/8)
        Term s{x4 / 8 + A * (0.5 * x2 * L - x4 / 8), x3 / 2 + A * (x * L + 0.5 * x - 0.5 * x3), 0,
               1.5 * x2 + A * (L + 1.5 - 1.5 * x2), 0, 0};
        for (std::size_t i = 0; i < b.size(); ++i) {
            s.v += c[i] * b[i].v;
            s.x += c[i] * b[i].x;
            s.y += c[i] * b[i].y;
            s.xx += c[i] * b[i].xx;
            s.xy += c[i] * b[i].xy;
            s.yy += c[i] * b[i].yy;
        }
        const double k1 = amplitude / R0, k2 = amplitude / (R0 * R0);
        return {amplitude * s.v, k1 * s.x, k1 * s.y, k2 * s.xx, k2 * s.xy, k2 * s.yy};
    }
};

/**
 * Lower X-point of a Solovʼev field: Newton on ∇ψ = 0 started from the
 * shape's design point (R0(1 − 1.1δε), −1.1κεR0). Empty if Newton does not
 * settle on a saddle nearby.
 */
inline std::optional<Point> x_point(const SolovevField& f)
{
    const double eps = f.inverse_aspect_ratio;
    if (!(eps > 0.0))
        return std::nullopt;
    Point p{f.R0 * (1.0 - 1.1 * f.triangularity * eps), -1.1 * f.elongation * eps * f.R0};
    const Point start = p;
    for (int it = 0; it < 50; ++it) {
        if (!(p.x > 0.0))
            return std::nullopt;
        const FluxJet j = f.jet(p);
        const double det = j.dxx * j.dyy - j.dxy * j.dxy;
        if (!(std::abs(det) > 0.0))
            return std::nullopt;
        const double sx = (j.dyy * j.dx - j.dxy * j.dy) / det, sy = (j.dxx * j.dy - j.dxy * j.dx) / det;
        p = {p.x - sx, p.y - sy};
        if (std::hypot(sx, sy) <= 1e-12 * f.R0) {
            const FluxJet e = f.jet(p);
            const bool saddle = e.dxx * e.dyy - e.dxy * e.dxy < 0.0;
            if (saddle && std::hypot(p.x - start.x, p.y - start.y) <= f.minor_radius())
                return p;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

/// Closed set of analytic fields selectable from the CLI.
struct AnalyticField {
    std::variant<Annulus, PowerFour, ProductSquare, SolovevField> kind;

    FluxJet jet(Point p) const
    {
        return std::visit([&](const auto& f) { return f.jet(p); }, kind);
    }

    std::string name() const
    {
        struct Namer {
            std::string operator()(const Annulus&) const { return "annulus"; }
            std::string operator()(const PowerFour&) const { return "powerfour"; }
            std::string operator()(const ProductSquare&) const { return "productsquare"; }
            std::string operator()(const SolovevField&) const { return "solovev"; }
        };
        return std::visit(Namer{}, kind);
    }
};

template <FluxFunction F>
FluxJet eval_jet(const F& field, Point p)
{
    return field.jet(p);
}

/// Which Laplacian enters a conformality ratio.
enum class LaplacianKind {
    planar,       ///< ψ_xx + ψ_yy
    axisymmetric, ///< ψ_xx + ψ_x/x + ψ_yy, x the major radius
};

inline double laplacian(const FluxJet& j, Point p, LaplacianKind kind)
{
    if (kind == LaplacianKind::planar)
        return j.dxx + j.dyy;
    if (!(p.x > 0.0))
        detail::numerical_failure("domain_error", "axisymmetric Laplacian requires x > 0");
    return j.dxx + j.dx / p.x + j.dyy;
}

/// Δψ/(∇ψ)²; the flux admits aligned conformal coordinates iff this is a function of ψ alone.
template <FluxFunction F>
double conformal_condition(const F& field, Point p, LaplacianKind kind = LaplacianKind::planar)
{
    const FluxJet j = field.jet(p);
    const double g2 = j.grad_sq();
    if (!(g2 > 0.0))
        detail::numerical_failure("singular_gradient", "conformal_condition: grad psi vanishes");
    return laplacian(j, p, kind) / g2;
}

/// Grad–Shafranov operator Δ*ψ = R ∂_R(R⁻¹ ∂_R ψ) + ∂_Z² ψ.
inline double grad_shafranov_operator(const FluxJet& j, Point p)
{
    return j.dxx - j.dx / p.x + j.dyy;
}

/**
 * Relative residual of Δ*ψ after a least-squares fit α·R² + β.
 *
 * Solovʼev profiles have a right-hand side of exactly this form, so the
 * residual measures how well a coded field solves the equation.
 * Returns ‖Δ*ψ − fit‖₂ / ‖Δ*ψ‖₂ (0 when Δ*ψ vanishes identically).
 */
template <FluxFunction F>
double gs_residual(const F& field, std::span<const Point> samples)
{
    if (samples.size() < 3)
        detail::config_failure("too_few_samples", "gs_residual needs at least 3 samples");
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0, norm = 0, mean_r2 = 0;
    for (const Point& p : samples)
        mean_r2 += p.x * p.x / static_cast<double>(samples.size());
    std::vector<double> op(samples.size()), r2s(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Point p = samples[i];
        if (!(p.x > 0.0))
            detail::numerical_failure("domain_error", "gs_residual requires x > 0");
        op[i] = grad_shafranov_operator(field.jet(p), p);
        r2s[i] = p.x * p.x / mean_r2; // scaled for a well-conditioned fit
        s11 += r2s[i] * r2s[i];
        s12 += r2s[i];
        s22 += 1.0;
        r1 += r2s[i] * op[i];
        r2 += op[i];
        norm += op[i] * op[i];
    }
    if (norm == 0.0)
        return 0.0;
    const double det = s11 * s22 - s12 * s12;
    double alpha = 0.0, beta = 0.0;
    if (std::abs(det) > 1e-300) {
        alpha = (r1 * s22 - r2 * s12) / det;
        beta = (s11 * r2 - s12 * r1) / det;
    }
    double res = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = op[i] - (alpha * r2s[i] + beta);
        res += d * d;
    }
    return std::sqrt(res / norm);
}

} // namespace gridforge
