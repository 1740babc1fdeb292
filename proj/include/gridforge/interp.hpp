#pragma once

// Bicubic Hermite interpolation on a uniform lattice that is bounded in
// coord1 and periodic in coord2. Nodal derivatives come from fourth-order
// finite differences (one-sided at the coord1 ends).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "gridforge/error.hpp"

namespace gridforge {

/// Uniform lattice geometry: coord1 = c1_min + i·h1 (i < n1), coord2 = j·2π/n2 periodic.
struct LatticeShape {
    std::size_t n1 = 0, n2 = 0;
    double c1_min = 0.0;
    double h1 = 1.0;

    double h2() const { return 2.0 * std::numbers::pi / static_cast<double>(n2); }
    double c1_max() const { return c1_min + h1 * static_cast<double>(n1 - 1); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n2 + j; }
};

namespace detail {

/// First-derivative weights at `x0` for the given nodes (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, std::span<const double> nodes)
{
    const std::size_t n = nodes.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0, c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = c[i][1];
    return w;
}

inline void check_order(int order)
{
    if (order != 2 && order != 4 && order != 6)
        config_failure("bad_order", "difference order must be 2, 4 or 6");
}

} // namespace detail

/// Derivative along coord1 (rows) of the given even order; the stencil is
/// shifted inward near both ends.
inline std::vector<double> derivative_coord1(const LatticeShape& s, std::span<const double> f, int order = 4)
{
    detail::check_order(order);
    const std::size_t n1 = s.n1, n2 = s.n2, width = static_cast<std::size_t>(order) + 1;
    if (n1 < width)
        detail::config_failure("bad_resolution", "too few rows for the difference stencil");
    std::vector<double> d(f.size(), 0.0);
    std::vector<double> nodes(width);
    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t half = width / 2;
        std::size_t first = i < half ? 0 : i - half;
        if (first + width > n1)
            first = n1 - width;
        for (std::size_t m = 0; m < width; ++m)
            nodes[m] = static_cast<double>(first + m);
        const std::vector<double> w = detail::fd_weights(static_cast<double>(i), nodes);
        for (std::size_t j = 0; j < n2; ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < width; ++m)
                acc += w[m] * f[(first + m) * n2 + j];
            d[i * n2 + j] = acc / s.h1;
        }
    }
    return d;
}

/// Periodic central derivative along coord2 of the given even order.
inline std::vector<double> derivative_coord2(const LatticeShape& s, std::span<const double> f, int order = 4)
{
    detail::check_order(order);
    const std::size_t n2 = s.n2, half = static_cast<std::size_t>(order) / 2;
    if (n2 < 2 * half + 1)
        detail::config_failure("bad_resolution", "too few columns for the periodic stencil");
    std::vector<double> nodes(2 * half + 1);
    for (std::size_t m = 0; m < nodes.size(); ++m)
        nodes[m] = static_cast<double>(m) - static_cast<double>(half);
    const std::vector<double> w = detail::fd_weights(0.0, nodes);
    std::vector<double> d(f.size());
    const double inv = 1.0 / s.h2();
    for (std::size_t i = 0; i < s.n1; ++i) {
        const double* row = f.data() + i * n2;
        for (std::size_t j = 0; j < n2; ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < nodes.size(); ++m)
                acc += w[m] * row[(j + n2 + m - half) % n2];
            d[i * n2 + j] = acc * inv;
        }
    }
    return d;
}

/**
 * Several scalar fields on one lattice, interpolated together.
 *
 * Queries within one cell beyond either coord1 end reuse the end cell's
 * polynomial; farther queries raise an out_of_box error.
 */
class LatticeInterpolator {
public:
    LatticeInterpolator() = default;

    explicit LatticeInterpolator(LatticeShape shape) : m_shape(shape)
    {
        if (shape.n1 < 5 || shape.n2 < 5)
            detail::config_failure("bad_resolution", "interpolation lattice needs at least 5x5 nodes");
    }

    const LatticeShape& shape() const { return m_shape; }
    std::size_t field_count() const { return m_fields.size(); }

    /// Adds a nodal field; returns its slot.
    std::size_t add(std::span<const double> values)
    {
        if (values.size() != m_shape.n1 * m_shape.n2)
            detail::config_failure("bad_field", "field size does not match the lattice");
        Field f;
        f.v.assign(values.begin(), values.end());
        f.d1 = derivative_coord1(m_shape, values);
        f.d2 = derivative_coord2(m_shape, values);
        f.d12 = derivative_coord2(m_shape, f.d1);
        m_fields.push_back(std::move(f));
        return m_fields.size() - 1;
    }

    /// Value of every field at (c1, c2), written to `out` in slot order.
    void evaluate(double c1, double c2, std::span<double> out) const
    {
        Weights w = weights(c1, c2);
        for (std::size_t f = 0; f < m_fields.size(); ++f)
            out[f] = apply(m_fields[f], w);
    }

    /// Values of slots [first, first + out.size()).
    void evaluate_range(double c1, double c2, std::size_t first, std::span<double> out) const
    {
        Weights w = weights(c1, c2);
        for (std::size_t f = 0; f < out.size(); ++f)
            out[f] = apply(m_fields[first + f], w);
    }

    double evaluate(std::size_t slot, double c1, double c2) const
    {
        return apply(m_fields.at(slot), weights(c1, c2));
    }

    /// Value and partial derivatives of one field.
    std::array<double, 3> evaluate_with_gradient(std::size_t slot, double c1, double c2) const
    {
        const Field& f = m_fields.at(slot);
        std::array<double, 3> r{};
        Weights w = weights(c1, c2);
        r[0] = apply(f, w);
        Weights wt = weights(c1, c2, 1, 0);
        r[1] = apply(f, wt);
        Weights ws = weights(c1, c2, 0, 1);
        r[2] = apply(f, ws);
        return r;
    }

private:
    struct Field {
        std::vector<double> v, d1, d2, d12;
    };
    struct Weights {
        std::size_t k00, k10, k01, k11;
        std::array<double, 2> a0, a1; // coord1 Hermite weights (value, slope·h1) for left/right nodes
        std::array<double, 2> b0, b1; // coord2 weights
        double h1, h2;
    };

    static void hermite(double t, int deriv, double h, std::array<double, 2>& left, std::array<double, 2>& right)
    {
        if (deriv == 0) {
            const double t2 = t * t, t3 = t2 * t;
            left = {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t};
            right = {-2 * t3 + 3 * t2, t3 - t2};
        } else {
            const double t2 = t * t;
            left = {(6 * t2 - 6 * t) / h, 3 * t2 - 4 * t + 1};
            right = {(-6 * t2 + 6 * t) / h, 3 * t2 - 2 * t};
        }
        // slope weights multiply h·f', with 1/h already applied for derivatives
        left[1] *= (deriv == 0 ? h : 1.0);
        right[1] *= (deriv == 0 ? h : 1.0);
    }

    Weights weights(double c1, double c2, int d1 = 0, int d2 = 0) const
    {
        const LatticeShape& s = m_shape;
        const double r = (c1 - s.c1_min) / s.h1;
        const double last = static_cast<double>(s.n1 - 1);
        if (!(r >= -1.0 - 1e-12 && r <= last + 1.0 + 1e-12)) {
            std::ostringstream os;
            os << "interpolation query coord1=" << c1 << " outside [" << s.c1_min << ", " << s.c1_max()
               << "] by more than one cell";
            detail::numerical_failure("out_of_box", os.str());
        }
        std::size_t i = r <= 0 ? 0 : static_cast<std::size_t>(std::floor(r));
        if (i > s.n1 - 2)
            i = s.n1 - 2;
        const double t = r - static_cast<double>(i);

        const double period = 2.0 * std::numbers::pi;
        double q = std::fmod(c2, period);
        if (q < 0)
            q += period;
        const double rq = q / s.h2();
        std::size_t j = static_cast<std::size_t>(std::floor(rq));
        if (j >= s.n2)
            j = s.n2 - 1;
        const double u = rq - static_cast<double>(j);
        const std::size_t jn = (j + 1) % s.n2;

        Weights w;
        w.k00 = s.index(i, j);
        w.k10 = s.index(i + 1, j);
        w.k01 = s.index(i, jn);
        w.k11 = s.index(i + 1, jn);
        w.h1 = s.h1;
        w.h2 = s.h2();
        hermite(t, d1, s.h1, w.a0, w.a1);
        hermite(u, d2, s.h2(), w.b0, w.b1);
        return w;
    }

    static double apply(const Field& f, const Weights& w)
    {
        auto node = [&](std::size_t k, const std::array<double, 2>& a, const std::array<double, 2>& b) {
            // a[1], b[1] already carry the h factor for value interpolation
            return a[0] * b[0] * f.v[k] + a[1] * b[0] * f.d1[k] + a[0] * b[1] * f.d2[k] + a[1] * b[1] * f.d12[k];
        };
        return node(w.k00, w.a0, w.b0) + node(w.k10, w.a1, w.b0) + node(w.k01, w.a0, w.b1) +
               node(w.k11, w.a1, w.b1);
    }

    LatticeShape m_shape;
    std::vector<Field> m_fields;
};

} // namespace gridforge
