#pragma once

// Shared storage for structured curvilinear grids: node coordinates and
// the gradients of the grid coordinates on a tensor-product lattice.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gridforge/error.hpp"

#include "gridforge/tensor.hpp"

namespace gridforge {

/// A closed coordinate line coord1 = const, sampled at the coord2 nodes.
struct BoundaryCurve {
    std::vector<double> x, y;
    std::vector<double> dx, dy; ///< ∂x/∂coord2, ∂y/∂coord2
    std::vector<double> g1x, g1y, g2x, g2y; ///< gradients of coord1 and coord2

    std::size_t size() const { return x.size(); }
    void resize(std::size_t n)
    {
        for (auto* v : {&x, &y, &dx, &dy, &g1x, &g1y, &g2x, &g2y})
            v->assign(n, 0.0);
    }
};

/// Gauss–Legendre points and weights on [−1, 1].
struct GaussRule {
    std::vector<double> nodes, weights;
};

inline GaussRule gauss_legendre(std::size_t p)
{
    if (p < 1 || p > 16)
        detail::config_failure("bad_nodes_per_cell", "nodes per cell must be between 1 and 16");
    GaussRule r;
    r.nodes.resize(p);
    r.weights.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
        // Newton on P_p from the Chebyshev guess; ascending order
        double x = -std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(p) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= p; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(p) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

/// `p` Gauss–Legendre points in each of `cells` equal cells of [0, length].
inline std::vector<double> cell_nodes(std::size_t cells, double length, std::size_t p = 1)
{
    const GaussRule r = gauss_legendre(p);
    const double h = length / static_cast<double>(cells);
    std::vector<double> v;
    v.reserve(cells * p);
    for (std::size_t i = 0; i < cells; ++i)
        for (double xi : r.nodes)
            v.push_back(h * (static_cast<double>(i) + 0.5 * (1.0 + xi)));
    return v;
}

/**
 * Tensor-product grid (coord1, coord2) ∈ [0, coord1_max] × [0, 2π).
 *
 * Nodes are Gauss–Legendre points of uniform cells (one point per cell puts
 * them at the cell centers). Node arrays are row-major with coord2 fastest.
 * `d1x` is ∂coord1/∂x and so on: the stored Jacobian is the gradient of the
 * grid coordinates.
 */
struct CurvilinearGrid {
    std::vector<double> coord1, coord2;
    double coord1_max = 0.0;
    std::vector<double> x, y;
    std::vector<double> d1x, d1y, d2x, d2y;
    BoundaryCurve inner; ///< coord1 = 0
    BoundaryCurve outer; ///< coord1 = coord1_max
    std::size_t nodes_per_cell = 1; ///< Gauss–Legendre points per cell in each direction

    std::size_t n1() const { return coord1.size(); }
    std::size_t n2() const { return coord2.size(); }
    std::size_t size() const { return n1() * n2(); }
    std::size_t cells1() const { return n1() / nodes_per_cell; }
    std::size_t cells2() const { return n2() / nodes_per_cell; }
    std::size_t index(std::size_t i, std::size_t j) const { return i * n2() + j; }

    Point point(std::size_t k) const { return {x[k], y[k]}; }
    Jacobian2 gradients(std::size_t k) const { return {d1x[k], d1y[k], d2x[k], d2y[k]}; }

    void resize_nodes()
    {
        const std::size_t n = size();
        for (auto* v : {&x, &y, &d1x, &d1y, &d2x, &d2y})
            v->assign(n, 0.0);
    }
};

} // namespace gridforge
