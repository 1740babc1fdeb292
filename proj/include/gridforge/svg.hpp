#pragma once

// SVG wireframe of a grid: both coordinate-line families (every `stride`-th
// line), plus optional ψ contours drawn by marching squares.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "gridforge/error.hpp"
#include "gridforge/flux.hpp"
#include "gridforge/grid.hpp"

namespace gridforge {

struct SvgOptions {
    std::size_t stride = 1;
    double width = 800.0;            ///< pixels; height follows the aspect ratio
    std::size_t contour_samples = 240; ///< marching-squares cells along the longer side
    double margin = 0.05;            ///< fraction of the extent added around the grid
};

struct Segment {
    Point a, b;
};

/// Marching squares for f = level on a uniform sampling of [lo, hi].
template <FluxFunction F>
std::vector<Segment> contour_segments(const F& field, double level, Point lo, Point hi, std::size_t nx, std::size_t ny)
{
    if (nx < 2 || ny < 2 || !(hi.x > lo.x) || !(hi.y > lo.y))
        detail::config_failure("bad_box", "contour_segments needs a nondegenerate box and >= 2 samples");
    const double hx = (hi.x - lo.x) / static_cast<double>(nx), hy = (hi.y - lo.y) / static_cast<double>(ny);
    std::vector<double> v((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            v[j * (nx + 1) + i] = field.jet({lo.x + i * hx, lo.y + j * hy}).psi - level;
    std::vector<Segment> out;
    auto at = [&](std::size_t i, std::size_t j) { return v[j * (nx + 1) + i]; };
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const Point p[4] = {{lo.x + i * hx, lo.y + j * hy},
                                {lo.x + (i + 1) * hx, lo.y + j * hy},
                                {lo.x + (i + 1) * hx, lo.y + (j + 1) * hy},
                                {lo.x + i * hx, lo.y + (j + 1) * hy}};
            const double f[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            std::vector<Point> cuts;
            for (int e = 0; e < 4; ++e) {
                const double a = f[e], b = f[(e + 1) % 4];
                if ((a < 0.0) != (b < 0.0)) {
                    const double t = a / (a - b);
                    cuts.push_back({p[e].x + t * (p[(e + 1) % 4].x - p[e].x), p[e].y + t * (p[(e + 1) % 4].y - p[e].y)});
                }
            }
            if (cuts.size() == 2) {
                out.push_back({cuts[0], cuts[1]});
            } else if (cuts.size() == 4) {
                // saddle cell: pair by the sign of the centre value
                const double c = 0.25 * (f[0] + f[1] + f[2] + f[3]);
                if ((c < 0.0) == (f[0] < 0.0)) {
                    out.push_back({cuts[0], cuts[3]});
                    out.push_back({cuts[1], cuts[2]});
                } else {
                    out.push_back({cuts[0], cuts[1]});
                    out.push_back({cuts[2], cuts[3]});
                }
            }
        }
    return out;
}

namespace detail {

struct SvgFrame {
    Point lo, hi;
    double scale = 1.0, height = 0.0;

    std::string xy(Point p) const
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p.x - lo.x) * scale, (hi.y - p.y) * scale);
        return buf;
    }
};

inline SvgFrame svg_frame(const CurvilinearGrid& g, const SvgOptions& opt)
{
    Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point hi{-lo.x, -lo.y};
    for (std::size_t k = 0; k < g.size(); ++k) {
        lo = {std::min(lo.x, g.x[k]), std::min(lo.y, g.y[k])};
        hi = {std::max(hi.x, g.x[k]), std::max(hi.y, g.y[k])};
    }
    for (const BoundaryCurve* c : {&g.inner, &g.outer})
        for (std::size_t j = 0; j < c->size(); ++j) {
            lo = {std::min(lo.x, c->x[j]), std::min(lo.y, c->y[j])};
            hi = {std::max(hi.x, c->x[j]), std::max(hi.y, c->y[j])};
        }
    const double ext = std::max(hi.x - lo.x, hi.y - lo.y);
    const double pad = opt.margin * (ext > 0.0 ? ext : 1.0);
    SvgFrame f;
    f.lo = {lo.x - pad, lo.y - pad};
    f.hi = {hi.x + pad, hi.y + pad};
    f.scale = opt.width / (f.hi.x - f.lo.x);
    f.height = (f.hi.y - f.lo.y) * f.scale;
    return f;
}

inline std::string polyline(const SvgFrame& f, const std::vector<Point>& pts, const char* cls)
{
    std::string s = "<polyline class=\"";
    s += cls;
    s += "\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k)
            s += ' ';
        s += f.xy(pts[k]);
    }
    s += "\"/>\n";
    return s;
}

} // namespace detail

struct ContourLevel {
    double level;
    const char* css_class;
};

/**
 * Grid lines as polylines: coord1 = const lines (closed) with class "line1",
 * coord2 = const lines with class "line2". `contours` holds marching-squares
 * segments per level, drawn as one path each.
 */
inline std::string emit_svg(const CurvilinearGrid& g, const SvgOptions& opt,
                            const std::vector<std::pair<ContourLevel, std::vector<Segment>>>& contours = {})
{
    if (g.size() == 0)
        detail::config_failure("empty_grid", "emit_svg: grid has no nodes");
    if (opt.stride < 1 || !(opt.width > 0.0))
        detail::config_failure("bad_svg_options", "emit_svg: stride >= 1 and width > 0 required");
    const detail::SvgFrame f = detail::svg_frame(g, opt);
    char head[256];
    std::snprintf(head, sizeof head,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.3f %.3f\">\n",
                  opt.width, std::ceil(f.height), opt.width, f.height);
    std::string s = head;
    s += "<style>polyline{fill:none;stroke-width:0.6}.line1{stroke:#1f4e9c}.line2{stroke:#b03a2e}"
         "path{fill:none;stroke-width:1.2}.psi0,.psi1{stroke:#000}.separatrix{stroke:#777;stroke-dasharray:4 3}</style>\n";
    const std::size_t n1 = g.n1(), n2 = g.n2();
    std::vector<Point> pts;
    for (std::size_t i = 0; i < n1; i += opt.stride) {
        pts.clear();
        for (std::size_t j = 0; j <= n2; ++j)
            pts.push_back(g.point(g.index(i, j % n2)));
        s += detail::polyline(f, pts, "line1");
    }
    // coord2 lines run on to the boundary curves when those sit at the same coord2 nodes
    const bool ends = g.inner.size() == n2 && g.outer.size() == n2;
    for (std::size_t j = 0; j < n2; j += opt.stride) {
        pts.clear();
        if (ends)
            pts.push_back({g.inner.x[j], g.inner.y[j]});
        for (std::size_t i = 0; i < n1; ++i)
            pts.push_back(g.point(g.index(i, j)));
        if (ends)
            pts.push_back({g.outer.x[j], g.outer.y[j]});
        s += detail::polyline(f, pts, "line2");
    }
    for (const auto& [lvl, segs] : contours) {
        if (segs.empty())
            continue;
        s += "<path class=\"";
        s += lvl.css_class;
        s += "\" d=\"";
        for (const Segment& seg : segs) {
            s += 'M';
            s += f.xy(seg.a);
            s += 'L';
            s += f.xy(seg.b);
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

/// emit_svg with the ψ0, ψ1 and ψ = 0 contours of `field` over the grid's box.
template <FluxFunction F>
std::string emit_svg_with_contours(const CurvilinearGrid& g, const SvgOptions& opt, const F& field, double psi0,
                                   double psi1, bool separatrix = true)
{
    const detail::SvgFrame f = detail::svg_frame(g, opt);
    const double wx = f.hi.x - f.lo.x, wy = f.hi.y - f.lo.y;
    const std::size_t n = std::max<std::size_t>(opt.contour_samples, 2);
    const std::size_t nx = wx >= wy ? n : std::max<std::size_t>(2, static_cast<std::size_t>(n * wx / wy));
    const std::size_t ny = wy >= wx ? n : std::max<std::size_t>(2, static_cast<std::size_t>(n * wy / wx));
    std::vector<std::pair<ContourLevel, std::vector<Segment>>> c;
    c.push_back({{psi0, "psi0"}, contour_segments(field, psi0, f.lo, f.hi, nx, ny)});
    c.push_back({{psi1, "psi1"}, contour_segments(field, psi1, f.lo, f.hi, nx, ny)});
    if (separatrix)
        c.push_back({{0.0, "separatrix"}, contour_segments(field, 0.0, f.lo, f.hi, nx, ny)});
    return emit_svg(g, opt, c);
}

} // namespace gridforge
