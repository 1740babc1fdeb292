#pragma once

// 2x2 curvilinear algebra: Jacobians, volume forms, metrics and the
// push-forward of contravariant tensors. All tensors are stored
// contravariant; covariant forms are derived on demand.

#include <cmath>
#include <sstream>

#include "gridforge/error.hpp"

namespace gridforge {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Components of a 1-form on (d coord1, d coord2).
struct Covector {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Components of a tangent vector on (∂ coord1, ∂ coord2).
struct Tangent {
    double c1 = 0.0;
    double c2 = 0.0;
};

/**
 * 2x2 Jacobian matrix.
 *
 * Convention: rows are the differentiated coordinates, columns the
 * coordinates differentiated against. A matrix holding the gradients of
 * the new coordinates (ζ_x ζ_y / η_x η_y) is a "new-from-old" Jacobian;
 * its inverse holds x_ζ x_η / y_ζ y_η.
 */
struct Jacobian2 {
    double a11 = 1.0, a12 = 0.0;
    double a21 = 0.0, a22 = 1.0;

    double det() const { return a11 * a22 - a12 * a21; }

    friend Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r)
    {
        return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
                l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
    }
};

/// Symmetric 2x2 tensor (contravariant components).
struct SymTensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
    bool positive_definite() const { return xx > 0.0 && yy > 0.0 && det() > 0.0; }

    static SymTensor2 identity(double s = 1.0) { return {s, 0.0, s}; }
};

/// Inverse metric g^{ij} of a coordinate system plus its volume element.
struct Metric2 {
    double g11 = 1.0; ///< g^{11}
    double g12 = 0.0; ///< g^{12}
    double g22 = 1.0; ///< g^{22}
    double sqrt_g = 1.0;
};

namespace detail {
inline void check_nonsingular(double det, double length_scale, const char* where)
{
    const double threshold = 1e-14 * length_scale * length_scale;
    if (!(std::abs(det) > threshold) || !std::isfinite(det)) {
        std::ostringstream os;
        os << where << ": singular Jacobian (det=" << det << ", threshold=" << threshold << ")";
        numerical_failure("singular_jacobian", os.str());
    }
}
} // namespace detail

/// Cofactor inverse. `length_scale` sets the singularity threshold 1e-14·scale².
inline Jacobian2 invert_jacobian(const Jacobian2& j, double length_scale = 1.0)
{
    const double d = j.det();
    detail::check_nonsingular(d, length_scale, "invert_jacobian");
    return {j.a22 / d, -j.a12 / d, -j.a21 / d, j.a11 / d};
}

/// Signed determinant of an old-from-new Jacobian (x_ζ y_η - y_ζ x_η), i.e. √g.
/// Passing the new-from-old matrix yields 1/√g.
inline double volume_element(const Jacobian2& j, double length_scale = 1.0)
{
    const double d = j.det();
    detail::check_nonsingular(d, length_scale, "volume_element");
    return d;
}

/// √g of new coordinates from their gradients: (ζ_x η_y - ζ_y η_x)^{-1}.
inline double sqrt_g_from_gradients(const Jacobian2& grads, double length_scale = 1.0)
{
    return 1.0 / volume_element(grads, length_scale);
}

inline Metric2 inverse_metric_from_gradients(double zx, double zy, double ex, double ey)
{
    Metric2 m;
    m.g11 = zx * zx + zy * zy;
    m.g12 = zx * ex + zy * ey;
    m.g22 = ex * ex + ey * ey;
    const double det = m.g11 * m.g22 - m.g12 * m.g12;
    if (!(det > 0.0) || !std::isfinite(det))
        detail::numerical_failure("degenerate_metric", "inverse_metric_from_gradients: degenerate metric");
    m.sqrt_g = 1.0 / std::sqrt(det);
    return m;
}

/// Contravariant push-forward χ' = J χ Jᵀ with J the new-from-old Jacobian.
inline SymTensor2 push_tensor(const SymTensor2& chi, const Jacobian2& j, double length_scale = 1.0)
{
    detail::check_nonsingular(j.det(), length_scale, "push_tensor");
    SymTensor2 out;
    out.xx = j.a11 * j.a11 * chi.xx + 2.0 * j.a11 * j.a12 * chi.xy + j.a12 * j.a12 * chi.yy;
    out.xy = j.a11 * j.a21 * chi.xx + (j.a11 * j.a22 + j.a21 * j.a12) * chi.xy + j.a12 * j.a22 * chi.yy;
    out.yy = j.a21 * j.a21 * chi.xx + 2.0 * j.a21 * j.a22 * chi.xy + j.a22 * j.a22 * chi.yy;
    return out;
}

/// Chain rule u_x = u_ζ ζ_x + u_η η_x, u_y = u_ζ ζ_y + u_η η_y.
/// `grads` is the new-from-old Jacobian of the intermediate coordinates.
inline Covector compose_oneforms(const Covector& du, const Jacobian2& grads)
{
    return {du.c1 * grads.a11 + du.c2 * grads.a21, du.c1 * grads.a12 + du.c2 * grads.a22};
}

/// Components of a tangent vector in the old basis: v_old = J_old_from_new · v.
inline Tangent push_vector(const Tangent& v, const Jacobian2& old_from_new)
{
    return {old_from_new.a11 * v.c1 + old_from_new.a12 * v.c2,
            old_from_new.a21 * v.c1 + old_from_new.a22 * v.c2};
}

/// Pairing ⟨ω, v⟩.
inline double pair(const Covector& w, const Tangent& v) { return w.c1 * v.c1 + w.c2 * v.c2; }

} // namespace gridforge
