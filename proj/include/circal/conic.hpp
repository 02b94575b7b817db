#pragma once

#include <span>
#include <utility>

#include "circal/geom.hpp"

namespace circal {

/// Homogeneous conic: points satisfy p^T Q p = 0 with p = (u, v, 1).
/// Normalized so |Q|_F = 1 and interior points evaluate negative.
struct Conic {
    Eigen::Matrix3d q = Eigen::Matrix3d::Identity();

    double evaluate(const Pixel& p) const {
        const Eigen::Vector3d h(p.x(), p.y(), 1.0);
        return h.dot(q * h);
    }

    /// Rescale to |Q|_F = 1 with interior negative. Throws NotAnEllipse if the
    /// matrix does not describe a real ellipse.
    void normalize();
};

struct EllipseParams {
    Pixel center = Pixel::Zero();
    double semi_major = 1.0; // A >= B > 0
    double semi_minor = 1.0;
    double theta = 0.0; // major-axis orientation, [0, pi)
};

/// Algebraic least-squares conic through >= 5 points (unconstrained, SVD of
/// the normalized design matrix). Non-ellipse solutions are rejected.
Conic fit_conic(std::span<const Pixel> points);

EllipseParams conic_to_params(const Conic& c);
Conic params_to_conic(const EllipseParams& p);

/// Intersections of the line through `through` at angle gamma with the conic,
/// ordered so the first point lies in the -direction, the second in the
/// +direction. `through` must be strictly interior.
std::pair<Pixel, Pixel> line_conic_intersect(const Conic& c, const Pixel& through, double gamma);

/// Mean of the integer pixels strictly inside the ellipse.
Pixel center_of_mass(const Conic& c);

} // namespace circal
