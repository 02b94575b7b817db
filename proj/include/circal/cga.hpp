#pragma once

#include <array>
#include <span>
#include <vector>

#include "circal/geom.hpp"

namespace circal {

// Conformal model of R^3: vectors live in the null basis {e1, e2, e3, n0, ninf}
// with n0.n0 = ninf.ninf = 0 and n0.ninf = -1. Coordinates are stored in that
// fixed order throughout this module.

using Entity5 = Eigen::Matrix<double, 5, 1>;

/// Conformal embedding of a Euclidean point: P = p + n0 + 0.5|p|^2 ninf.
struct ConformalPoint {
    Vec3 e = Vec3::Zero(); // e1, e2, e3
    double n0 = 1.0;
    double ninf = 0.0;

    Entity5 coords() const {
        Entity5 v;
        v << e.x(), e.y(), e.z(), n0, ninf;
        return v;
    }
};

/// Sphere as a conformal vector: SP = C - 0.5 rho^2 ninf. SP.SP = rho^2.
struct SphereEntity {
    Entity5 v = Entity5::Zero();
};

/// Plane as a conformal vector: PL = n + delta ninf. PL.PL = |n|^2.
struct PlaneEntity {
    Entity5 v = Entity5::Zero();
};

ConformalPoint embed(const Vec3& p);

/// Inner product under the conformal metric (a.b - a0*binf - ainf*b0).
double inner_product(const Entity5& a, const Entity5& b);
inline double inner_product(const ConformalPoint& a, const ConformalPoint& b) {
    return inner_product(a.coords(), b.coords());
}

SphereEntity sphere_entity(const Vec3& center, double radius);
PlaneEntity plane_entity(const Vec3& normal, double offset);

/// Approximate squared distance from a point to the circle SP ^ PL:
/// (P.SP)^2/SP^2 + (P.PL)^2/PL^2. Exactly zero on the circle.
double point_circle_distance2(const ConformalPoint& p, const SphereEntity& sp, const PlaneEntity& pl);

/// Same metric against an explicit circle (builds the minimal sphere and the
/// carrier plane internally).
double point_circle_distance2(const Vec3& p, const Circle3D& circle);

/// Grade-2 element spanned by two conformal vectors. Component order is the
/// fixed basis {e1^e2, e1^e3, e2^e3, e1^n0, e2^n0, e3^n0, e1^ninf, e2^ninf,
/// e3^ninf, n0^ninf}.
struct CircleBivector {
    Eigen::Matrix<double, 10, 1> b = Eigen::Matrix<double, 10, 1>::Zero();

    static CircleBivector wedge(const Entity5& v, const Entity5& u);

    /// Closed-form circle parameters. Throws DegenerateConfiguration when the
    /// plane direction vanishes and NonCircleSolution when r^2 <= 0.
    Circle3D extract() const;
};

struct CgaFitResult {
    Circle3D circle;
    double mean_residual = 0.0; // mean point_circle_distance2 over the inputs
    std::array<double, 2> eigenvalues_used{0.0, 0.0};
};

/// Joint circle fit: eigen-decomposition of P = (1/n) D D^T M, circle from the
/// wedge of the eigenvectors of the two smallest admissible eigenvalues.
/// Points are centered internally and the result de-centered.
CgaFitResult fit_circle_cga(std::span<const Vec3> points);

/// Canonical sign for an unoriented fitted normal: nonnegative z, then y, then x.
Vec3 canonical_normal(const Vec3& n);

} // namespace circal
