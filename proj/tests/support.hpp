#pragma once

#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "circal/geom.hpp"

namespace circal::testing {

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    while (q.norm() < 1e-9) q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double t_scale = 2.0) {
    std::uniform_real_distribution<double> ut(-t_scale, t_scale);
    RigidTransform t;
    t.rotation = random_rotation(rng);
    t.translation = Vec3(ut(rng), ut(rng), ut(rng));
    return t;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    while (v.norm() < 1e-9) v = Vec3(gauss(rng), gauss(rng), gauss(rng));
    return v.normalized();
}

inline std::vector<Vec3> circle_samples(const Circle3D& c, int n, double arc = 2.0 * M_PI,
                                        double phase = 0.0) {
    const auto [b1, b2] = plane_basis(c.normal);
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double th = phase + arc * i / n;
        pts.push_back(c.center + c.radius * (std::cos(th) * b1 + std::sin(th) * b2));
    }
    return pts;
}

inline double normal_angle(const Vec3& a, const Vec3& b) {
    // sign-insensitive, precise near zero (acos saturates at sqrt(eps))
    const Vec3 an = a.normalized(), bn = b.normalized();
    return std::atan2(an.cross(bn).norm(), std::abs(an.dot(bn)));
}

} // namespace circal::testing
