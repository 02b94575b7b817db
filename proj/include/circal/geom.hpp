#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "circal/errors.hpp"

namespace circal {

using Vec3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;

/// Pinhole intrinsics (zero distortion).
struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
        k(0, 0) = fx;
        k(1, 1) = fy;
        k(0, 2) = cx;
        k(1, 2) = cy;
        return k;
    }
};

/// Rigid body transform: x_out = rotation * x_in + translation.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        RigidTransform out;
        out.rotation = rotation.transpose();
        out.translation = -(rotation.transpose() * translation);
        return out;
    }

    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
        m.topLeftCorner<3, 3>() = rotation;
        m.topRightCorner<3, 1>() = translation;
        return m;
    }

    static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
        RigidTransform out;
        out.rotation = m.topLeftCorner<3, 3>();
        out.translation = m.topRightCorner<3, 1>();
        return out;
    }

    /// Snap the rotation back onto SO(3) (polar projection via SVD).
    void reorthonormalize();
};

/// this after other: (a * b).apply(x) == a.apply(b.apply(x))
inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

/// A circle in 3D space: unit normal, radius in meters.
struct Circle3D {
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    double radius = 1.0;
};

/// Orthonormal in-plane basis (b1, b2) with b1 x b2 = normal.
std::pair<Vec3, Vec3> plane_basis(const Vec3& normal);

Pixel project(const Vec3& point_camera, const Intrinsics& k);
Pixel project(const Vec3& point, const RigidTransform& pose, const Intrinsics& k);

/// Unit-norm viewing ray in the camera frame for a pixel.
Vec3 backproject_ray(const Pixel& px, const Intrinsics& k);

/// Geodesic angle between two rotations, in [0, pi].
double rotation_error(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt);
double translation_error(const Vec3& t_est, const Vec3& t_gt);

} // namespace circal
