#include "circal/geom.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace circal {

void RigidTransform::reorthonormalize() {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    rotation = r;
}

std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
    Vec3 n = normal.normalized();
    Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 b1 = n.cross(seed).normalized();
    Vec3 b2 = n.cross(b1);
    return {b1, b2};
}

Pixel project(const Vec3& pc, const Intrinsics& k) {
    if (pc.z() <= 0.0) throw BehindCamera();
    return {k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy};
}

Pixel project(const Vec3& point, const RigidTransform& pose, const Intrinsics& k) {
    return project(pose.apply(point), k);
}

Vec3 backproject_ray(const Pixel& px, const Intrinsics& k) {
    Vec3 dir((px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy, 1.0);
    return dir.normalized();
}

double rotation_error(const Eigen::Matrix3d& r_est, const Eigen::Matrix3d& r_gt) {
    Eigen::Matrix3d rel = r_gt.transpose() * r_est;
    // Quaternion route is well conditioned near both 0 and pi.
    Eigen::Quaterniond q(rel);
    double s = Vec3(q.x(), q.y(), q.z()).norm();
    double c = std::abs(q.w());
    return 2.0 * std::atan2(s, c);
}

double translation_error(const Vec3& t_est, const Vec3& t_gt) {
    return (t_est - t_gt).norm();
}

} // namespace circal
