#include "circal/conic.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace circal {

namespace {

/// Center of the conic (pole of the line at infinity). Throws for parabolas.
Pixel conic_center(const Eigen::Matrix3d& q) {
    const Eigen::Matrix2d a = q.topLeftCorner<2, 2>();
    const double det = a.determinant();
    if (std::abs(det) < 1e-300) throw NotAnEllipse("degenerate quadratic part");
    return a.inverse() * (-q.topRightCorner<2, 1>());
}

} // namespace

void Conic::normalize() {
    q = 0.5 * (q + q.transpose().eval());
    const Eigen::Matrix2d a = q.topLeftCorner<2, 2>();
    if (a.determinant() <= 0.0) throw NotAnEllipse("quadratic part is not definite");
    const Pixel cen = conic_center(q);
    const Eigen::Vector3d h(cen.x(), cen.y(), 1.0);
    const double center_value = h.dot(q * h);
    // Real ellipse: the value at the center has the opposite sign of the
    // (definite) quadratic part.
    if (center_value * a(0, 0) >= 0.0) throw NotAnEllipse("imaginary or degenerate ellipse");
    q /= q.norm();
    if (evaluate(cen) > 0.0) q = -q;
}

Conic fit_conic(std::span<const Pixel> points) {
    const int n = static_cast<int>(points.size());
    if (n < 5) throw InsufficientPoints("conic fit needs at least 5 points");

    // Isotropic normalization for conditioning.
    Pixel mean = Pixel::Zero();
    for (const Pixel& p : points) mean += p;
    mean /= n;
    double scale = 0.0;
    for (const Pixel& p : points) scale += (p - mean).norm();
    scale = scale > 0.0 ? std::sqrt(2.0) * n / scale : 1.0;

    Eigen::MatrixXd design(n, 6);
    for (int i = 0; i < n; ++i) {
        const double x = scale * (points[i].x() - mean.x());
        const double y = scale * (points[i].y() - mean.y());
        design.row(i) << x * x, x * y, y * y, x, y, 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);

    Eigen::Matrix3d qn;
    qn << v(0), v(1) / 2, v(3) / 2, //
        v(1) / 2, v(2), v(4) / 2,   //
        v(3) / 2, v(4) / 2, v(5);

    Eigen::Matrix3d t;
    t << scale, 0, -scale * mean.x(), //
        0, scale, -scale * mean.y(),  //
        0, 0, 1;

    Conic out;
    out.q = t.transpose() * qn * t;
    out.normalize();
    return out;
}

EllipseParams conic_to_params(const Conic& c) {
    const Pixel cen = conic_center(c.q);
    const Eigen::Vector3d h(cen.x(), cen.y(), 1.0);
    const double k = h.dot(c.q * h);
    if (k >= 0.0) throw NotAnEllipse("no real interior");
    const Eigen::Matrix2d a = c.q.topLeftCorner<2, 2>() / (-k);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(a);
    const double l0 = eig.eigenvalues()(0); // ascending: l0 -> semi-major
    const double l1 = eig.eigenvalues()(1);
    if (l0 <= 0.0) throw NotAnEllipse("non-positive axis eigenvalue");

    EllipseParams out;
    out.center = cen;
    out.semi_major = 1.0 / std::sqrt(l0);
    out.semi_minor = 1.0 / std::sqrt(l1);
    const Eigen::Vector2d axis = eig.eigenvectors().col(0);
    double theta = std::atan2(axis.y(), axis.x());
    if (theta < 0.0) theta += M_PI;
    if (theta >= M_PI) theta -= M_PI;
    out.theta = theta;
    return out;
}

Conic params_to_conic(const EllipseParams& p) {
    Eigen::Matrix2d rot;
    rot << std::cos(p.theta), -std::sin(p.theta), std::sin(p.theta), std::cos(p.theta);
    const Eigen::Matrix2d a =
        rot * Eigen::Vector2d(1.0 / (p.semi_major * p.semi_major), 1.0 / (p.semi_minor * p.semi_minor)).asDiagonal() *
        rot.transpose();

    Conic out;
    out.q.topLeftCorner<2, 2>() = a;
    out.q.topRightCorner<2, 1>() = -a * p.center;
    out.q.bottomLeftCorner<1, 2>() = (-a * p.center).transpose();
    out.q(2, 2) = p.center.dot(a * p.center) - 1.0;
    out.normalize();
    return out;
}

std::pair<Pixel, Pixel> line_conic_intersect(const Conic& c, const Pixel& through, double gamma) {
    if (c.evaluate(through) >= 0.0) throw NoTwoIntersections();
    const Eigen::Vector3d d(std::cos(gamma), std::sin(gamma), 0.0);
    const Eigen::Vector3d h(through.x(), through.y(), 1.0);
    const double qa = d.dot(c.q * d);
    const double qb = 2.0 * d.dot(c.q * h);
    const double qc = h.dot(c.q * h);
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0.0 || qa <= 0.0) throw NoTwoIntersections();
    const double sq = std::sqrt(disc);
    // qa > 0 and qc < 0, so the roots straddle zero.
    const double t1 = (-qb - sq) / (2.0 * qa);
    const double t2 = (-qb + sq) / (2.0 * qa);
    const Pixel dir(d.x(), d.y());
    return {through + t1 * dir, through + t2 * dir};
}

Pixel center_of_mass(const Conic& c) {
    const EllipseParams p = conic_to_params(c);
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double ex = std::sqrt(p.semi_major * p.semi_major * ct * ct + p.semi_minor * p.semi_minor * st * st);
    const double ey = std::sqrt(p.semi_major * p.semi_major * st * st + p.semi_minor * p.semi_minor * ct * ct);

    const long u0 = static_cast<long>(std::ceil(p.center.x() - ex));
    const long u1 = static_cast<long>(std::floor(p.center.x() + ex));
    const long v0 = static_cast<long>(std::ceil(p.center.y() - ey));
    const long v1 = static_cast<long>(std::floor(p.center.y() + ey));

    double su = 0.0, sv = 0.0;
    long count = 0;
    for (long v = v0; v <= v1; ++v)
        for (long u = u0; u <= u1; ++u)
            if (c.evaluate(Pixel(double(u), double(v))) < 0.0) {
                su += double(u);
                sv += double(v);
                ++count;
            }
    if (count == 0) throw EmptyInterior();
    return {su / count, sv / count};
}

} // namespace circal
