#include "circal/cga.hpp"
#include <Eigen/SVD>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace circal {

namespace {

Eigen::Matrix<double, 5, 5> conformal_metric() {
    Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
    m.topLeftCorner<3, 3>().setIdentity();
    m(3, 4) = -1.0;
    m(4, 3) = -1.0;
    return m;
}

} // namespace

ConformalPoint embed(const Vec3& p) {
    ConformalPoint out;
    out.e = p;
    out.n0 = 1.0;
    out.ninf = 0.5 * p.squaredNorm();
    return out;
}

double inner_product(const Entity5& a, const Entity5& b) {
    return a.head<3>().dot(b.head<3>()) - a(3) * b(4) - a(4) * b(3);
}

SphereEntity sphere_entity(const Vec3& center, double radius) {
    SphereEntity sp;
    sp.v = embed(center).coords();
    sp.v(4) -= 0.5 * radius * radius;
    return sp;
}

PlaneEntity plane_entity(const Vec3& normal, double offset) {
    PlaneEntity pl;
    pl.v.head<3>() = normal;
    pl.v(3) = 0.0;
    pl.v(4) = offset;
    return pl;
}

double point_circle_distance2(const ConformalPoint& p, const SphereEntity& sp, const PlaneEntity& pl) {
    const Entity5 pc = p.coords();
    const double sp2 = inner_product(sp.v, sp.v);
    const double pl2 = inner_product(pl.v, pl.v);
    if (std::abs(sp2) < 1e-300 || std::abs(pl2) < 1e-300) throw DegenerateEntity();
    const double ds = inner_product(pc, sp.v);
    const double dp = inner_product(pc, pl.v);
    return ds * ds / sp2 + dp * dp / pl2;
}

double point_circle_distance2(const Vec3& p, const Circle3D& circle) {
    return point_circle_distance2(embed(p), sphere_entity(circle.center, circle.radius),
                                  plane_entity(circle.normal, circle.normal.dot(circle.center)));
}

CircleBivector CircleBivector::wedge(const Entity5& v, const Entity5& u) {
    CircleBivector e;
    auto w = [&](int i, int j) { return v(i) * u(j) - v(j) * u(i); };
    e.b << w(0, 1), w(0, 2), w(1, 2), // e^e block
        w(0, 3), w(1, 3), w(2, 3),    // e^n0 block
        w(0, 4), w(1, 4), w(2, 4),    // e^ninf block
        w(3, 4);                      // n0^ninf
    return e;
}

Circle3D CircleBivector::extract() const {
    // E = s * (SP ^ PL) for the minimal sphere SP centered on the circle and
    // the unit-normal carrier plane PL, with s an arbitrary nonzero scale.
    // Blocks read off against that decomposition:
    //   cross = s (c x n), B0 = -s n, Binf = s (delta c - sigma n), q = s delta
    // with sigma = 0.5(|c|^2 - r^2) and delta = c.n.
    const Vec3 cross(b(2), -b(1), b(0));
    const Vec3 n_raw(-b(3), -b(4), -b(5));
    const Vec3 binf(b(6), b(7), b(8));
    const double q = b(9);

    const double s2 = n_raw.squaredNorm();
    const double scale = b.cwiseAbs().maxCoeff();
    if (s2 <= 1e-24 * scale * scale) throw DegenerateConfiguration("bivector has no plane direction");

    Circle3D out;
    out.center = (q * n_raw + n_raw.cross(cross)) / s2;
    const double sigma = (q * q - n_raw.dot(binf)) / s2;
    const double r2 = out.center.squaredNorm() - 2.0 * sigma;
    if (!(r2 > 0.0)) throw NonCircleSolution();
    out.radius = std::sqrt(r2);
    out.normal = canonical_normal(n_raw / std::sqrt(s2));
    return out;
}

Vec3 canonical_normal(const Vec3& n) {
    constexpr double tol = 1e-12;
    double key = n.z();
    if (std::abs(key) <= tol) key = n.y();
    if (std::abs(key) <= tol) key = n.x();
    return key < 0.0 ? Vec3(-n) : n;
}

CgaFitResult fit_circle_cga(std::span<const Vec3> points) {
    const int n = static_cast<int>(points.size());
    if (n < 5) throw InsufficientPoints("circle fit needs at least 5 points");

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= n;

    // Data matrix columns are the conformal embeddings of the centered points.
    Eigen::Matrix<double, 5, 5> a = Eigen::Matrix<double, 5, 5>::Zero();
    for (const Vec3& p : points) {
        const Vec3 q = p - centroid;
        Entity5 d;
        d << q.x(), q.y(), q.z(), 1.0, 0.5 * q.squaredNorm();
        a += d * d.transpose();
    }
    a /= n;

    static const Eigen::Matrix<double, 5, 5> metric = conformal_metric();
    const Eigen::Matrix<double, 5, 5> pm = a * metric;

    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> solver(pm);
    if (solver.info() != Eigen::Success) throw DegenerateConfiguration("eigen decomposition failed");

    const double eps = 1e-9 * pm.norm();
    struct Candidate {
        double value;
        int index;
    };
    std::vector<Candidate> admissible;
    for (int i = 0; i < 5; ++i) {
        const auto ev = solver.eigenvalues()(i);
        if (std::abs(ev.imag()) > eps) continue; // genuine complex pair: degenerate direction
        if (ev.real() < -eps) continue;          // negative square-norm entity
        admissible.push_back({ev.real(), i});
    }
    if (admissible.size() < 2) throw DegenerateConfiguration("fewer than two admissible eigenvalues");
    std::sort(admissible.begin(), admissible.end(),
              [](const Candidate& x, const Candidate& y) { return x.value < y.value; });

    auto real_eigenvector = [&](int col) {
        Eigen::Matrix<std::complex<double>, 5, 1> vc = solver.eigenvectors().col(col);
        // Rotate the complex phase so the dominant component is real.
        int imax = 0;
        vc.cwiseAbs().maxCoeff(&imax);
        const std::complex<double> phase = vc(imax) / std::abs(vc(imax));
        Entity5 vr = (vc / phase).real();
        return vr;
    };

    Entity5 v = real_eigenvector(admissible[0].index);
    Entity5 u = real_eigenvector(admissible[1].index);

    // Near-double eigenvalues (exact data has both at zero) make the
    // individual eigenvectors ill-conditioned even though their span is not;
    // recover the two-dimensional invariant subspace from a shifted SVD.
    const double cos_vu = std::abs(v.dot(u)) / (v.norm() * u.norm());
    const bool clustered = admissible[1].value - admissible[0].value <= 1e-9 * pm.norm();
    if (clustered || cos_vu > 0.999) {
        const double shift = 0.5 * (admissible[0].value + admissible[1].value);
        Eigen::Matrix<double, 5, 5> shifted = pm;
        shifted.diagonal().array() -= shift;
        Eigen::JacobiSVD<Eigen::Matrix<double, 5, 5>> svd(shifted, Eigen::ComputeFullV);
        v = svd.matrixV().col(4);
        u = svd.matrixV().col(3);
    }

    Circle3D circle = CircleBivector::wedge(v, u).extract();
    circle.center += centroid;

    CgaFitResult result;
    result.circle = circle;
    result.eigenvalues_used = {admissible[0].value, admissible[1].value};

    const SphereEntity sp = sphere_entity(circle.center, circle.radius);
    const PlaneEntity pl = plane_entity(circle.normal, circle.normal.dot(circle.center));
    double sum = 0.0;
    for (const Vec3& p : points) sum += point_circle_distance2(embed(p), sp, pl);
    result.mean_residual = sum / n;
    return result;
}

} // namespace circal
