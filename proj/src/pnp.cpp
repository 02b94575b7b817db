#include "circal/pnp.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace circal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Pixel> safe_project(const Vec3& p, const RigidTransform& pose, const Intrinsics& k) {
    const Vec3 x = pose.apply(p);
    if (x.z() <= 1e-12) return std::nullopt;
    return Pixel(k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy);
}

double reproj_error_px(const Vec3& p, const Pixel& q, const RigidTransform& pose, const Intrinsics& k) {
    const auto px = safe_project(p, pose, k);
    return px ? (*px - q).norm() : kInf;
}

Eigen::Matrix3d skew(const Vec3& v) {
    Eigen::Matrix3d m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

Eigen::Matrix3d exp_so3(const Vec3& w) {
    const double th = w.norm();
    if (th < 1e-12) return Eigen::Matrix3d::Identity() + skew(w);
    const Vec3 axis = w / th;
    return Eigen::AngleAxisd(th, axis).toRotationMatrix();
}

Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Minimal solver: Grunert's P3P (quartic in the distance ratio) + an extra
// point to pick among the up-to-four solutions.
// ---------------------------------------------------------------------------

std::vector<double> real_quartic_roots(std::array<double, 5> c) {
    // c[0] v^4 + ... + c[4]; trim a vanishing leading coefficient.
    double scale = 0.0;
    for (double x : c) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return {};
    for (double& x : c) x /= scale;
    int lead = 0;
    while (lead < 4 && std::abs(c[lead]) < 1e-14) ++lead;
    const int deg = 4 - lead;
    if (deg < 1) return {};

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) comp(0, i) = -c[lead + 1 + i] / c[lead];
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) {
        const auto r = es.eigenvalues()(i);
        if (std::abs(r.imag()) < 1e-8 * std::max(1.0, std::abs(r.real()))) roots.push_back(r.real());
    }
    return roots;
}

/// Rigid transform aligning world points onto camera points (Kabsch).
RigidTransform absolute_orientation(const std::vector<Vec3>& world, const std::vector<Vec3>& cam) {
    Vec3 mw = Vec3::Zero(), mc = Vec3::Zero();
    const int n = static_cast<int>(world.size());
    for (int i = 0; i < n; ++i) {
        mw += world[i];
        mc += cam[i];
    }
    mw /= n;
    mc /= n;
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (int i = 0; i < n; ++i) h += (cam[i] - mc) * (world[i] - mw).transpose();
    RigidTransform out;
    out.rotation = polar_rotation(h);
    out.translation = mc - out.rotation * mw;
    return out;
}

std::vector<RigidTransform> p3p_grunert(const std::array<Vec3, 3>& pw, const std::array<Vec3, 3>& rays) {
    const double a2 = (pw[1] - pw[2]).squaredNorm();
    const double b2 = (pw[0] - pw[2]).squaredNorm();
    const double c2 = (pw[0] - pw[1]).squaredNorm();
    if (a2 < 1e-16 || b2 < 1e-16 || c2 < 1e-16) return {};
    const double ca = rays[1].dot(rays[2]);
    const double cb = rays[0].dot(rays[2]);
    const double cg = rays[0].dot(rays[1]);

    const double ca2 = ca * ca, cb2 = cb * cb, cg2 = cg * cg;
    std::array<double, 5> q;
    q[0] = a2 * a2 - 2 * a2 * b2 - 2 * a2 * c2 + b2 * b2 - 4 * b2 * c2 * ca2 + 2 * b2 * c2 + c2 * c2;
    q[1] = -4 * (a2 * a2 * cb - a2 * b2 * ca * cg - a2 * b2 * cb - 2 * a2 * c2 * cb + b2 * b2 * ca * cg -
                 2 * b2 * c2 * ca2 * cb - b2 * c2 * ca * cg + b2 * c2 * cb + c2 * c2 * cb);
    q[2] = 2 * (2 * a2 * a2 * cb2 + a2 * a2 - 4 * a2 * b2 * ca * cb * cg - 2 * a2 * b2 * cg2 -
                4 * a2 * c2 * cb2 - 2 * a2 * c2 + 2 * b2 * b2 * ca2 + 2 * b2 * b2 * cg2 - b2 * b2 -
                2 * b2 * c2 * ca2 - 4 * b2 * c2 * ca * cb * cg + 2 * c2 * c2 * cb2 + c2 * c2);
    q[3] = -4 * (a2 * a2 * cb - a2 * b2 * ca * cg - 2 * a2 * b2 * cb * cg2 + a2 * b2 * cb -
                 2 * a2 * c2 * cb + b2 * b2 * ca * cg - b2 * c2 * ca * cg - b2 * c2 * cb + c2 * c2 * cb);
    q[4] = a2 * a2 - 4 * a2 * b2 * cg2 + 2 * a2 * b2 - 2 * a2 * c2 + b2 * b2 - 2 * b2 * c2 + c2 * c2;

    std::vector<RigidTransform> poses;
    for (double v : real_quartic_roots(q)) {
        if (v <= 0.0) continue;
        const double denom_u = 2.0 * (cg - v * ca);
        if (std::abs(denom_u) < 1e-14) continue;
        const double u = ((a2 - c2) / b2 * (1 + v * v - 2 * v * cb) + 1 - v * v) / denom_u;
        if (u <= 0.0) continue;
        const double s1sq = b2 / (1 + v * v - 2 * v * cb);
        if (!(s1sq > 0.0)) continue;
        const double s1 = std::sqrt(s1sq);
        const std::vector<Vec3> cam{s1 * rays[0], u * s1 * rays[1], v * s1 * rays[2]};
        poses.push_back(absolute_orientation({pw[0], pw[1], pw[2]}, cam));
    }
    return poses;
}

/// Pose from a minimal sample: P3P on the first three, remaining points vote.
std::optional<RigidTransform> minimal_pose(std::span<const Correspondence> sample, const Intrinsics& k) {
    if (sample.size() < 4) return std::nullopt;
    const std::array<Vec3, 3> pw{sample[0].p3d, sample[1].p3d, sample[2].p3d};
    const std::array<Vec3, 3> rays{backproject_ray(sample[0].q2d, k), backproject_ray(sample[1].q2d, k),
                                   backproject_ray(sample[2].q2d, k)};
    double best_err = kInf;
    std::optional<RigidTransform> best;
    for (const RigidTransform& pose : p3p_grunert(pw, rays)) {
        bool front = true;
        for (int i = 0; i < 3 && front; ++i) front = pose.apply(sample[i].p3d).z() > 0.0;
        if (!front) continue;
        double err = 0.0;
        for (std::size_t i = 3; i < sample.size(); ++i)
            err += reproj_error_px(sample[i].p3d, sample[i].q2d, pose, k);
        if (err < best_err) {
            best_err = err;
            best = pose;
        }
    }
    if (best_err == kInf) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------------------
// Linear initializations
// ---------------------------------------------------------------------------

/// DLT for >= 6 points in general position, in normalized camera coordinates.
std::optional<RigidTransform> init_dlt(std::span<const Correspondence> corrs, const Intrinsics& k) {
    const int n = static_cast<int>(corrs.size());
    Vec3 centroid = Vec3::Zero();
    for (const auto& c : corrs) centroid += c.p3d;
    centroid /= n;
    double scale = 0.0;
    for (const auto& c : corrs) scale += (c.p3d - centroid).norm();
    scale = scale > 0 ? std::sqrt(3.0) * n / scale : 1.0;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 12);
    for (int i = 0; i < n; ++i) {
        const Vec3 x = scale * (corrs[i].p3d - centroid);
        const double mx = (corrs[i].q2d.x() - k.cx) / k.fx;
        const double my = (corrs[i].q2d.y() - k.cy) / k.fy;
        const Eigen::RowVector4d xh(x.x(), x.y(), x.z(), 1.0);
        a.block<1, 4>(2 * i, 0) = xh;
        a.block<1, 4>(2 * i, 8) = -mx * xh;
        a.block<1, 4>(2 * i + 1, 4) = xh;
        a.block<1, 4>(2 * i + 1, 8) = -my * xh;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(10) < 1e-12 * sv(0)) return std::nullopt; // rank-deficient configuration
    Eigen::Matrix<double, 12, 1> p = svd.matrixV().col(11);

    Eigen::Matrix<double, 3, 4> pm;
    pm.row(0) = p.segment<4>(0).transpose();
    pm.row(1) = p.segment<4>(4).transpose();
    pm.row(2) = p.segment<4>(8).transpose();

    // Undo the 3D normalization: X_norm = scale * (X - centroid).
    Eigen::Matrix4d t3 = Eigen::Matrix4d::Identity();
    t3.topLeftCorner<3, 3>() *= scale;
    t3.topRightCorner<3, 1>() = -scale * centroid;
    pm = pm * t3;

    // Fix the projective sign using cheirality of the first point.
    const Eigen::Vector4d x0(corrs[0].p3d.x(), corrs[0].p3d.y(), corrs[0].p3d.z(), 1.0);
    if ((pm.row(2) * x0)(0) < 0) pm = -pm;

    const Eigen::Matrix3d m = pm.topLeftCorner<3, 3>();
    const double det = m.determinant();
    if (!(det > 0.0)) return std::nullopt;
    const double lambda = std::cbrt(det);
    RigidTransform pose;
    pose.rotation = polar_rotation(m / lambda);
    pose.translation = pm.topRightCorner<3, 1>() / lambda;
    return pose;
}

/// Homography decomposition for coplanar targets.
std::optional<RigidTransform> init_planar(std::span<const Correspondence> corrs, const Intrinsics& k,
                                          const Vec3& centroid, const Eigen::Matrix3d& plane_axes) {
    const int n = static_cast<int>(corrs.size());
    const Vec3 b1 = plane_axes.col(0), b2 = plane_axes.col(1);

    // Normalize both sides for the homography DLT.
    Eigen::MatrixXd w(n, 2), m(n, 2);
    for (int i = 0; i < n; ++i) {
        const Vec3 d = corrs[i].p3d - centroid;
        w.row(i) << d.dot(b1), d.dot(b2);
        m.row(i) << (corrs[i].q2d.x() - k.cx) / k.fx, (corrs[i].q2d.y() - k.cy) / k.fy;
    }
    auto normalizer = [](const Eigen::MatrixXd& pts) {
        const Eigen::RowVector2d mean = pts.colwise().mean();
        double s = 0.0;
        for (int i = 0; i < pts.rows(); ++i) s += (pts.row(i) - mean).norm();
        s = s > 0 ? std::sqrt(2.0) * pts.rows() / s : 1.0;
        Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
        t(0, 0) = t(1, 1) = s;
        t(0, 2) = -s * mean.x();
        t(1, 2) = -s * mean.y();
        return t;
    };
    const Eigen::Matrix3d tw = normalizer(w), tm = normalizer(m);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d wh = tw * Eigen::Vector3d(w(i, 0), w(i, 1), 1.0);
        const Eigen::Vector3d mh = tm * Eigen::Vector3d(m(i, 0), m(i, 1), 1.0);
        a.block<1, 3>(2 * i, 0) = wh.transpose();
        a.block<1, 3>(2 * i, 6) = -mh.x() * wh.transpose();
        a.block<1, 3>(2 * i + 1, 3) = wh.transpose();
        a.block<1, 3>(2 * i + 1, 6) = -mh.y() * wh.transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(7) < 1e-12 * sv(0)) return std::nullopt;
    const Eigen::Matrix<double, 9, 1> hv = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
    Eigen::Matrix3d h = tm.inverse() * hn * tw;

    const double lambda = 2.0 / (h.col(0).norm() + h.col(1).norm());
    std::optional<RigidTransform> best;
    double best_err = kInf;
    for (double sign : {1.0, -1.0}) {
        const Eigen::Matrix3d hs = sign * lambda * h;
        Eigen::Matrix3d r0;
        r0.col(0) = hs.col(0);
        r0.col(1) = hs.col(1);
        r0.col(2) = hs.col(0).cross(hs.col(1));
        RigidTransform plane_pose;
        plane_pose.rotation = polar_rotation(r0);
        plane_pose.translation = hs.col(2);

        // Compose with the world-plane frame: X_cam = R0 * B^T (p - centroid) + t.
        RigidTransform pose;
        pose.rotation = plane_pose.rotation * plane_axes.transpose();
        pose.translation = plane_pose.translation - pose.rotation * centroid;

        bool front = true;
        double err = 0.0;
        for (const auto& c : corrs) {
            const double e = reproj_error_px(c.p3d, c.q2d, pose, k);
            if (e == kInf) {
                front = false;
                break;
            }
            err += e;
        }
        if (front && err < best_err) {
            best_err = err;
            best = pose;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Damped least-squares refinement of the reprojection objective
// ---------------------------------------------------------------------------

RigidTransform refine_pose(std::span<const Correspondence> corrs, const Intrinsics& k,
                           RigidTransform pose, const RefineOptions& opts) {
    const int n = static_cast<int>(corrs.size());
    auto objective = [&](const RigidTransform& t) {
        double f = 0.0;
        for (const auto& c : corrs) {
            const auto px = safe_project(c.p3d, t, k);
            if (!px) return kInf;
            f += (*px - c.q2d).squaredNorm();
        }
        return f;
    };

    double f = objective(pose);
    if (opts.objective_trace) opts.objective_trace->push_back(f);
    if (f == kInf) return pose;

    double mu = -1.0;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
        for (int i = 0; i < n; ++i) {
            Eigen::Vector2d r;
            Eigen::Matrix<double, 2, 6> j;
            reprojection_residual(corrs[i], k, pose, &r, &j);
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        const Eigen::Matrix<double, 6, 1> grad = 2.0 * jtr;
        if (grad.norm() < opts.gradient_tol) break;
        if (mu < 0.0) mu = 1e-3 * jtj.diagonal().maxCoeff();

        bool stepped = false;
        for (int tries = 0; tries < 25; ++tries) {
            Eigen::Matrix<double, 6, 6> lhs = jtj;
            lhs.diagonal().array() += mu;
            const Eigen::Matrix<double, 6, 1> delta = lhs.ldlt().solve(-jtr);
            RigidTransform trial;
            trial.rotation = exp_so3(delta.head<3>()) * pose.rotation;
            trial.translation = pose.translation + delta.tail<3>();
            const double ft = objective(trial);
            if (ft < f) {
                pose = trial;
                pose.reorthonormalize();
                f = ft;
                mu = std::max(mu / 3.0, 1e-15);
                stepped = true;
                if (opts.objective_trace) opts.objective_trace->push_back(f);
                break;
            }
            mu *= 4.0;
        }
        if (!stepped) break;
    }
    return pose;
}

bool detect_planar(std::span<const Correspondence> corrs, Vec3* centroid, Eigen::Matrix3d* axes) {
    const int n = static_cast<int>(corrs.size());
    Vec3 c = Vec3::Zero();
    for (const auto& x : corrs) c += x.p3d;
    c /= n;
    Eigen::MatrixXd q(n, 3);
    for (int i = 0; i < n; ++i) q.row(i) = (corrs[i].p3d - c).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(1) <= 1e-9 * std::max(sv(0), 1e-300))
        throw DegenerateConfiguration("3D points are collinear");
    *centroid = c;
    Eigen::Matrix3d v = svd.matrixV();
    if (v.determinant() < 0) v.col(2) = -v.col(2);
    *axes = v;
    return sv(2) <= 1e-6 * sv(0);
}

} // namespace

double reprojection_objective(std::span<const Correspondence> corrs, const Intrinsics& k,
                              const RigidTransform& pose) {
    double f = 0.0;
    for (const auto& c : corrs) {
        const auto px = safe_project(c.p3d, pose, k);
        if (!px) return kInf;
        f += (*px - c.q2d).squaredNorm();
    }
    return f;
}

void reprojection_residual(const Correspondence& corr, const Intrinsics& k, const RigidTransform& pose,
                           Eigen::Vector2d* residual, Eigen::Matrix<double, 2, 6>* jacobian) {
    const Vec3 xr = pose.rotation * corr.p3d;
    const Vec3 x = xr + pose.translation;
    const double z = x.z();
    const double iz = 1.0 / z;
    if (residual) {
        (*residual) = corr.q2d - Pixel(k.fx * x.x() * iz + k.cx, k.fy * x.y() * iz + k.cy);
    }
    if (jacobian) {
        Eigen::Matrix<double, 2, 3> dpi;
        dpi << k.fx * iz, 0, -k.fx * x.x() * iz * iz, 0, k.fy * iz, -k.fy * x.y() * iz * iz;
        // x(delta) = exp(w) R p + t + dt  =>  dx/dw = -[R p]x, dx/ddt = I.
        jacobian->leftCols<3>() = dpi * skew(xr);
        jacobian->rightCols<3>() = -dpi;
    }
}

PoseEstimate solve_pnp(std::span<const Correspondence> corrs, const Intrinsics& k,
                       const RefineOptions& opts) {
    const int n = static_cast<int>(corrs.size());
    if (n < 4) throw InsufficientPoints("PnP needs at least 4 correspondences");

    Vec3 centroid;
    Eigen::Matrix3d axes;
    const bool planar = detect_planar(corrs, &centroid, &axes);

    std::optional<RigidTransform> init;
    if (planar) {
        init = init_planar(corrs, k, centroid, axes);
    } else if (n >= 6) {
        init = init_dlt(corrs, k);
    }
    if (!init) {
        // Minimal-subset initialization for small non-planar sets (or as a
        // fallback when the linear system is rank-deficient).
        double best_err = kInf;
        const std::array<std::array<int, 4>, 4> subsets{{{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {0, 1, 3, 2}}};
        for (const auto& s : subsets) {
            if (s[3] >= n || s[0] >= n || s[1] >= n || s[2] >= n) continue;
            std::vector<Correspondence> sample{corrs[s[0]], corrs[s[1]], corrs[s[2]], corrs[s[3]]};
            // Give the vote to all remaining points, not just the 4th.
            for (int i = 0; i < n; ++i)
                if (i != s[0] && i != s[1] && i != s[2] && i != s[3]) sample.push_back(corrs[i]);
            const auto pose = minimal_pose(sample, k);
            if (!pose) continue;
            const double err = reprojection_objective(corrs, k, *pose);
            if (err < best_err) {
                best_err = err;
                init = pose;
            }
        }
    }
    if (!init) throw DegenerateConfiguration("PnP initialization failed");

    PoseEstimate out;
    out.transform = refine_pose(corrs, k, *init, opts);
    out.inlier_mask.assign(n, true);
    double sum = 0.0;
    for (const auto& c : corrs) sum += reproj_error_px(c.p3d, c.q2d, out.transform, k);
    out.mean_reproj_error = sum / n;
    return out;
}

namespace {

struct PairedScore {
    int count = -1;
    double mean_all = kInf; // mean better-hypothesis error over all points
};

PairedScore score_paired(std::span<const AmbiguousCorrespondence> amb, const Intrinsics& k,
                         const RigidTransform& pose, double threshold, std::vector<bool>* mask,
                         std::vector<int>* choice) {
    PairedScore s;
    s.count = 0;
    double sum = 0.0;
    const int n = static_cast<int>(amb.size());
    for (int i = 0; i < n; ++i) {
        const double e0 = reproj_error_px(amb[i].p3d, amb[i].hypotheses[0], pose, k);
        const double e1 = reproj_error_px(amb[i].p3d, amb[i].hypotheses[1], pose, k);
        const int best = e1 < e0 ? 1 : 0;
        const double e = std::min(e0, e1);
        if (choice) (*choice)[i] = best;
        const bool in = e <= threshold;
        if (mask) (*mask)[i] = in;
        if (in) ++s.count;
        sum += e;
    }
    s.mean_all = n > 0 ? sum / n : kInf;
    return s;
}

} // namespace

PoseEstimate solve_pnp_paired(std::span<const AmbiguousCorrespondence> ambiguous, const Intrinsics& k,
                              const RansacConfig& cfg) {
    const int n = static_cast<int>(ambiguous.size());
    constexpr int kSample = 4;
    if (n < kSample) throw InsufficientPoints("paired PnP needs at least 4 correspondences");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<int> indices(n);
    for (int i = 0; i < n; ++i) indices[i] = i;

    RigidTransform best_pose;
    PairedScore best;
    bool have_best = false;

    std::vector<Correspondence> sample(kSample);
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        for (int j = 0; j < kSample; ++j) {
            std::uniform_int_distribution<int> pick(j, n - 1);
            std::swap(indices[j], indices[pick(rng)]);
            const auto& a = ambiguous[indices[j]];
            sample[j] = {a.p3d, a.hypotheses[coin(rng)]};
        }
        const auto pose = minimal_pose(std::span<const Correspondence>(sample), k);
        if (!pose) continue;
        const PairedScore s = score_paired(ambiguous, k, *pose, cfg.inlier_threshold, nullptr, nullptr);
        if (!have_best || s.count > best.count || (s.count == best.count && s.mean_all < best.mean_all)) {
            best = s;
            best_pose = *pose;
            have_best = true;
        }
    }
    if (!have_best || best.count < kSample) throw NoConsensus();

    // Per-point hypothesis selection under the best pose, refit on the inliers.
    std::vector<bool> mask(n, false);
    std::vector<int> choice(n, 0);
    score_paired(ambiguous, k, best_pose, cfg.inlier_threshold, &mask, &choice);

    std::vector<Correspondence> inliers;
    inliers.reserve(n);
    for (int i = 0; i < n; ++i)
        if (mask[i]) inliers.push_back({ambiguous[i].p3d, ambiguous[i].hypotheses[choice[i]]});

    RigidTransform final_pose = best_pose;
    if (static_cast<int>(inliers.size()) >= kSample) {
        const RigidTransform refined = refine_pose(inliers, k, best_pose, RefineOptions{});
        const PairedScore rs = score_paired(ambiguous, k, refined, cfg.inlier_threshold, nullptr, nullptr);
        if (rs.count >= best.count && rs.mean_all <= best.mean_all) final_pose = refined;
    }

    PoseEstimate out;
    out.transform = final_pose;
    out.inlier_mask.assign(n, false);
    score_paired(ambiguous, k, final_pose, cfg.inlier_threshold, &out.inlier_mask, &choice);
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        if (!out.inlier_mask[i]) continue;
        sum += reproj_error_px(ambiguous[i].p3d, ambiguous[i].hypotheses[choice[i]], final_pose, k);
        ++count;
    }
    out.mean_reproj_error = count > 0 ? sum / count : kInf;
    return out;
}

PoseEstimate solve_pnp_ransac(std::span<const Correspondence> corrs, const Intrinsics& k,
                              const RansacConfig& cfg) {
    std::vector<AmbiguousCorrespondence> degenerate(corrs.size());
    for (std::size_t i = 0; i < corrs.size(); ++i)
        degenerate[i] = {corrs[i].p3d, {corrs[i].q2d, corrs[i].q2d}};
    return solve_pnp_paired(degenerate, k, cfg);
}

} // namespace circal
