#include "circal/robust.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>

namespace circal {

double circle_distance2_euclidean(const Vec3& p, const Circle3D& circle) {
    const Vec3 d = p - circle.center;
    const double h = d.dot(circle.normal);
    const double rho = (d - h * circle.normal).norm();
    const double dr = rho - circle.radius;
    return h * h + dr * dr;
}

Circle3D fit_circle_decoupled(std::span<const Vec3> points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw InsufficientPoints("decoupled circle fit needs at least 3 points");

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : points) centroid += p;
    centroid /= n;

    Eigen::MatrixXd q(n, 3);
    for (int i = 0; i < n; ++i) q.row(i) = (points[i] - centroid).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300)) throw DegeneratePlane();
    const Vec3 normal = svd.matrixV().col(2);
    const Vec3 b1 = svd.matrixV().col(0);
    const Vec3 b2 = svd.matrixV().col(1);

    // Kasa fit in plane coordinates: [2x 2y 1] (a b k)^T = x^2 + y^2.
    Eigen::MatrixXd m(n, 3);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        const double x = q.row(i).dot(b1);
        const double y = q.row(i).dot(b2);
        m(i, 0) = 2.0 * x;
        m(i, 1) = 2.0 * y;
        m(i, 2) = 1.0;
        rhs(i) = x * x + y * y;
    }
    const Eigen::Vector3d sol = m.colPivHouseholderQr().solve(rhs);
    const double r2 = sol(2) + sol(0) * sol(0) + sol(1) * sol(1);
    if (!(r2 > 0.0) || !std::isfinite(r2)) throw NonCircleSolution();

    Circle3D out;
    out.center = centroid + sol(0) * b1 + sol(1) * b2;
    out.normal = canonical_normal(normal);
    out.radius = std::sqrt(r2);
    return out;
}

namespace {

template <typename FitFn, typename Dist2Fn>
RansacReport ransac_circle_engine(std::span<const Vec3> points, const RansacConfig& cfg, FitFn fit,
                                  Dist2Fn dist2) {
    const int n = static_cast<int>(points.size());
    const int k = std::max(cfg.min_sample, 5);
    if (n < k) throw InsufficientPoints("fewer points than the minimal sample size");

    std::mt19937_64 rng(cfg.seed);
    std::vector<int> indices(n);
    for (int i = 0; i < n; ++i) indices[i] = i;

    bool have_best = false;
    Circle3D best_model;
    int best_count = -1;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<Vec3> sample(k);

    auto evaluate = [&](const Circle3D& model, std::vector<bool>* mask, double* mean_residual) {
        int count = 0;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = dist2(points[i], model);
            const bool in = d2 <= cfg.inlier_threshold;
            if (mask) (*mask)[i] = in;
            if (in) {
                ++count;
                sum += d2;
            }
        }
        if (mean_residual) *mean_residual = count > 0 ? sum / count : 0.0;
        return count;
    };

    int iterations = 0;
    for (; iterations < cfg.max_iterations; ++iterations) {
        // Partial Fisher-Yates draw of k distinct indices.
        for (int j = 0; j < k; ++j) {
            std::uniform_int_distribution<int> pick(j, n - 1);
            std::swap(indices[j], indices[pick(rng)]);
            sample[j] = points[indices[j]];
        }
        Circle3D model;
        try {
            model = fit(std::span<const Vec3>(sample));
        } catch (const Error&) {
            continue; // degenerate minimal sample, still counts toward the budget
        }
        double mean_res = 0.0;
        const int count = evaluate(model, nullptr, &mean_res);
        if (count > best_count || (count == best_count && mean_res < best_score)) {
            best_count = count;
            best_score = mean_res;
            best_model = model;
            have_best = true;
        }
    }

    if (!have_best || best_count < k) throw NoConsensus();

    RansacReport report;
    report.iterations_run = iterations;
    report.best_hypothesis_inliers = best_count;
    report.inlier_mask.assign(n, false);

    // Refit on the consensus set; keep the hypothesis if the refit loses inliers.
    std::vector<bool> hyp_mask(n, false);
    evaluate(best_model, &hyp_mask, nullptr);
    std::vector<Vec3> consensus;
    consensus.reserve(best_count);
    for (int i = 0; i < n; ++i)
        if (hyp_mask[i]) consensus.push_back(points[i]);

    Circle3D final_model = best_model;
    try {
        const Circle3D refit = fit(std::span<const Vec3>(consensus));
        if (evaluate(refit, nullptr, nullptr) >= best_count) final_model = refit;
    } catch (const Error&) {
    }

    report.best_model = final_model;
    report.inlier_count = evaluate(final_model, &report.inlier_mask, &report.mean_inlier_residual);
    return report;
}

} // namespace

RansacReport ransac_fit_circle(std::span<const Vec3> points, const RansacConfig& cfg) {
    return ransac_circle_engine(
        points, cfg, [](std::span<const Vec3> pts) { return fit_circle_cga(pts).circle; },
        [](const Vec3& p, const Circle3D& c) { return point_circle_distance2(p, c); });
}

RansacReport ransac_fit_circle_decoupled(std::span<const Vec3> points, const RansacConfig& cfg) {
    return ransac_circle_engine(
        points, cfg, [](std::span<const Vec3> pts) { return fit_circle_decoupled(pts); },
        [](const Vec3& p, const Circle3D& c) { return circle_distance2_euclidean(p, c); });
}

} // namespace circal
