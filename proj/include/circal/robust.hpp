#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "circal/cga.hpp"
#include "circal/geom.hpp"

namespace circal {

struct RansacConfig {
    int max_iterations = 1000;
    double inlier_threshold = 0.0025; // squared-distance units (m^2)
    int min_sample = 5;
    std::uint64_t seed = 0;
};

struct RansacReport {
    Circle3D best_model;
    std::vector<bool> inlier_mask;
    int iterations_run = 0;
    int inlier_count = 0;
    // Diagnostics: consensus of the best raw hypothesis before the final refit.
    int best_hypothesis_inliers = 0;
    double mean_inlier_residual = 0.0;
};

/// True Euclidean squared distance from a point to a circle.
double circle_distance2_euclidean(const Vec3& p, const Circle3D& circle);

/// CGA circle estimator inside RANSAC: 5-point closed-form models, conformal
/// distance scoring, final refit on the consensus set.
RansacReport ransac_fit_circle(std::span<const Vec3> points, const RansacConfig& cfg);

/// Decoupled baseline: total-least-squares plane, in-plane algebraic circle
/// fit, lifted back to 3D.
Circle3D fit_circle_decoupled(std::span<const Vec3> points);

/// Baseline wrapped in the same RANSAC loop, scored by Euclidean distance.
RansacReport ransac_fit_circle_decoupled(std::span<const Vec3> points, const RansacConfig& cfg);

} // namespace circal
