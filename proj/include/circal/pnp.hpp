#pragma once

#include <array>
#include <span>
#include <vector>

#include "circal/geom.hpp"
#include "circal/robust.hpp"

namespace circal {

struct Correspondence {
    Vec3 p3d;  // LiDAR/world frame
    Pixel q2d; // image observation
};

/// A 3D point with the two 2D center hypotheses from the chord-loss search.
struct AmbiguousCorrespondence {
    Vec3 p3d;
    std::array<Pixel, 2> hypotheses;
};

struct PoseEstimate {
    RigidTransform transform; // maps world/LiDAR frame into the camera frame
    double mean_reproj_error = 0.0;
    std::vector<bool> inlier_mask;
};

struct RefineOptions {
    int max_iterations = 100;
    double gradient_tol = 1e-10;
    std::vector<double>* objective_trace = nullptr; // accepted-step objectives
};

/// Sum of squared reprojection residual norms; +inf if any point lands at or
/// behind the camera plane.
double reprojection_objective(std::span<const Correspondence> corrs, const Intrinsics& k,
                              const RigidTransform& pose);

/// Residual q - pi(R p + t) and its Jacobian wrt (axis-angle increment, dt).
void reprojection_residual(const Correspondence& corr, const Intrinsics& k, const RigidTransform& pose,
                           Eigen::Vector2d* residual, Eigen::Matrix<double, 2, 6>* jacobian);

/// Full PnP: linear initialization (DLT, planar homography, or P3P subsets
/// depending on the configuration) + damped least-squares refinement.
PoseEstimate solve_pnp(std::span<const Correspondence> corrs, const Intrinsics& k,
                       const RefineOptions& opts = {});

/// Standard PnP-RANSAC with 4-point minimal hypotheses. inlier_threshold is in
/// pixels of reprojection error.
PoseEstimate solve_pnp_ransac(std::span<const Correspondence> corrs, const Intrinsics& k,
                              const RansacConfig& cfg);

/// Quasi-RANSAC over paired 2D hypotheses: each iteration samples 4 indices
/// and one hypothesis per index; scoring takes the better hypothesis per
/// correspondence; the final refit uses the per-point best hypotheses.
PoseEstimate solve_pnp_paired(std::span<const AmbiguousCorrespondence> ambiguous, const Intrinsics& k,
                              const RansacConfig& cfg);

} // namespace circal
