#pragma once

#include <optional>

#include "circal/conic.hpp"
#include "circal/geom.hpp"

namespace circal {

/// Chord-length-variance loss sampled on a pixel grid over the ellipse
/// interior. Cells outside the ellipse hold NaN.
struct ChordLossField {
    Pixel origin = Pixel::Zero(); // pixel coordinates of values(0, 0)
    double step = 1.0;
    Eigen::MatrixXd values; // values(row, col) = loss at origin + (col, row) * step
    int n_dirs = 36;

    Pixel pixel_at(int row, int col) const { return origin + step * Pixel(col, row); }
};

struct CenterHypothesisPair {
    Pixel c_a = Pixel::Zero(); // loss_a <= loss_b
    Pixel c_b = Pixel::Zero();
    double loss_a = 0.0;
    double loss_b = 0.0;
    double distance_a = 0.0; // mean recovered camera-to-center distance at c_a
    double distance_b = 0.0;
    bool single_minimum = false; // degenerate (e.g. fronto-parallel): c_b == c_a
};

/// Plane rectification built from one candidate center: full map is h * pre,
/// where pre = A1 * A2 centers and axis-aligns the conic and h = He * Ha * Hp.
struct RectifyingHomography {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d pre = Eigen::Matrix3d::Identity();
    Pixel candidate = Pixel::Zero();

    Eigen::Matrix3d full() const { return h * pre; }
};

struct CenterSearchConfig {
    int n_dirs = 36;
    double grid_step = 1.0;
    double nms_radius = 0.0; // <= 0: max(3 px, 0.1 * minor semi-axis)
    bool subpixel = false;
    int min_valid_dirs = 0;         // <= 0: every direction must survive
    double boundary_margin_px = 3.0; // inset that excludes the degenerate rim
};

/// Camera-to-circle-center distance recovered from one chord through the
/// candidate (law of cosines on the viewing rays, known physical radius).
double chord_distance(const Conic& conic, const Pixel& candidate, double gamma, double radius,
                      const Intrinsics& k);

/// Variance of the chord distances over n_dirs uniformly spaced directions.
double chord_loss(const Conic& conic, const Pixel& candidate, double radius, const Intrinsics& k,
                  int n_dirs);

/// Radius-free variant: relative dispersion (variance / mean^2) at r = 1.
double chord_loss_normalized(const Conic& conic, const Pixel& candidate, const Intrinsics& k,
                             int n_dirs);

ChordLossField build_chord_loss_field(const Conic& conic, std::optional<double> radius,
                                      const Intrinsics& k, const CenterSearchConfig& cfg);

/// Grid search + non-maximum suppression for the two lowest loss minima.
/// radius == nullopt switches to the normalized loss.
CenterHypothesisPair find_center_hypotheses(const Conic& conic, std::optional<double> radius,
                                            const Intrinsics& k, const CenterSearchConfig& cfg = {});

/// Candidate-anchored rectification: maps the conic to a circle centered at
/// the origin and the candidate to that center.
RectifyingHomography build_rectifying_homography(const Conic& conic, const Pixel& candidate);

/// Equivalent circle radius of a conic pushed through the rectification.
double rectified_radius(const Conic& conic, const RectifyingHomography& h);

/// Map a conic through an invertible point homography.
Conic transform_conic(const Conic& conic, const Eigen::Matrix3d& point_map);

/// Pick the hypothesis whose rectification preserves the known physical radius
/// ratio of two coplanar circles.
Pixel disambiguate_by_ratio(const CenterHypothesisPair& pair, const Conic& conic_primary,
                            const Conic& conic_secondary, double physical_ratio);

} // namespace circal
