#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "circal/center_refine.hpp"
#include "circal/conic.hpp"
#include "circal/geom.hpp"
#include "circal/pnp.hpp"
#include "circal/robust.hpp"

namespace circal {

enum class Scenario {
    a_full,
    b_partial_arc,
    c_sparse_clusters,
    d_symmetric_sparse,
    outlier_test,
    twod_center,
    pose_study,
};

std::optional<Scenario> parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

struct ScenarioSpec {
    Scenario config = Scenario::a_full;
    int trials = 100;
    double sigma = 0.2; // meters for 3D scenarios, pixels for 2D scenarios
    std::uint64_t seed = 0;
    double outlier_fraction = 0.2; // outlier_test only

    // Estimator knobs.
    int ransac_iters = 1000;
    // Circle-RANSAC gate in squared meters; <= 0 selects the noise-matched
    // default max((0.05)^2, sigma^2).
    double inlier_threshold = 0.0;
    double reproj_threshold = 10.0; // PnP RANSAC, pixels

    double resolved_inlier_threshold() const {
        return inlier_threshold > 0.0 ? inlier_threshold : std::max(0.0025, sigma * sigma);
    }
    int n_dirs = 36;
    bool subpixel = false;

    // 2D scenario camera (the synthetic studies' fixed intrinsics).
    Intrinsics camera{600.0, 600.0, 640.0, 480.0};
    int image_width = 1280;
    int image_height = 960;
    int pose_pairs = 20; // circle pairs per pose-study trial
};

/// One method's outcome on one trial. Metrics that do not apply to the
/// scenario are NaN.
struct TrialRecord {
    int trial = 0;
    std::string method;
    double e_center_m = std::numeric_limits<double>::quiet_NaN();
    double e_radius_m = std::numeric_limits<double>::quiet_NaN();
    double e_2d_px = std::numeric_limits<double>::quiet_NaN();
    double e_reproj_px = std::numeric_limits<double>::quiet_NaN();
    double e_rot_rad = std::numeric_limits<double>::quiet_NaN();
    double e_trans_m = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
    double iqr = 0.0;
    int count = 0;
};

struct MethodSummary {
    int trials = 0;
    int failures = 0;
    std::map<std::string, MetricStats> metrics; // keyed by CSV column name
};

struct BenchResult {
    ScenarioSpec spec;
    std::vector<TrialRecord> records;
    std::map<std::string, MethodSummary> summary;
};

// --- sampling primitives ---------------------------------------------------

/// Ground-truth circle: center ~ U(-2,2)^3, radius ~ U(1,5), normal uniform on
/// the sphere (normalized Gaussian).
Circle3D sample_circle_gt(std::mt19937_64& rng);

/// Boundary samples per configuration law (exactly on the circle).
std::vector<Vec3> sample_points(const Circle3D& circle, Scenario config, std::mt19937_64& rng);

void add_noise(std::vector<Vec3>& points, double sigma, std::mt19937_64& rng);

/// Appends round(p * N) points uniform in the cube of side 4r centered on the
/// circle center, then shuffles the combined list.
void inject_outliers(std::vector<Vec3>& points, double p, const Circle3D& circle, std::mt19937_64& rng);

/// Exact image conic of a circle under a pose (no sampling, no noise).
Conic conic_of_circle(const Circle3D& circle, const RigidTransform& pose, const Intrinsics& k);

struct ViewResult {
    std::vector<Conic> conics;           // fitted from noisy boundary samples
    std::vector<Pixel> gt_centers;       // exact projections of the 3D centers
};

/// Project boundary samples of each circle, perturb by sigma_px, fit conics.
/// Throws if a circle is behind the camera or exits the image.
ViewResult generate_view(std::span<const Circle3D> circles, const RigidTransform& pose,
                         const Intrinsics& k, double sigma_px, std::mt19937_64& rng,
                         int samples_per_circle = 100, int image_width = 1280, int image_height = 960);

// --- harness ----------------------------------------------------------------

BenchResult run_benchmark(const ScenarioSpec& spec);

/// CSV with the fixed column set
/// trial,method,e_center_m,e_radius_m,e_2d_px,e_reproj_px,e_rot_rad,e_trans_m,failed
void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path);

/// Summary statistics (mean/std/median/iqr per metric per method) as JSON.
void write_summary_json(const BenchResult& result, const std::string& path);

/// Quantile with linear interpolation between order statistics (values sorted
/// internally); exposed so external checks share the exact convention.
double quantile(std::vector<double> values, double q);

} // namespace circal
