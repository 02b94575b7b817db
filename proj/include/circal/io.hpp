#pragma once

#include <optional>
#include <string>
#include <vector>

#include "circal/conic.hpp"
#include "circal/geom.hpp"
#include "circal/pnp.hpp"
#include "circal/robust.hpp"

namespace circal {

Intrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const Intrinsics& k, const std::string& path);

/// {"T": [[4x4 row-major]]}; the reader also accepts a flat 16-element array.
RigidTransform load_transform(const std::string& path);
void save_transform(const RigidTransform& t, const std::string& path);

/// Conic form {"Q": [[3x3]]} or geometric form {"cx","cy","a","b","theta"}.
Conic load_ellipse(const std::string& path);
void save_ellipse_conic(const Conic& c, const std::string& path);
void save_ellipse_params(const EllipseParams& p, const std::string& path);

/// Point cloud from CSV (header x,y,z) or ASCII PLY (x y z vertex props;
/// extra properties ignored). Format chosen by extension.
std::vector<Vec3> load_cloud(const std::string& path);
void save_cloud_csv(const std::vector<Vec3>& points, const std::string& path);

struct ExtrinsicsReport {
    RigidTransform transform;
    double mean_reproj_px = 0.0;
    std::vector<int> inliers;
    // per-correspondence detail for the calibration report
    std::vector<Correspondence> used;
    std::vector<double> reproj_px;
};

void save_extrinsics(const ExtrinsicsReport& report, const std::string& path);

struct CalibrationFrame {
    std::string cloud_path;
    std::string ellipse_path;
    double radius = 0.0;
    std::optional<std::string> second_ellipse_path;
    std::optional<double> radius_ratio; // primary / secondary
    bool coplanar = false;
};

struct CalibrationJob {
    std::string intrinsics_path;
    std::vector<CalibrationFrame> frames;
    std::string mode = "auto"; // auto | homography | paired
    RansacConfig circle_ransac;
    double reproj_threshold = 10.0;
    int n_dirs = 36;
    bool subpixel = false;
};

/// Relative paths inside the job file resolve against the job file directory.
CalibrationJob load_job(const std::string& path);

} // namespace circal
