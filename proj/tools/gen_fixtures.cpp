// Writes the deterministic sample data under data/ that the CLI tests and the
// acceptance suite consume. Run from the repository root:
//   ./build/gen_fixtures data
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "json.hpp"

#include "circal/center_refine.hpp"
#include "circal/io.hpp"
#include "circal/synth.hpp"

using namespace circal;
using nlohmann::json;

namespace {

void save_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    const std::filesystem::path root = argc > 1 ? argv[1] : "data";
    std::filesystem::create_directories(root);
    std::mt19937_64 rng(20240817ULL);

    const Intrinsics k{600.0, 600.0, 640.0, 480.0};
    save_intrinsics(k, (root / "intrinsics.json").string());

    // --- noise-free ring cloud -------------------------------------------
    Circle3D ring;
    ring.center = Vec3(1.0, -0.5, 3.0);
    ring.normal = Vec3(1.0, 2.0, 2.0).normalized();
    ring.radius = 0.8;
    {
        std::vector<Vec3> pts = sample_points(ring, Scenario::a_full, rng);
        save_cloud_csv(pts, (root / "ring_clean.csv").string());
        json gt = {{"center", {ring.center.x(), ring.center.y(), ring.center.z()}},
                   {"normal", {ring.normal.x(), ring.normal.y(), ring.normal.z()}},
                   {"radius", ring.radius}};
        save_json_file(gt, root / "ring_clean.gt.json");
    }

    // --- noisy ring with outliers + recorded inlier bookkeeping ----------
    {
        std::vector<Vec3> pts = sample_points(ring, Scenario::a_full, rng);
        add_noise(pts, 0.01, rng);
        const int n_inlier = static_cast<int>(pts.size());
        std::uniform_real_distribution<double> box(-2.0 * ring.radius, 2.0 * ring.radius);
        for (int i = 0; i < 30; ++i)
            pts.push_back(ring.center + Vec3(box(rng), box(rng), box(rng)));
        save_cloud_csv(pts, (root / "ring_outliers.csv").string());

        RansacConfig cfg;
        cfg.seed = 7;
        const RansacReport rep = ransac_fit_circle(pts, cfg);
        json gt = {{"n_inliers_true", n_inlier},
                   {"n_outliers_true", 30},
                   {"inlier_count", rep.inlier_count},
                   {"center", {ring.center.x(), ring.center.y(), ring.center.z()}},
                   {"radius", ring.radius},
                   {"seed", 7}};
        save_json_file(gt, root / "ring_outliers.gt.json");
    }

    // --- 2D fixtures: oblique coplanar pair and fronto-parallel view ------
    {
        Circle3D primary;
        primary.center = Vec3(0.3, -0.2, 6.0);
        primary.normal = Eigen::AngleAxisd(40.0 * M_PI / 180.0, Vec3::UnitY()) * Vec3(0, 0, 1);
        primary.radius = 0.6;
        Circle3D secondary = primary;
        const auto [e1, e2] = plane_basis(primary.normal);
        secondary.center = primary.center + 1.7 * primary.radius * e1;
        secondary.radius = 0.42;

        const RigidTransform identity;
        save_ellipse_conic(conic_of_circle(primary, identity, k), (root / "ellipse_oblique.json").string());
        save_ellipse_conic(conic_of_circle(secondary, identity, k),
                           (root / "ellipse_oblique_second.json").string());
        const Pixel gt = project(primary.center, identity, k);
        save_json_file(json{{"gt_center_px", {gt.x(), gt.y()}},
                            {"radius", primary.radius},
                            {"ratio", primary.radius / secondary.radius}},
                       root / "ellipse_oblique.gt.json");

        Circle3D fronto;
        fronto.center = Vec3(0.1, 0.05, 5.0);
        fronto.normal = Vec3(0, 0, 1);
        fronto.radius = 0.5;
        save_ellipse_conic(conic_of_circle(fronto, identity, k), (root / "ellipse_fronto.json").string());
        const Pixel gtf = project(fronto.center, identity, k);
        save_json_file(json{{"gt_center_px", {gtf.x(), gtf.y()}}, {"radius", fronto.radius}},
                       root / "ellipse_fronto.gt.json");
    }

    // --- synthetic calibration job with a known pose -----------------------
    {
        const std::filesystem::path jobdir = root / "job";
        std::filesystem::create_directories(jobdir);

        RigidTransform pose; // camera <- lidar
        pose.rotation = (Eigen::AngleAxisd(0.35, Vec3::UnitY()) * Eigen::AngleAxisd(-0.2, Vec3::UnitX()) *
                         Eigen::AngleAxisd(0.1, Vec3::UnitZ()))
                            .toRotationMatrix();
        pose.translation = Vec3(0.25, -0.1, 0.4);
        const RigidTransform lidar_from_cam = pose.inverse();

        json frames = json::array();
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        int written = 0;
        for (int attempt = 0; written < 10 && attempt < 400; ++attempt) {
            Circle3D cam_circle;
            const Pixel anchor(k.cx + (u01(rng) - 0.5) * 500.0, k.cy + (u01(rng) - 0.5) * 380.0);
            const Vec3 dir = backproject_ray(anchor, k);
            cam_circle.center = (3.5 + 3.0 * u01(rng)) * dir;
            cam_circle.radius = 0.4 + 0.25 * u01(rng);
            const auto [d1, d2] = plane_basis(dir);
            const double phi = 2.0 * M_PI * u01(rng);
            const double tilt = (20.0 + 30.0 * u01(rng)) * M_PI / 180.0;
            cam_circle.normal =
                Eigen::AngleAxisd(tilt, std::cos(phi) * d1 + std::sin(phi) * d2) * dir;

            Circle3D cam_second = cam_circle;
            const auto [p1, p2] = plane_basis(cam_circle.normal);
            cam_second.radius = 0.7 * cam_circle.radius;
            cam_second.center =
                cam_circle.center + (cam_circle.radius + cam_second.radius + 0.3 * cam_circle.radius) * p1;

            // Visibility check.
            bool ok = true;
            for (const Circle3D* c : {&cam_circle, &cam_second}) {
                const auto [b1, b2] = plane_basis(c->normal);
                for (int i = 0; i < 36 && ok; ++i) {
                    const Vec3 p = c->center + c->radius * (std::cos(i * M_PI / 18.0) * b1 +
                                                            std::sin(i * M_PI / 18.0) * b2);
                    if (p.z() < 0.5) {
                        ok = false;
                        break;
                    }
                    const Pixel px = project(p, k);
                    if (px.x() < 10 || px.x() > 1270 || px.y() < 10 || px.y() > 950) ok = false;
                }
            }
            if (!ok) continue;

            // LiDAR cloud: boundary samples of the primary circle in the lidar frame.
            Circle3D lidar_circle;
            lidar_circle.center = lidar_from_cam.apply(cam_circle.center);
            lidar_circle.normal = lidar_from_cam.rotation * cam_circle.normal;
            lidar_circle.radius = cam_circle.radius;
            std::vector<Vec3> cloud = sample_points(lidar_circle, Scenario::a_full, rng);
            add_noise(cloud, 0.004, rng);
            std::uniform_real_distribution<double> box(-2.0 * lidar_circle.radius,
                                                       2.0 * lidar_circle.radius);
            for (int i = 0; i < 12; ++i)
                cloud.push_back(lidar_circle.center + Vec3(box(rng), box(rng), box(rng)));
            std::shuffle(cloud.begin(), cloud.end(), rng);

            const std::string cloud_name = "cloud_" + std::to_string(written) + ".csv";
            save_cloud_csv(cloud, (jobdir / cloud_name).string());

            // Image ellipses fitted from noisy projected boundary samples.
            const RigidTransform identity_pose = pose;
            std::vector<Circle3D> cam_pair{cam_circle, cam_second};
            std::vector<Circle3D> lidar_pair{lidar_circle,
                                             {lidar_from_cam.apply(cam_second.center),
                                              lidar_from_cam.rotation * cam_second.normal,
                                              cam_second.radius}};
            const ViewResult view = generate_view(lidar_pair, identity_pose, k, 0.4, rng, 160);
            const std::string e1_name = "ellipse_" + std::to_string(written) + ".json";
            const std::string e2_name = "ellipse_" + std::to_string(written) + "b.json";
            save_ellipse_conic(view.conics[0], (jobdir / e1_name).string());
            save_ellipse_conic(view.conics[1], (jobdir / e2_name).string());

            frames.push_back({{"cloud", cloud_name},
                              {"ellipse", e1_name},
                              {"second_ellipse", e2_name},
                              {"radius", cam_circle.radius},
                              {"ratio", cam_circle.radius / cam_second.radius},
                              {"coplanar", true}});
            ++written;
        }
        if (written < 10) {
            std::cerr << "fixture generation failed: could not place 10 frames\n";
            return 1;
        }

        save_intrinsics(k, (jobdir / "intrinsics.json").string());
        json job = {{"intrinsics", "intrinsics.json"},
                    {"frames", frames},
                    {"options",
                     {{"mode", "auto"},
                      {"ransac_iters", 1000},
                      {"inlier_thresh", 0.0025},
                      {"reproj_thresh", 10.0},
                      {"seed", 11}}}};
        save_json_file(job, jobdir / "job.json");

        json gt;
        gt["T"] = json::array();
        const Eigen::Matrix4d m = pose.matrix();
        for (int r = 0; r < 4; ++r) {
            json row = json::array();
            for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
            gt["T"].push_back(row);
        }
        save_json_file(gt, jobdir / "job.gt.json");
    }

    std::cout << "fixtures written to " << root << '\n';
    return 0;
}
