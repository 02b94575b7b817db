#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "circal/center_refine.hpp"
#include "circal/io.hpp"
#include "circal/pnp.hpp"
#include "circal/robust.hpp"
#include "circal/synth.hpp"

namespace {

using namespace circal;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitDisambiguation = 4;

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw InputError("cannot open for writing: " + out_path);
        out << j.dump(2) << '\n';
    }
}

json circle_json(const Circle3D& c) {
    return {{"center", {c.center.x(), c.center.y(), c.center.z()}},
            {"normal", {c.normal.x(), c.normal.y(), c.normal.z()}},
            {"radius", c.radius}};
}

// --- fit-circle3d -----------------------------------------------------------

struct FitArgs {
    std::string cloud_path;
    std::string out_path;
    bool no_ransac = false;
    int ransac_iters = 1000;
    double inlier_thresh = 0.0025;
    int min_sample = 5;
    std::uint64_t seed = 0;
};

int run_fit(const FitArgs& a) {
    const std::vector<Vec3> points = load_cloud(a.cloud_path);
    json j;
    if (a.no_ransac) {
        const CgaFitResult fit = fit_circle_cga(points);
        j = circle_json(fit.circle);
        j["mean_residual"] = fit.mean_residual;
        j["inliers"] = json::array();
        for (std::size_t i = 0; i < points.size(); ++i) j["inliers"].push_back(i);
        j["inlier_count"] = points.size();
    } else {
        RansacConfig cfg;
        cfg.max_iterations = a.ransac_iters;
        cfg.inlier_threshold = a.inlier_thresh;
        cfg.min_sample = a.min_sample;
        cfg.seed = a.seed;
        const RansacReport rep = ransac_fit_circle(points, cfg);
        j = circle_json(rep.best_model);
        j["mean_residual"] = rep.mean_inlier_residual;
        j["inlier_count"] = rep.inlier_count;
        j["iterations_run"] = rep.iterations_run;
        json idx = json::array();
        for (std::size_t i = 0; i < rep.inlier_mask.size(); ++i)
            if (rep.inlier_mask[i]) idx.push_back(i);
        j["inliers"] = idx;
    }
    emit(j, a.out_path);
    return kExitOk;
}

// --- refine-center2d ---------------------------------------------------------

struct RefineArgs {
    std::string ellipse_path;
    std::string intrinsics_path;
    double radius = 0.0;
    std::string second_path;
    double ratio = 0.0;
    bool coplanar = false;
    int n_dirs = 36;
    bool subpixel = false;
    std::string dump_field;
    std::string out_path;
};

int run_refine(const RefineArgs& a) {
    const Conic conic = load_ellipse(a.ellipse_path);
    const Intrinsics k = load_intrinsics(a.intrinsics_path);
    if (!(a.radius > 0.0)) throw InputError("--radius must be positive");
    if (a.coplanar && (a.second_path.empty() || !(a.ratio > 0.0)))
        throw InputError("--coplanar requires --second and --ratio");

    CenterSearchConfig cfg;
    cfg.n_dirs = a.n_dirs;
    cfg.subpixel = a.subpixel;

    if (!a.dump_field.empty()) {
        const ChordLossField field = build_chord_loss_field(conic, a.radius, k, cfg);
        std::ofstream out(a.dump_field);
        if (!out) throw InputError("cannot open for writing: " + a.dump_field);
        out << "u,v,loss\n";
        char buf[96];
        for (int r = 0; r < field.values.rows(); ++r)
            for (int c = 0; c < field.values.cols(); ++c) {
                const Pixel p = field.pixel_at(r, c);
                std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.17g\n", p.x(), p.y(), field.values(r, c));
                out << buf;
            }
    }

    const CenterHypothesisPair pair = find_center_hypotheses(conic, a.radius, k, cfg);
    json j;
    j["hypotheses"] = json::array();
    j["hypotheses"].push_back({{"px", {pair.c_a.x(), pair.c_a.y()}},
                               {"loss", pair.loss_a},
                               {"mean_distance_m", pair.distance_a}});
    if (!pair.single_minimum)
        j["hypotheses"].push_back({{"px", {pair.c_b.x(), pair.c_b.y()}},
                                   {"loss", pair.loss_b},
                                   {"mean_distance_m", pair.distance_b}});
    j["single_minimum"] = pair.single_minimum;

    int code = kExitOk;
    if (pair.single_minimum) {
        j["selected"] = {pair.c_a.x(), pair.c_a.y()};
    } else if (a.coplanar) {
        try {
            const Conic second = load_ellipse(a.second_path);
            const Pixel sel = disambiguate_by_ratio(pair, conic, second, a.ratio);
            j["selected"] = {sel.x(), sel.y()};
        } catch (const DisambiguationError& e) {
            j["error"] = e.what();
            code = kExitDisambiguation;
        }
    }
    emit(j, a.out_path);
    return code;
}

// --- calibrate ----------------------------------------------------------------

struct CalibrateArgs {
    std::string job_path;
    std::string out_path;
    std::string mode_override;
};

int run_calibrate(const CalibrateArgs& a) {
    CalibrationJob job = load_job(a.job_path);
    if (!a.mode_override.empty()) job.mode = a.mode_override;
    const Intrinsics k = load_intrinsics(job.intrinsics_path);
    if (job.frames.size() < 4) throw InputError("calibration needs at least 4 correspondences");

    CenterSearchConfig cc;
    cc.n_dirs = job.n_dirs;
    cc.subpixel = job.subpixel;

    std::vector<AmbiguousCorrespondence> ambiguous;
    bool any_unresolved = false;

    for (const CalibrationFrame& frame : job.frames) {
        const std::vector<Vec3> cloud = load_cloud(frame.cloud_path);
        const RansacReport circle = ransac_fit_circle(cloud, job.circle_ransac);
        const Conic conic = load_ellipse(frame.ellipse_path);
        const CenterHypothesisPair pair = find_center_hypotheses(conic, frame.radius, k, cc);

        AmbiguousCorrespondence corr;
        corr.p3d = circle.best_model.center;
        corr.hypotheses = {pair.c_a, pair.c_b};

        const bool want_homography =
            job.mode != "paired" && frame.coplanar && frame.second_ellipse_path && frame.radius_ratio;
        if (job.mode == "homography" && !want_homography)
            throw InputError("mode homography requires a coplanar pair with a ratio in every frame");

        if (pair.single_minimum) {
            corr.hypotheses = {pair.c_a, pair.c_a};
        } else if (want_homography) {
            try {
                const Conic second = load_ellipse(*frame.second_ellipse_path);
                const Pixel sel = disambiguate_by_ratio(pair, conic, second, *frame.radius_ratio);
                corr.hypotheses = {sel, sel};
            } catch (const DisambiguationError&) {
                if (job.mode == "homography") throw;
                any_unresolved = true;
            }
        } else {
            any_unresolved = true;
        }
        ambiguous.push_back(corr);
    }
    (void)any_unresolved; // resolved and unresolved frames share the paired solver

    RansacConfig pc;
    pc.max_iterations = job.circle_ransac.max_iterations;
    pc.inlier_threshold = job.reproj_threshold;
    pc.seed = job.circle_ransac.seed;

    const PoseEstimate pose = solve_pnp_paired(ambiguous, k, pc);

    ExtrinsicsReport report;
    report.transform = pose.transform;
    report.mean_reproj_px = pose.mean_reproj_error;
    for (std::size_t i = 0; i < ambiguous.size(); ++i) {
        if (pose.inlier_mask[i]) report.inliers.push_back(static_cast<int>(i));
        const auto& amb = ambiguous[i];
        double best_err = std::numeric_limits<double>::infinity();
        Pixel best_px = amb.hypotheses[0];
        for (const Pixel& h : amb.hypotheses) {
            try {
                const double e = (project(amb.p3d, pose.transform, k) - h).norm();
                if (e < best_err) {
                    best_err = e;
                    best_px = h;
                }
            } catch (const BehindCamera&) {
            }
        }
        report.used.push_back({amb.p3d, best_px});
        report.reproj_px.push_back(best_err);
    }
    if (a.out_path.empty()) {
        json j;
        j["T"] = json::array();
        const Eigen::Matrix4d m = pose.transform.matrix();
        for (int r = 0; r < 4; ++r) {
            json row = json::array();
            for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
            j["T"].push_back(row);
        }
        j["mean_reproj_px"] = pose.mean_reproj_error;
        j["inliers"] = report.inliers;
        std::cout << j.dump(2) << '\n';
    } else {
        save_extrinsics(report, a.out_path);
    }
    return kExitOk;
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
    std::string scenario;
    int trials = 100;
    double sigma = -1.0;
    std::uint64_t seed = 0;
    double p = 0.2;
    std::string out_prefix = "bench";
    int ransac_iters = 1000;
    double inlier_thresh = -1.0; // <= 0: noise-matched default
    double reproj_thresh = 10.0;
    int n_dirs = 36;
    bool subpixel = false;
};

int run_bench(const BenchArgs& a) {
    const auto scenario = parse_scenario(a.scenario);
    if (!scenario) throw InputError("unknown scenario: " + a.scenario);

    ScenarioSpec spec;
    spec.config = *scenario;
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.outlier_fraction = a.p;
    spec.ransac_iters = a.ransac_iters;
    spec.inlier_threshold = a.inlier_thresh > 0 ? a.inlier_thresh : 0.0;
    spec.reproj_threshold = a.reproj_thresh;
    spec.n_dirs = a.n_dirs;
    spec.subpixel = a.subpixel;
    switch (*scenario) {
        case Scenario::outlier_test: spec.sigma = a.sigma >= 0 ? a.sigma : 0.1; break;
        case Scenario::twod_center:
        case Scenario::pose_study: spec.sigma = a.sigma >= 0 ? a.sigma : 1.0; break;
        default: spec.sigma = a.sigma >= 0 ? a.sigma : 0.2; break;
    }

    const BenchResult result = run_benchmark(spec);
    write_records_csv(result.records, a.out_prefix + ".csv");
    write_summary_json(result, a.out_prefix + ".summary.json");

    for (const auto& [method, ms] : result.summary) {
        std::cout << method << ": trials=" << ms.trials << " failures=" << ms.failures;
        for (const auto& [metric, st] : ms.metrics)
            std::cout << "  " << metric << " mean=" << st.mean << " median=" << st.median;
        std::cout << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"circle-target camera/LiDAR extrinsic calibration toolkit"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* cmd_fit = app.add_subcommand("fit-circle3d", "fit a 3D circle to a point cloud");
    cmd_fit->add_option("cloud", fit.cloud_path, "CSV (x,y,z) or ASCII PLY point cloud")->required();
    cmd_fit->add_option("-o,--out", fit.out_path, "output JSON path (default stdout)");
    cmd_fit->add_flag("--no-ransac", fit.no_ransac, "plain fit on all points");
    cmd_fit->add_option("--ransac-iters", fit.ransac_iters, "RANSAC iterations")->capture_default_str();
    cmd_fit->add_option("--inlier-thresh", fit.inlier_thresh, "inlier threshold (m^2)")->capture_default_str();
    cmd_fit->add_option("--min-sample", fit.min_sample, "minimal sample size")->capture_default_str();
    cmd_fit->add_option("--seed", fit.seed, "RANSAC seed")->capture_default_str();

    RefineArgs refine;
    auto* cmd_refine = app.add_subcommand("refine-center2d", "recover the projected 3D circle center");
    cmd_refine->add_option("--ellipse", refine.ellipse_path, "ellipse JSON (conic or geometric)")->required();
    cmd_refine->add_option("--intrinsics", refine.intrinsics_path, "intrinsics JSON")->required();
    cmd_refine->add_option("--radius", refine.radius, "physical circle radius (m)")->required();
    cmd_refine->add_flag("--coplanar", refine.coplanar, "disambiguate with a coplanar second ellipse");
    cmd_refine->add_option("--second", refine.second_path, "second (coplanar) ellipse JSON");
    cmd_refine->add_option("--ratio", refine.ratio, "physical radius ratio primary/secondary");
    cmd_refine->add_option("--n-dirs", refine.n_dirs, "chord directions")->capture_default_str();
    cmd_refine->add_flag("--subpixel", refine.subpixel, "quadratic sub-pixel refinement");
    cmd_refine->add_option("--dump-field", refine.dump_field, "write the loss field as CSV");
    cmd_refine->add_option("-o,--out", refine.out_path, "output JSON path (default stdout)");

    CalibrateArgs cal;
    auto* cmd_cal = app.add_subcommand("calibrate", "full extrinsic calibration from a job file");
    cmd_cal->add_option("--job", cal.job_path, "calibration job JSON")->required();
    cmd_cal->add_option("-o,--out", cal.out_path, "extrinsics JSON output path (default stdout)");
    cmd_cal->add_option("--mode", cal.mode_override, "auto | homography | paired");

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "synthetic Monte Carlo benchmarks");
    cmd_bench->add_option("--scenario", bench.scenario,
                          "full | partial-arc | clusters | symmetric-sparse | outlier | 2d-center | pose-study")
        ->required();
    cmd_bench->add_option("--trials", bench.trials, "number of trials")->capture_default_str();
    cmd_bench->add_option("--sigma", bench.sigma, "noise sigma (m for 3D, px for 2D scenarios)");
    cmd_bench->add_option("--seed", bench.seed, "base seed")->capture_default_str();
    cmd_bench->add_option("--p", bench.p, "outlier fraction (outlier scenario)")->capture_default_str();
    cmd_bench->add_option("--out", bench.out_prefix, "output prefix for .csv / .summary.json")
        ->capture_default_str();
    cmd_bench->add_option("--ransac-iters", bench.ransac_iters, "RANSAC iterations")->capture_default_str();
    cmd_bench->add_option("--inlier-thresh", bench.inlier_thresh,
                          "circle inlier threshold (m^2); default max(0.0025, sigma^2)");
    cmd_bench->add_option("--reproj-thresh", bench.reproj_thresh, "PnP inlier threshold (px)")
        ->capture_default_str();
    cmd_bench->add_option("--n-dirs", bench.n_dirs, "chord directions")->capture_default_str();
    cmd_bench->add_flag("--subpixel", bench.subpixel, "sub-pixel loss minima");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (cmd_fit->parsed()) return run_fit(fit);
        if (cmd_refine->parsed()) return run_refine(refine);
        if (cmd_cal->parsed()) return run_calibrate(cal);
        if (cmd_bench->parsed()) return run_bench(bench);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DisambiguationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDisambiguation;
    } catch (const EstimationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimation;
    }
    return kExitOk;
}
