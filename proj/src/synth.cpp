#include "circal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace circal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec3 circle_point(const Circle3D& c, const Vec3& b1, const Vec3& b2, double theta) {
    return c.center + c.radius * (std::cos(theta) * b1 + std::sin(theta) * b2);
}

std::uint64_t derived_seed(std::uint64_t seed, int trial, std::uint64_t salt) {
    return seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1) + salt;
}

} // namespace

std::optional<Scenario> parse_scenario(const std::string& name) {
    if (name == "full" || name == "A" || name == "a") return Scenario::a_full;
    if (name == "partial-arc" || name == "B" || name == "b") return Scenario::b_partial_arc;
    if (name == "clusters" || name == "C" || name == "c") return Scenario::c_sparse_clusters;
    if (name == "symmetric-sparse" || name == "D" || name == "d") return Scenario::d_symmetric_sparse;
    if (name == "outlier") return Scenario::outlier_test;
    if (name == "2d-center") return Scenario::twod_center;
    if (name == "pose-study") return Scenario::pose_study;
    return std::nullopt;
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::a_full: return "full";
        case Scenario::b_partial_arc: return "partial-arc";
        case Scenario::c_sparse_clusters: return "clusters";
        case Scenario::d_symmetric_sparse: return "symmetric-sparse";
        case Scenario::outlier_test: return "outlier";
        case Scenario::twod_center: return "2d-center";
        case Scenario::pose_study: return "pose-study";
    }
    return "unknown";
}

Circle3D sample_circle_gt(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uc(-2.0, 2.0);
    std::uniform_real_distribution<double> ur(1.0, 5.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Circle3D c;
    c.center = Vec3(uc(rng), uc(rng), uc(rng));
    c.radius = ur(rng);
    Vec3 n(gauss(rng), gauss(rng), gauss(rng));
    while (n.norm() < 1e-12) n = Vec3(gauss(rng), gauss(rng), gauss(rng));
    c.normal = n.normalized();
    return c;
}

std::vector<Vec3> sample_points(const Circle3D& circle, Scenario config, std::mt19937_64& rng) {
    const auto [b1, b2] = plane_basis(circle.normal);
    std::vector<double> thetas;
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    switch (config) {
        case Scenario::a_full:
        case Scenario::outlier_test: {
            std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
            for (int i = 0; i < 100; ++i) thetas.push_back(ua(rng));
            break;
        }
        case Scenario::b_partial_arc: {
            const double arc = 70.0 * M_PI / 180.0;
            for (int i = 0; i < 100; ++i) {
                const double u = u01(rng);
                thetas.push_back(u * u * arc - 0.2 * arc);
            }
            break;
        }
        case Scenario::c_sparse_clusters: {
            std::uniform_int_distribution<int> nk(2, 3);
            const int k = nk(rng);
            std::uniform_real_distribution<double> ucenter(0.0, 2.0 * M_PI);
            std::uniform_real_distribution<double> uspread(M_PI / 30.0, M_PI / 9.0);
            std::vector<int> counts(k, 12 / k);
            for (int i = 0; i < 12 % k; ++i) ++counts[i];
            for (int j = 0; j < k; ++j) {
                std::normal_distribution<double> cluster(ucenter(rng), uspread(rng));
                for (int i = 0; i < counts[j]; ++i) thetas.push_back(cluster(rng));
            }
            break;
        }
        case Scenario::d_symmetric_sparse: {
            const double arc = 200.0 * M_PI / 180.0;
            std::uniform_real_distribution<double> ui(0.8, 1.2);
            std::vector<double> intervals(19);
            double total = 0.0;
            for (double& v : intervals) {
                v = ui(rng);
                total += v;
            }
            double theta = -arc / 2.0;
            thetas.push_back(theta);
            for (double v : intervals) {
                theta += v / total * arc;
                thetas.push_back(theta);
            }
            break;
        }
        default:
            throw InputError("sample_points: not a 3D point-sampling scenario");
    }

    std::vector<Vec3> out;
    out.reserve(thetas.size());
    for (double t : thetas) out.push_back(circle_point(circle, b1, b2, t));
    return out;
}

void add_noise(std::vector<Vec3>& points, double sigma, std::mt19937_64& rng) {
    if (sigma <= 0.0) return;
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Vec3& p : points) p += Vec3(gauss(rng), gauss(rng), gauss(rng));
}

void inject_outliers(std::vector<Vec3>& points, double p, const Circle3D& circle, std::mt19937_64& rng) {
    const int n = static_cast<int>(points.size());
    const int n_out = static_cast<int>(std::llround(p * n));
    std::uniform_real_distribution<double> box(-2.0 * circle.radius, 2.0 * circle.radius);
    for (int i = 0; i < n_out; ++i)
        points.push_back(circle.center + Vec3(box(rng), box(rng), box(rng)));
    std::shuffle(points.begin(), points.end(), rng);
}

Conic conic_of_circle(const Circle3D& circle, const RigidTransform& pose, const Intrinsics& k) {
    const auto [b1, b2] = plane_basis(circle.normal);
    Eigen::Matrix3d h;
    h.col(0) = pose.rotation * b1;
    h.col(1) = pose.rotation * b2;
    h.col(2) = pose.apply(circle.center);
    h = k.matrix() * h;
    if (std::abs(h.determinant()) < 1e-300) throw DegenerateConfiguration("view plane through camera center");
    const Eigen::Matrix3d hi = h.inverse();
    Conic out;
    out.q = hi.transpose() *
            Eigen::Vector3d(1.0, 1.0, -circle.radius * circle.radius).asDiagonal().toDenseMatrix() * hi;
    out.normalize();
    return out;
}

ViewResult generate_view(std::span<const Circle3D> circles, const RigidTransform& pose,
                         const Intrinsics& k, double sigma_px, std::mt19937_64& rng,
                         int samples_per_circle, int image_width, int image_height) {
    ViewResult out;
    std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
    std::normal_distribution<double> gauss(0.0, sigma_px > 0 ? sigma_px : 1.0);
    for (const Circle3D& c : circles) {
        const auto [b1, b2] = plane_basis(c.normal);
        std::vector<Pixel> samples;
        samples.reserve(samples_per_circle);
        for (int i = 0; i < samples_per_circle; ++i) {
            const Pixel px = project(circle_point(c, b1, b2, ua(rng)), pose, k); // throws behind camera
            if (px.x() < 0 || px.x() >= image_width || px.y() < 0 || px.y() >= image_height)
                throw DegenerateConfiguration("projected circle leaves the image");
            samples.push_back(px);
        }
        if (sigma_px > 0.0)
            for (Pixel& px : samples) px += Pixel(gauss(rng), gauss(rng));
        out.conics.push_back(fit_conic(samples));
        out.gt_centers.push_back(project(c.center, pose, k));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scene construction for the 2D studies
// ---------------------------------------------------------------------------

namespace {

struct PairScene {
    Circle3D primary;   // camera frame
    Circle3D secondary; // coplanar, non-concentric
};

/// Coplanar circle pair in front of the camera, fully visible. size_scale
/// shrinks the targets (the pose study uses many pairs per trial).
PairScene make_pair_scene(std::mt19937_64& rng, const ScenarioSpec& spec, double size_scale) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Intrinsics& k = spec.camera;
    for (int attempt = 0; attempt < 500; ++attempt) {
        PairScene s;
        const double z = 4.0 + 5.0 * u01(rng);
        const double r1 = size_scale * (0.4 + 0.4 * u01(rng));
        const double ratio = 0.5 + 0.4 * u01(rng); // r2 / r1
        const double tilt = (25.0 + 30.0 * u01(rng)) * M_PI / 180.0;

        const Pixel anchor(k.cx + (u01(rng) - 0.5) * 0.5 * spec.image_width,
                           k.cy + (u01(rng) - 0.5) * 0.5 * spec.image_height);
        const Vec3 dir = backproject_ray(anchor, k);
        s.primary.center = z * dir;
        s.primary.radius = r1;

        const auto [d1, d2] = plane_basis(dir);
        const double phi = 2.0 * M_PI * u01(rng);
        const Vec3 axis = std::cos(phi) * d1 + std::sin(phi) * d2;
        s.primary.normal = Eigen::AngleAxisd(tilt, axis) * dir;

        s.secondary.normal = s.primary.normal;
        s.secondary.radius = ratio * r1;
        const auto [e1, e2] = plane_basis(s.primary.normal);
        const double psi = 2.0 * M_PI * u01(rng);
        const Vec3 sep_dir = std::cos(psi) * e1 + std::sin(psi) * e2;
        const double gap = (0.2 + 0.4 * u01(rng)) * r1;
        s.secondary.center = s.primary.center + (r1 + s.secondary.radius + gap) * sep_dir;

        // Visibility check on noise-free boundary samples.
        bool ok = true;
        const double margin = 8.0;
        for (const Circle3D* c : {&s.primary, &s.secondary}) {
            const auto [b1, b2] = plane_basis(c->normal);
            for (int i = 0; i < 48 && ok; ++i) {
                const Vec3 p = circle_point(*c, b1, b2, 2.0 * M_PI * i / 48.0);
                if (p.z() <= 0.5) {
                    ok = false;
                    break;
                }
                const Pixel px = project(p, k);
                if (px.x() < margin || px.x() >= spec.image_width - margin || px.y() < margin ||
                    px.y() >= spec.image_height - margin)
                    ok = false;
            }
            if (!ok) break;
        }
        if (ok) return s;
    }
    throw DegenerateConfiguration("could not place a visible coplanar pair");
}

Circle3D transform_circle(const Circle3D& c, const RigidTransform& t) {
    Circle3D out;
    out.center = t.apply(c.center);
    out.normal = t.rotation * c.normal;
    out.radius = c.radius;
    return out;
}

RigidTransform random_pose(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> ut(-2.0, 2.0);
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    while (q.norm() < 1e-9) q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    q.normalize();
    RigidTransform t;
    t.rotation = q.toRotationMatrix();
    t.translation = Vec3(ut(rng), ut(rng), ut(rng));
    return t;
}

// --- per-scenario drivers ---------------------------------------------------

void run_3d_configs(const ScenarioSpec& spec, std::vector<TrialRecord>& records) {
    for (int trial = 0; trial < spec.trials; ++trial) {
        std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(trial));
        const Circle3D gt = sample_circle_gt(rng);
        std::vector<Vec3> points = sample_points(gt, spec.config, rng);
        add_noise(points, spec.sigma, rng);
        if (spec.config == Scenario::outlier_test)
            inject_outliers(points, spec.outlier_fraction, gt, rng);

        RansacConfig rc;
        rc.max_iterations = spec.ransac_iters;
        rc.inlier_threshold = spec.resolved_inlier_threshold();
        rc.seed = derived_seed(spec.seed, trial, 0xc1c1e);

        auto record = [&](const std::string& method, auto&& fit) {
            TrialRecord r;
            r.trial = trial;
            r.method = method;
            try {
                const Circle3D est = fit();
                r.e_center_m = (est.center - gt.center).norm();
                r.e_radius_m = std::abs(est.radius - gt.radius);
            } catch (const Error&) {
                r.failed = true;
            }
            records.push_back(r);
        };

        if (spec.config == Scenario::outlier_test) {
            record("cga_ransac", [&] { return ransac_fit_circle(points, rc).best_model; });
            record("decoupled_ransac", [&] { return ransac_fit_circle_decoupled(points, rc).best_model; });
        } else {
            record("cga", [&] { return fit_circle_cga(points).circle; });
            record("decoupled", [&] { return fit_circle_decoupled(points); });
            record("cga_ransac", [&] { return ransac_fit_circle(points, rc).best_model; });
            record("decoupled_ransac", [&] { return ransac_fit_circle_decoupled(points, rc).best_model; });
        }
    }
}

void run_twod_center(const ScenarioSpec& spec, std::vector<TrialRecord>& records) {
    for (int trial = 0; trial < spec.trials; ++trial) {
        std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(trial));
        const RigidTransform identity;

        auto emit = [&](const std::string& method, double err, bool failed) {
            TrialRecord r;
            r.trial = trial;
            r.method = method;
            r.e_2d_px = err;
            r.failed = failed;
            records.push_back(r);
        };

        try {
            const PairScene scene = make_pair_scene(rng, spec, 1.0);
            const std::vector<Circle3D> circles{scene.primary, scene.secondary};
            const ViewResult view =
                generate_view(circles, identity, spec.camera, spec.sigma, rng, 100, spec.image_width,
                              spec.image_height);
            const Pixel gt = view.gt_centers[0];

            try {
                emit("ellipse_center", (conic_to_params(view.conics[0]).center - gt).norm(), false);
            } catch (const Error&) {
                emit("ellipse_center", kNaN, true);
            }
            try {
                emit("center_of_mass", (center_of_mass(view.conics[0]) - gt).norm(), false);
            } catch (const Error&) {
                emit("center_of_mass", kNaN, true);
            }
            try {
                CenterSearchConfig cc;
                cc.n_dirs = spec.n_dirs;
                cc.subpixel = spec.subpixel;
                const auto pair =
                    find_center_hypotheses(view.conics[0], scene.primary.radius, spec.camera, cc);
                // Loss ranking alone picks the wrong minimum in a measurable
                // fraction of trials; reported so the disambiguation gain is
                // visible in the summary.
                emit("refined_loss_rank", (pair.c_a - gt).norm(), false);
                const Pixel sel = pair.single_minimum
                                      ? pair.c_a
                                      : disambiguate_by_ratio(pair, view.conics[0], view.conics[1],
                                                              scene.primary.radius / scene.secondary.radius);
                emit("refined", (sel - gt).norm(), false);
            } catch (const Error&) {
                emit("refined_loss_rank", kNaN, true);
                emit("refined", kNaN, true);
            }
        } catch (const Error&) {
            for (const char* m : {"ellipse_center", "center_of_mass", "refined_loss_rank", "refined"})
                emit(m, kNaN, true);
        }
    }
}

void run_pose_study(const ScenarioSpec& spec, std::vector<TrialRecord>& records) {
    for (int trial = 0; trial < spec.trials; ++trial) {
        std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(trial));
        const RigidTransform pose_gt = random_pose(rng);
        const RigidTransform world_from_cam = pose_gt.inverse();

        std::vector<Correspondence> ec_corrs, com_corrs, homog_corrs;
        std::vector<AmbiguousCorrespondence> paired_corrs;
        std::vector<Vec3> gt_points;
        std::vector<Pixel> gt_pixels;

        for (int pair_idx = 0; pair_idx < spec.pose_pairs; ++pair_idx) {
            try {
                const PairScene cam_scene = make_pair_scene(rng, spec, 0.75);
                const Circle3D primary_w = transform_circle(cam_scene.primary, world_from_cam);
                const Circle3D secondary_w = transform_circle(cam_scene.secondary, world_from_cam);
                const std::vector<Circle3D> circles{primary_w, secondary_w};
                const ViewResult view = generate_view(circles, pose_gt, spec.camera, spec.sigma, rng, 100,
                                                      spec.image_width, spec.image_height);

                const Pixel ec = conic_to_params(view.conics[0]).center;
                const Pixel com = center_of_mass(view.conics[0]);
                CenterSearchConfig cc;
                cc.n_dirs = spec.n_dirs;
                cc.subpixel = spec.subpixel;
                const auto hyp = find_center_hypotheses(view.conics[0], primary_w.radius, spec.camera, cc);
                Pixel selected = hyp.c_a;
                if (!hyp.single_minimum) {
                    try {
                        selected = disambiguate_by_ratio(hyp, view.conics[0], view.conics[1],
                                                         primary_w.radius / secondary_w.radius);
                    } catch (const DisambiguationError&) {
                    }
                }

                // Commit the pair only once every method has its observation,
                // so all solvers see the same correspondence set.
                const Vec3 p = primary_w.center;
                gt_points.push_back(p);
                gt_pixels.push_back(view.gt_centers[0]);
                ec_corrs.push_back({p, ec});
                com_corrs.push_back({p, com});
                paired_corrs.push_back({p, {hyp.c_a, hyp.c_b}});
                homog_corrs.push_back({p, selected});
            } catch (const Error&) {
                // rare degenerate pair: dropped for every method alike
            }
        }
        const bool scene_ok = static_cast<int>(gt_points.size()) >= 6;

        auto emit = [&](const std::string& method, auto&& solve) {
            TrialRecord r;
            r.trial = trial;
            r.method = method;
            if (!scene_ok) {
                r.failed = true;
                records.push_back(r);
                return;
            }
            try {
                const PoseEstimate est = solve();
                r.e_rot_rad = rotation_error(est.transform.rotation, pose_gt.rotation);
                r.e_trans_m = translation_error(est.transform.translation, pose_gt.translation);
                double sum = 0.0;
                int count = 0;
                for (std::size_t i = 0; i < gt_points.size(); ++i) {
                    const Vec3 xc = est.transform.apply(gt_points[i]);
                    if (xc.z() <= 0.0) {
                        sum = kNaN;
                        break;
                    }
                    sum += (project(xc, spec.camera) - gt_pixels[i]).norm();
                    ++count;
                }
                r.e_reproj_px = count > 0 ? sum / count : kNaN;
            } catch (const Error&) {
                r.failed = true;
            }
            records.push_back(r);
        };

        RansacConfig pc;
        pc.max_iterations = spec.ransac_iters;
        pc.inlier_threshold = spec.reproj_threshold;
        pc.seed = derived_seed(spec.seed, trial, 0x905e);

        emit("ellipse_center", [&] { return solve_pnp_ransac(ec_corrs, spec.camera, pc); });
        emit("center_of_mass", [&] { return solve_pnp_ransac(com_corrs, spec.camera, pc); });
        emit("refined_homography", [&] { return solve_pnp_ransac(homog_corrs, spec.camera, pc); });
        emit("refined_paired", [&] { return solve_pnp_paired(paired_corrs, spec.camera, pc); });
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Harness plumbing
// ---------------------------------------------------------------------------

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) {
        s.mean = s.stddev = s.median = s.iqr = kNaN;
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    s.median = quantile(values, 0.5);
    s.iqr = quantile(values, 0.75) - quantile(values, 0.25);
    return s;
}

const std::vector<std::pair<std::string, double TrialRecord::*>> kMetricColumns = {
    {"e_center_m", &TrialRecord::e_center_m}, {"e_radius_m", &TrialRecord::e_radius_m},
    {"e_2d_px", &TrialRecord::e_2d_px},       {"e_reproj_px", &TrialRecord::e_reproj_px},
    {"e_rot_rad", &TrialRecord::e_rot_rad},   {"e_trans_m", &TrialRecord::e_trans_m},
};

} // namespace

BenchResult run_benchmark(const ScenarioSpec& spec) {
    if (spec.trials < 1) throw InputError("trials must be >= 1");
    BenchResult result;
    result.spec = spec;

    switch (spec.config) {
        case Scenario::a_full:
        case Scenario::b_partial_arc:
        case Scenario::c_sparse_clusters:
        case Scenario::d_symmetric_sparse:
        case Scenario::outlier_test:
            run_3d_configs(spec, result.records);
            break;
        case Scenario::twod_center:
            run_twod_center(spec, result.records);
            break;
        case Scenario::pose_study:
            run_pose_study(spec, result.records);
            break;
    }

    for (const TrialRecord& r : result.records) {
        MethodSummary& ms = result.summary[r.method];
        ++ms.trials;
        if (r.failed) ++ms.failures;
    }
    for (auto& [method, ms] : result.summary) {
        for (const auto& [name, member] : kMetricColumns) {
            std::vector<double> values;
            for (const TrialRecord& r : result.records) {
                if (r.method != method || r.failed) continue;
                const double v = r.*member;
                if (!std::isnan(v)) values.push_back(v);
            }
            if (!values.empty()) ms.metrics[name] = stats_of(values);
        }
    }
    return result;
}

void write_records_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "trial,method,e_center_m,e_radius_m,e_2d_px,e_reproj_px,e_rot_rad,e_trans_m,failed\n";
    char buf[64];
    auto fmt = [&](double v) -> std::string {
        if (std::isnan(v)) return "nan";
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    };
    for (const TrialRecord& r : records) {
        out << r.trial << ',' << r.method << ',' << fmt(r.e_center_m) << ',' << fmt(r.e_radius_m) << ','
            << fmt(r.e_2d_px) << ',' << fmt(r.e_reproj_px) << ',' << fmt(r.e_rot_rad) << ','
            << fmt(r.e_trans_m) << ',' << (r.failed ? 1 : 0) << '\n';
    }
}

void write_summary_json(const BenchResult& result, const std::string& path) {
    nlohmann::json j;
    j["scenario"] = scenario_name(result.spec.config);
    j["trials"] = result.spec.trials;
    j["sigma"] = result.spec.sigma;
    j["seed"] = result.spec.seed;
    if (result.spec.config == Scenario::outlier_test)
        j["outlier_fraction"] = result.spec.outlier_fraction;

    nlohmann::json methods = nlohmann::json::object();
    for (const auto& [name, ms] : result.summary) {
        nlohmann::json m;
        m["trials"] = ms.trials;
        m["failures"] = ms.failures;
        for (const auto& [metric, st] : ms.metrics) {
            m[metric] = {{"mean", st.mean},
                         {"std", st.stddev},
                         {"median", st.median},
                         {"iqr", st.iqr},
                         {"count", st.count}};
        }
        methods[name] = m;
    }
    j["methods"] = methods;

    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

} // namespace circal
