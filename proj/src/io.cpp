#include "circal/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace circal {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

Eigen::Matrix4d matrix4_from_json(const json& jt, const std::string& path) {
    Eigen::Matrix4d m;
    try {
        if (jt.size() == 16 && !jt[0].is_array()) {
            for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = jt[i].get<double>();
        } else {
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) m(r, c) = jt.at(r).at(c).get<double>();
        }
    } catch (const json::exception& e) {
        throw InputError("bad 4x4 matrix in " + path + ": " + e.what());
    }
    return m;
}

} // namespace

Intrinsics load_intrinsics(const std::string& path) {
    const json j = load_json(path);
    try {
        Intrinsics k{j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                     j.at("cy").get<double>()};
        if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw InputError("intrinsics: fx, fy must be positive");
        return k;
    } catch (const json::exception& e) {
        throw InputError("bad intrinsics in " + path + ": " + e.what());
    }
}

void save_intrinsics(const Intrinsics& k, const std::string& path) {
    save_json(json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}}, path);
}

RigidTransform load_transform(const std::string& path) {
    const json j = load_json(path);
    if (!j.contains("T")) throw InputError("missing key \"T\" in " + path);
    const Eigen::Matrix4d m = matrix4_from_json(j["T"], path);
    RigidTransform t = RigidTransform::from_matrix(m);
    const double ortho = (t.rotation.transpose() * t.rotation - Eigen::Matrix3d::Identity()).norm();
    if (ortho > 1e-6 || std::abs(t.rotation.determinant() - 1.0) > 1e-6)
        throw InputError("rotation block is not a proper rotation in " + path);
    t.reorthonormalize();
    return t;
}

namespace {

json matrix4_to_json(const Eigen::Matrix4d& m) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

void save_transform(const RigidTransform& t, const std::string& path) {
    save_json(json{{"T", matrix4_to_json(t.matrix())}}, path);
}

Conic load_ellipse(const std::string& path) {
    const json j = load_json(path);
    try {
        Conic c;
        if (j.contains("Q")) {
            for (int r = 0; r < 3; ++r)
                for (int col = 0; col < 3; ++col) c.q(r, col) = j["Q"].at(r).at(col).get<double>();
        } else {
            EllipseParams p;
            p.center = Pixel(j.at("cx").get<double>(), j.at("cy").get<double>());
            p.semi_major = j.at("a").get<double>();
            p.semi_minor = j.at("b").get<double>();
            p.theta = j.at("theta").get<double>();
            if (p.semi_minor > p.semi_major) {
                std::swap(p.semi_major, p.semi_minor);
                p.theta += M_PI / 2.0;
            }
            return params_to_conic(p);
        }
        c.normalize();
        return c;
    } catch (const json::exception& e) {
        throw InputError("bad ellipse in " + path + ": " + e.what());
    } catch (const NotAnEllipse& e) {
        throw InputError(std::string(e.what()) + " in " + path);
    }
}

void save_ellipse_conic(const Conic& c, const std::string& path) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int col = 0; col < 3; ++col) row.push_back(c.q(r, col));
        rows.push_back(row);
    }
    save_json(json{{"Q", rows}}, path);
}

void save_ellipse_params(const EllipseParams& p, const std::string& path) {
    save_json(json{{"cx", p.center.x()},
                   {"cy", p.center.y()},
                   {"a", p.semi_major},
                   {"b", p.semi_minor},
                   {"theta", p.theta}},
              path);
}

namespace {

std::vector<Vec3> load_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::string line;
    std::vector<Vec3> points;
    bool header_checked = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!header_checked) {
            header_checked = true;
            if (line.find("x") != std::string::npos && !std::isdigit(line[0]) && line[0] != '-') continue;
        }
        std::stringstream ss(line);
        std::string cell;
        Vec3 p;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, cell, ',')) throw InputError("short row in " + path + ": " + line);
            try {
                p(i) = std::stod(cell);
            } catch (const std::exception&) {
                throw InputError("bad number in " + path + ": " + cell);
            }
        }
        points.push_back(p);
    }
    if (points.empty()) throw InputError("no points in " + path);
    return points;
}

std::vector<Vec3> load_cloud_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") throw InputError("not a PLY file: " + path);
    long vertex_count = -1;
    int props = 0, xi = -1, yi = -1, zi = -1;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            ss >> tok;
            ascii = tok == "ascii";
        } else if (tok == "element") {
            ss >> tok;
            if (tok == "vertex") ss >> vertex_count;
        } else if (tok == "property" && vertex_count >= 0) {
            std::string type, name;
            ss >> type >> name;
            if (name == "x") xi = props;
            if (name == "y") yi = props;
            if (name == "z") zi = props;
            ++props;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii) throw InputError("only ASCII PLY is supported: " + path);
    if (vertex_count <= 0 || xi < 0 || yi < 0 || zi < 0)
        throw InputError("PLY header lacks vertex x/y/z: " + path);
    std::vector<Vec3> points;
    points.reserve(vertex_count);
    for (long i = 0; i < vertex_count; ++i) {
        if (!std::getline(in, line)) throw InputError("truncated PLY: " + path);
        std::stringstream ss(line);
        std::vector<double> vals(props, 0.0);
        for (int pidx = 0; pidx < props; ++pidx)
            if (!(ss >> vals[pidx])) throw InputError("bad PLY vertex row: " + line);
        points.emplace_back(vals[xi], vals[yi], vals[zi]);
    }
    if (points.empty()) throw InputError("no points in " + path);
    return points;
}

} // namespace

std::vector<Vec3> load_cloud(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".ply") return load_cloud_ply(path);
    return load_cloud_csv(path);
}

void save_cloud_csv(const std::vector<Vec3>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << "x,y,z\n";
    char buf[96];
    for (const Vec3& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
}

void save_extrinsics(const ExtrinsicsReport& report, const std::string& path) {
    json j;
    j["T"] = matrix4_to_json(report.transform.matrix());
    j["mean_reproj_px"] = report.mean_reproj_px;
    j["inliers"] = report.inliers;
    if (!report.used.empty()) {
        json rows = json::array();
        for (std::size_t i = 0; i < report.used.size(); ++i) {
            const auto& c = report.used[i];
            rows.push_back({{"p3d", {c.p3d.x(), c.p3d.y(), c.p3d.z()}},
                            {"q2d", {c.q2d.x(), c.q2d.y()}},
                            {"reproj_px", report.reproj_px[i]}});
        }
        j["correspondences"] = rows;
    }
    save_json(j, path);
}

CalibrationJob load_job(const std::string& path) {
    const json j = load_json(path);
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    CalibrationJob job;
    try {
        job.intrinsics_path = resolve(j.at("intrinsics").get<std::string>());
        for (const auto& jf : j.at("frames")) {
            CalibrationFrame f;
            f.cloud_path = resolve(jf.at("cloud").get<std::string>());
            f.ellipse_path = resolve(jf.at("ellipse").get<std::string>());
            f.radius = jf.at("radius").get<double>();
            if (!(f.radius > 0.0)) throw InputError("frame radius must be positive");
            if (jf.contains("second_ellipse")) {
                f.second_ellipse_path = resolve(jf["second_ellipse"].get<std::string>());
                f.coplanar = jf.value("coplanar", true);
            }
            if (jf.contains("ratio")) f.radius_ratio = jf["ratio"].get<double>();
            else if (jf.contains("second_radius"))
                f.radius_ratio = f.radius / jf["second_radius"].get<double>();
            job.frames.push_back(f);
        }
        const json opts = j.value("options", json::object());
        job.mode = opts.value("mode", "auto");
        if (job.mode != "auto" && job.mode != "homography" && job.mode != "paired")
            throw InputError("unknown mode: " + job.mode);
        job.circle_ransac.max_iterations = opts.value("ransac_iters", 1000);
        job.circle_ransac.inlier_threshold = opts.value("inlier_thresh", 0.0025);
        job.circle_ransac.seed = opts.value("seed", 0);
        job.reproj_threshold = opts.value("reproj_thresh", 10.0);
        job.n_dirs = opts.value("n_dirs", 36);
        job.subpixel = opts.value("subpixel", false);
    } catch (const json::exception& e) {
        throw InputError("bad job file " + path + ": " + e.what());
    }
    return job;
}

} // namespace circal
