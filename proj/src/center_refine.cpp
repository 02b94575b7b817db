#include "circal/center_refine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace circal {

namespace {

struct ChordAngles {
    double theta1;
    double theta2;
};

ChordAngles chord_angles(const Conic& conic, const Pixel& candidate, double gamma, const Intrinsics& k) {
    const auto [a, b] = line_conic_intersect(conic, candidate, gamma);
    const Vec3 ra = backproject_ray(a, k);
    const Vec3 rb = backproject_ray(b, k);
    const Vec3 rc = backproject_ray(candidate, k);
    const double t1 = std::acos(std::clamp(ra.dot(rc), -1.0, 1.0));
    const double t2 = std::acos(std::clamp(rb.dot(rc), -1.0, 1.0));
    return {t1, t2};
}

double chord_distance_from_angles(const ChordAngles& ang, double radius) {
    const double t1 = ang.theta1, t2 = ang.theta2;
    // Grazing chords: when an endpoint ray nearly coincides with the candidate
    // ray the triangle collapses and the recovered distance pins to the radius
    // regardless of the candidate. Drop such directions.
    if (t1 < 1e-3 || t2 < 1e-3) throw DegenerateChord();
    const double den2 = 3.0 - 2.0 * std::cos(2.0 * t1) - 2.0 * std::cos(2.0 * t2) + std::cos(2.0 * (t1 + t2));
    if (den2 < 1e-12) throw DegenerateChord();
    const double d = std::sqrt(2.0) * radius * std::sin(t1 + t2) / std::sqrt(den2);
    if (!(d > 0.0) || !std::isfinite(d)) throw DegenerateChord();
    return d;
}

/// Mean/variance of chord distances over the direction fan; directions whose
/// chord degenerates are dropped.
struct ChordStats {
    double mean = 0.0;
    double variance = 0.0;
    int valid = 0;
};

ChordStats chord_stats(const Conic& conic, const Pixel& candidate, double radius, const Intrinsics& k,
                       int n_dirs) {
    std::vector<double> ds;
    ds.reserve(n_dirs);
    for (int i = 0; i < n_dirs; ++i) {
        const double gamma = i * M_PI / n_dirs;
        try {
            ds.push_back(chord_distance_from_angles(chord_angles(conic, candidate, gamma, k), radius));
        } catch (const EstimationError&) {
        }
    }
    ChordStats st;
    st.valid = static_cast<int>(ds.size());
    if (st.valid == 0) return st;
    double sum = 0.0;
    for (double d : ds) sum += d;
    st.mean = sum / st.valid;
    double var = 0.0;
    for (double d : ds) var += (d - st.mean) * (d - st.mean);
    st.variance = var / st.valid;
    return st;
}

} // namespace

double chord_distance(const Conic& conic, const Pixel& candidate, double gamma, double radius,
                      const Intrinsics& k) {
    return chord_distance_from_angles(chord_angles(conic, candidate, gamma, k), radius);
}

double chord_loss(const Conic& conic, const Pixel& candidate, double radius, const Intrinsics& k,
                  int n_dirs) {
    const ChordStats st = chord_stats(conic, candidate, radius, k, n_dirs);
    if (st.valid < 2) throw DegenerateChord();
    return st.variance;
}

double chord_loss_normalized(const Conic& conic, const Pixel& candidate, const Intrinsics& k,
                             int n_dirs) {
    const ChordStats st = chord_stats(conic, candidate, 1.0, k, n_dirs);
    if (st.valid < 2 || st.mean <= 0.0) throw DegenerateChord();
    return st.variance / (st.mean * st.mean);
}

ChordLossField build_chord_loss_field(const Conic& conic, std::optional<double> radius,
                                      const Intrinsics& k, const CenterSearchConfig& cfg) {
    const EllipseParams par = conic_to_params(conic);
    const double ct = std::cos(par.theta), st = std::sin(par.theta);
    const double a = par.semi_major, b = par.semi_minor;
    const double ex = std::sqrt(a * a * ct * ct + b * b * st * st);
    const double ey = std::sqrt(a * a * st * st + b * b * ct * ct);
    const double step = cfg.grid_step;

    const double x0 = std::ceil((par.center.x() - ex) / step) * step;
    const double y0 = std::ceil((par.center.y() - ey) / step) * step;
    const int cols = static_cast<int>(std::floor((par.center.x() + ex - x0) / step)) + 1;
    const int rows = static_cast<int>(std::floor((par.center.y() + ey - y0) / step)) + 1;

    ChordLossField field;
    field.origin = Pixel(x0, y0);
    field.step = step;
    field.n_dirs = cfg.n_dirs;
    field.values = Eigen::MatrixXd::Constant(std::max(rows, 0), std::max(cols, 0),
                                             std::numeric_limits<double>::quiet_NaN());

    // The loss degenerates in a thin layer along the boundary (all recovered
    // distances pin to the radius there), so the grid keeps a pixel margin
    // inside the ellipse.
    const double margin_frac = std::min(0.5, cfg.boundary_margin_px / b);
    const double rho_max = 1.0 - margin_frac;
    const int min_valid = cfg.min_valid_dirs > 0 ? std::min(cfg.min_valid_dirs, cfg.n_dirs) : cfg.n_dirs;

    const double r = radius.value_or(1.0);
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const Pixel p = field.pixel_at(row, col);
            const double dx = p.x() - par.center.x(), dy = p.y() - par.center.y();
            const double xc = (ct * dx + st * dy) / a;
            const double yc = (-st * dx + ct * dy) / b;
            if (xc * xc + yc * yc > rho_max * rho_max) continue;
            if (conic.evaluate(p) >= 0.0) continue;
            const ChordStats stc = chord_stats(conic, p, r, k, cfg.n_dirs);
            if (stc.valid < min_valid) continue;
            field.values(row, col) =
                radius ? stc.variance : stc.variance / std::max(stc.mean * stc.mean, 1e-300);
        }
    }
    return field;
}

namespace {

struct Minimum {
    double value;
    int row;
    int col;
};

std::vector<Minimum> nms_minima(const ChordLossField& field, double radius_px) {
    const int rows = static_cast<int>(field.values.rows());
    const int cols = static_cast<int>(field.values.cols());
    const int rad = std::max(1, static_cast<int>(std::round(radius_px / field.step)));
    std::vector<Minimum> out;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = field.values(r, c);
            if (std::isnan(v)) continue;
            // A genuine minimum needs a complete neighborhood: cells at the
            // valid-region rim sit on the cut slope of the boundary valley and
            // would otherwise masquerade as minima.
            bool is_min = true;
            for (int dr = -rad; dr <= rad && is_min; ++dr) {
                for (int dc = -rad; dc <= rad && is_min; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    if (dr * dr + dc * dc > rad * rad) continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) {
                        is_min = false;
                        break;
                    }
                    const double w = field.values(rr, cc);
                    if (std::isnan(w)) {
                        is_min = false;
                        break;
                    }
                    if (w < v) is_min = false;
                    // Plateau tie: keep only the lexicographically first cell.
                    if (w == v && (rr < r || (rr == r && cc < c))) is_min = false;
                }
            }
            if (is_min) out.push_back({v, r, c});
        }
    }
    std::sort(out.begin(), out.end(), [](const Minimum& a, const Minimum& b) { return a.value < b.value; });
    return out;
}

/// 1D quadratic peak interpolation along each axis, clamped to +-0.5 cells.
Pixel subpixel_refine(const ChordLossField& field, int row, int col) {
    auto axis_offset = [&](int r0, int c0, int dr, int dc) {
        const int rows = static_cast<int>(field.values.rows());
        const int cols = static_cast<int>(field.values.cols());
        const int rm = r0 - dr, cm = c0 - dc, rp = r0 + dr, cp = c0 + dc;
        if (rm < 0 || cm < 0 || rp >= rows || cp >= cols) return 0.0;
        const double fm = field.values(rm, cm), f0 = field.values(r0, c0), fp = field.values(rp, cp);
        if (std::isnan(fm) || std::isnan(fp)) return 0.0;
        const double den = fm - 2.0 * f0 + fp;
        if (den <= 0.0) return 0.0;
        return std::clamp(0.5 * (fm - fp) / den, -0.5, 0.5);
    };
    const double ox = axis_offset(row, col, 0, 1);
    const double oy = axis_offset(row, col, 1, 0);
    return field.pixel_at(row, col) + field.step * Pixel(ox, oy);
}

} // namespace

CenterHypothesisPair find_center_hypotheses(const Conic& conic, std::optional<double> radius,
                                            const Intrinsics& k, const CenterSearchConfig& cfg) {
    const EllipseParams par = conic_to_params(conic);
    const double nms_radius =
        cfg.nms_radius > 0.0 ? cfg.nms_radius : std::max(3.0, 0.1 * par.semi_minor);

    const ChordLossField field = build_chord_loss_field(conic, radius, k, cfg);
    std::vector<Minimum> minima = nms_minima(field, nms_radius);
    if (minima.empty()) {
        // Valid region too small for a complete neighborhood (tiny ellipse):
        // fall back to the global minimum cell.
        Minimum best{std::numeric_limits<double>::infinity(), -1, -1};
        for (int r = 0; r < field.values.rows(); ++r)
            for (int c = 0; c < field.values.cols(); ++c)
                if (!std::isnan(field.values(r, c)) && field.values(r, c) < best.value)
                    best = {field.values(r, c), r, c};
        if (best.row < 0) throw DegenerateChord();
        minima.push_back(best);
    }

    const double r = radius.value_or(1.0);
    auto make_entry = [&](const Minimum& m, Pixel& px, double& loss, double& dist) {
        px = cfg.subpixel ? subpixel_refine(field, m.row, m.col) : field.pixel_at(m.row, m.col);
        loss = m.value;
        dist = chord_stats(conic, px, r, k, cfg.n_dirs).mean;
    };

    CenterHypothesisPair pair;
    make_entry(minima[0], pair.c_a, pair.loss_a, pair.distance_a);
    if (minima.size() >= 2) {
        make_entry(minima[1], pair.c_b, pair.loss_b, pair.distance_b);
    } else {
        pair.c_b = pair.c_a;
        pair.loss_b = pair.loss_a;
        pair.distance_b = pair.distance_a;
        pair.single_minimum = true;
    }
    return pair;
}

RectifyingHomography build_rectifying_homography(const Conic& conic, const Pixel& candidate) {
    if (conic.evaluate(candidate) >= 0.0) throw InvalidCandidate();
    const EllipseParams par = conic_to_params(conic);

    const double ct = std::cos(par.theta), st = std::sin(par.theta);
    Eigen::Matrix3d a1, a2;
    a1 << ct, st, 0, -st, ct, 0, 0, 0, 1;
    a2 << 1, 0, -par.center.x(), 0, 1, -par.center.y(), 0, 0, 1;
    const Eigen::Matrix3d pre = a1 * a2;

    const Eigen::Matrix3d pre_inv = pre.inverse();
    Eigen::Matrix3d qp = pre_inv.transpose() * conic.q * pre_inv;
    qp /= -qp(2, 2); // Q'33 = -1
    const double q11 = qp(0, 0), q22 = qp(1, 1), q33 = -1.0;

    const Eigen::Vector3d cp = pre * Eigen::Vector3d(candidate.x(), candidate.y(), 1.0);
    const double cx = cp.x() / cp.z(), cy = cp.y() / cp.z();

    const double den = q11 * cx * cx + q33;        // < 0 strictly inside
    const double val = den + q22 * cy * cy;        // conic value at the candidate, < 0
    const double a = -q22 * cx * cy / den;
    const double b2 = q22 * q33 * val / (q11 * den * den);
    if (!(b2 > 0.0) || !std::isfinite(b2)) throw InvalidCandidate();
    const double b = std::sqrt(b2);

    const double x = (-cx / b + cy * a / b) / val;
    const double y = -cy / val;

    Eigen::Matrix3d hp, ha, he;
    hp << 1, 0, 0, 0, 1, 0, q11 * cx, q22 * cy, q33;
    ha << 1.0 / b, -a / b, 0, 0, 1, 0, 0, 0, 1;
    he << 1, 0, x, 0, 1, y, 0, 0, 1;

    RectifyingHomography out;
    out.h = he * ha * hp;
    out.pre = pre;
    out.candidate = candidate;
    return out;
}

Conic transform_conic(const Conic& conic, const Eigen::Matrix3d& point_map) {
    const Eigen::Matrix3d inv = point_map.inverse();
    Conic out;
    out.q = inv.transpose() * conic.q * inv;
    out.normalize();
    return out;
}

double rectified_radius(const Conic& conic, const RectifyingHomography& h) {
    const EllipseParams par = conic_to_params(transform_conic(conic, h.full()));
    return std::sqrt(par.semi_major * par.semi_minor);
}

Pixel disambiguate_by_ratio(const CenterHypothesisPair& pair, const Conic& conic_primary,
                            const Conic& conic_secondary, double physical_ratio) {
    if (!(physical_ratio > 0.0)) throw InputError("physical radius ratio must be positive");
    if (pair.single_minimum) return pair.c_a;

    double best_dev = std::numeric_limits<double>::infinity();
    Pixel best = Pixel::Zero();
    bool any = false;
    for (const Pixel& cand : {pair.c_a, pair.c_b}) {
        try {
            const RectifyingHomography h = build_rectifying_homography(conic_primary, cand);
            const double ratio = rectified_radius(conic_primary, h) / rectified_radius(conic_secondary, h);
            const double dev = std::abs(ratio - physical_ratio);
            if (dev < best_dev) {
                best_dev = dev;
                best = cand;
                any = true;
            }
        } catch (const EstimationError&) {
        }
    }
    if (!any) throw DisambiguationFailed();
    return best;
}

} // namespace circal
