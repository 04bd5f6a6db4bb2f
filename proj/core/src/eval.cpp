#include "plenopose/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/jsonio.hpp"
#include "plenopose/losses.hpp"
#include "plenopose/parallel.hpp"
#include "plenopose/pose.hpp"

using json = nlohmann::json;

namespace plenopose {

namespace {

std::vector<Eigen::Vector3d> transform_points(const ObjectModel& model,
                                              const Pose& pose) {
    const Eigen::Matrix3d R = pose.rotation.toRotationMatrix();
    std::vector<Eigen::Vector3d> out;
    out.reserve(model.points.size());
    for (const auto& p : model.points) out.push_back(R * p + pose.translation);
    return out;
}

double squared_dist(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

// Uniform-grid nearest-neighbor index over a fixed point set. Queries return
// the exact minimum squared distance, identical to a brute-force scan.
class GridIndex {
  public:
    explicit GridIndex(const std::vector<Eigen::Vector3d>& points)
        : points_(points) {
        lo_ = points[0];
        Eigen::Vector3d hi = points[0];
        for (const auto& p : points) {
            lo_ = lo_.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const double diag = (hi - lo_).norm();
        cell_ = std::max(diag / std::cbrt(static_cast<double>(points.size())),
                         1e-12);
        for (int a = 0; a < 3; ++a)
            dims_[a] = static_cast<long long>(
                           std::floor((hi[a] - lo_[a]) / cell_)) +
                       1;
        for (std::size_t i = 0; i < points.size(); ++i)
            cells_[key_of(cell_coords(points[i]))].push_back(
                static_cast<int>(i));
    }

    double min_squared_dist(const Eigen::Vector3d& q) const {
        const std::array<long long, 3> c0 = cell_coords(q);
        double best = std::numeric_limits<double>::infinity();
        const long long max_ring =
            std::max({dims_[0], dims_[1], dims_[2]}) +
            std::max({std::abs(c0[0]), std::abs(c0[1]), std::abs(c0[2])}) + 1;
        for (long long r = 0; r <= max_ring; ++r) {
            // Cells at Chebyshev ring >= r+1 hold points at distance at least
            // r*cell from anywhere in the query's cell.
            if (best < std::numeric_limits<double>::infinity() &&
                static_cast<double>(r) * cell_ >= std::sqrt(best))
                break;
            scan_ring(c0, r, q, &best);
        }
        return best;
    }

  private:
    std::array<long long, 3> cell_coords(const Eigen::Vector3d& p) const {
        std::array<long long, 3> c;
        for (int a = 0; a < 3; ++a)
            c[a] = static_cast<long long>(std::floor((p[a] - lo_[a]) / cell_));
        return c;
    }

    bool in_bounds(const std::array<long long, 3>& c) const {
        for (int a = 0; a < 3; ++a)
            if (c[a] < 0 || c[a] >= dims_[a]) return false;
        return true;
    }

    static std::uint64_t key_of(const std::array<long long, 3>& c) {
        return (static_cast<std::uint64_t>(c[0]) << 42) ^
               (static_cast<std::uint64_t>(c[1]) << 21) ^
               static_cast<std::uint64_t>(c[2]);
    }

    void visit_cell(const std::array<long long, 3>& c,
                    const Eigen::Vector3d& q, double* best) const {
        if (!in_bounds(c)) return;
        const auto it = cells_.find(key_of(c));
        if (it == cells_.end()) return;
        for (int idx : it->second)
            *best = std::min(
                *best, squared_dist(q, points_[static_cast<std::size_t>(idx)]));
    }

    void scan_ring(const std::array<long long, 3>& c0, long long r,
                   const Eigen::Vector3d& q, double* best) const {
        if (r == 0) {
            visit_cell(c0, q, best);
            return;
        }
        for (long long dz = -r; dz <= r; ++dz)
            for (long long dy = -r; dy <= r; ++dy)
                for (long long dx = -r; dx <= r; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) !=
                        r)
                        continue;
                    visit_cell({c0[0] + dx, c0[1] + dy, c0[2] + dz}, q, best);
                }
    }

    const std::vector<Eigen::Vector3d>& points_;
    Eigen::Vector3d lo_;
    double cell_ = 1.0;
    std::array<long long, 3> dims_{1, 1, 1};
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

double add_s_impl(const ObjectModel& model, const Pose& est, const Pose& gt,
                  bool force_brute) {
    model.validate();
    est.validate();
    gt.validate();
    if (model.points.empty()) throw DomainError("add_s: empty model");
    const std::vector<Eigen::Vector3d> xs = transform_points(model, est);
    const std::vector<Eigen::Vector3d> ys = transform_points(model, gt);
    std::vector<double> dist(xs.size(), 0.0);
    if (force_brute ||
        static_cast<int>(xs.size()) <= kAddSBruteForceLimit) {
        parallel_for(xs.size(), [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : ys)
                best = std::min(best, squared_dist(xs[i], y));
            dist[i] = std::sqrt(best);
        });
    } else {
        const GridIndex index(ys);
        parallel_for(xs.size(), [&](std::size_t i) {
            dist[i] = std::sqrt(index.min_squared_dist(xs[i]));
        });
    }
    return mean_of(dist);
}

}  // namespace

double add_s(const ObjectModel& model, const Pose& est, const Pose& gt) {
    return add_s_impl(model, est, gt, false);
}

double add_s_brute(const ObjectModel& model, const Pose& est, const Pose& gt) {
    return add_s_impl(model, est, gt, true);
}

std::vector<CurvePoint> accuracy_curve(const std::vector<double>& errors,
                                       double max_threshold) {
    if (errors.empty()) throw DomainError("accuracy_curve: no errors given");
    if (!(max_threshold > 0.0))
        throw ValidationError("accuracy_curve: max_threshold must be > 0");
    for (double e : errors)
        if (!(e >= 0.0) || !std::isfinite(e))
            throw ValidationError(
                "accuracy_curve: errors must be finite and >= 0");
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    std::vector<double> thresholds;
    thresholds.push_back(0.0);
    for (double e : sorted)
        if (e > 0.0 && e <= max_threshold &&
            (thresholds.empty() || e != thresholds.back()))
            thresholds.push_back(e);
    if (thresholds.back() != max_threshold)
        thresholds.push_back(max_threshold);

    std::vector<CurvePoint> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) -
                           sorted.begin();
        curve.push_back({t, static_cast<double>(count) / n});
    }
    return curve;
}

double auc(const std::vector<CurvePoint>& curve) {
    if (curve.size() < 2)
        throw DomainError("auc: need at least two curve samples");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve[i].accuracy >= 0.0 && curve[i].accuracy <= 1.0))
            throw ValidationError("auc: accuracy outside [0,1]");
        if (i > 0 && !(curve[i].threshold > curve[i - 1].threshold))
            throw ValidationError("auc: thresholds must strictly increase");
        if (i > 0 && curve[i].accuracy < curve[i - 1].accuracy)
            throw ValidationError("auc: accuracy must be non-decreasing");
    }
    const double span = curve.back().threshold - curve.front().threshold;
    double integral = 0.0;
    // The curve is right-continuous: accuracy at sample i holds on
    // [threshold_i, threshold_{i+1}).
    for (std::size_t i = 0; i + 1 < curve.size(); ++i)
        integral +=
            curve[i].accuracy * (curve[i + 1].threshold - curve[i].threshold);
    return integral / span;
}

double default_boundary_tolerance(int height, int width) {
    return 0.0075 * std::hypot(static_cast<double>(height),
                               static_cast<double>(width));
}

namespace {

struct PixelList {
    std::vector<int> xs, ys;  // scan order, ys non-decreasing
};

PixelList boundary_pixels(const Mask& mask) {
    const Mask b = boundary(mask, 1);
    PixelList out;
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x)
            if (b.at(y, x)) {
                out.xs.push_back(x);
                out.ys.push_back(y);
            }
    return out;
}

// Fraction of pixels in `from` lying within Euclidean distance tol of some
// pixel in `to`; 0 when `from` is empty.
double matched_fraction(const PixelList& from, const PixelList& to,
                        double tol) {
    if (from.xs.empty()) return 0.0;
    if (to.xs.empty()) return 0.0;
    const double tol2 = tol * tol;
    const int window = static_cast<int>(std::floor(tol));
    std::size_t matched = 0;
    for (std::size_t i = 0; i < from.xs.size(); ++i) {
        const int x = from.xs[i], y = from.ys[i];
        const auto lo = std::lower_bound(to.ys.begin(), to.ys.end(),
                                         y - window) -
                        to.ys.begin();
        bool hit = false;
        for (std::size_t j = static_cast<std::size_t>(lo);
             j < to.ys.size() && to.ys[j] <= y + window; ++j) {
            const double dx = to.xs[j] - x, dy = to.ys[j] - y;
            if (dx * dx + dy * dy <= tol2) {
                hit = true;
                break;
            }
        }
        matched += hit;
    }
    return static_cast<double>(matched) / static_cast<double>(from.xs.size());
}

}  // namespace

SegScores seg_metrics(const ClassMap& pred, const ClassMap& gt) {
    return seg_metrics(pred, gt,
                       default_boundary_tolerance(gt.height, gt.width));
}

SegScores seg_metrics(const ClassMap& pred, const ClassMap& gt,
                      double boundary_tolerance_px) {
    if (!pred.same_shape(gt)) throw ShapeError("seg_metrics: dims differ");
    if (pred.labels.empty()) throw DomainError("seg_metrics: empty maps");
    if (!(boundary_tolerance_px > 0.0))
        throw ValidationError("seg_metrics: tolerance must be > 0");

    const int K = kNumSegClasses;
    std::vector<std::size_t> conf(static_cast<std::size_t>(K) * K, 0);
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
        const int g = gt.labels[i], p = pred.labels[i];
        if (g >= K || p >= K)
            throw ValidationError("seg_metrics: label outside class range");
        ++conf[static_cast<std::size_t>(g) * K + p];
    }
    std::vector<std::size_t> gt_count(K, 0), pred_count(K, 0), tp(K, 0);
    for (int g = 0; g < K; ++g)
        for (int p = 0; p < K; ++p) {
            const std::size_t c = conf[static_cast<std::size_t>(g) * K + p];
            gt_count[g] += c;
            pred_count[p] += c;
            if (g == p) tp[g] += c;
        }
    const double total = static_cast<double>(gt.labels.size());

    SegScores out;
    std::size_t correct = 0;
    for (int k = 0; k < K; ++k) correct += tp[k];
    out.g_acc = static_cast<double>(correct) / total;

    double acc_sum = 0.0, iou_sum = 0.0, wiou_sum = 0.0, bfs_sum = 0.0;
    int acc_n = 0, iou_n = 0, bfs_n = 0;
    for (int k = 0; k < K; ++k) {
        const std::size_t uni = gt_count[k] + pred_count[k] - tp[k];
        if (gt_count[k] > 0) {
            acc_sum += static_cast<double>(tp[k]) /
                       static_cast<double>(gt_count[k]);
            ++acc_n;
        }
        if (uni > 0) {
            const double iou =
                static_cast<double>(tp[k]) / static_cast<double>(uni);
            iou_sum += iou;
            ++iou_n;
            wiou_sum += static_cast<double>(gt_count[k]) * iou;

            const PixelList bp = boundary_pixels(
                pred.class_mask(static_cast<std::uint8_t>(k)));
            const PixelList bg = boundary_pixels(
                gt.class_mask(static_cast<std::uint8_t>(k)));
            const double precision =
                matched_fraction(bp, bg, boundary_tolerance_px);
            const double recall =
                matched_fraction(bg, bp, boundary_tolerance_px);
            const double f1 = (precision + recall > 0.0)
                                  ? 2.0 * precision * recall /
                                        (precision + recall)
                                  : 0.0;
            bfs_sum += f1;
            ++bfs_n;
        }
    }
    out.m_acc = acc_n > 0 ? acc_sum / acc_n : 0.0;
    out.m_iou = iou_n > 0 ? iou_sum / iou_n : 0.0;
    out.w_iou = wiou_sum / total;
    out.m_bfs = bfs_n > 0 ? bfs_sum / bfs_n : 0.0;
    return out;
}

void MetricsReport::validate() const {
    for (const auto& [label, v] : add_s_m)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("MetricsReport: ADD-S for '" + label +
                                  "' must be finite and >= 0");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve[i].accuracy >= 0.0 && curve[i].accuracy <= 1.0))
            throw ValidationError("MetricsReport: accuracy outside [0,1]");
        if (i > 0 && !(curve[i].threshold > curve[i - 1].threshold))
            throw ValidationError(
                "MetricsReport: curve thresholds must strictly increase");
        if (i > 0 && curve[i].accuracy < curve[i - 1].accuracy)
            throw ValidationError(
                "MetricsReport: curve accuracy must be non-decreasing");
    }
    if (!(auc >= 0.0 && auc <= 1.0))
        throw ValidationError("MetricsReport: auc outside [0,1]");
    if (has_segmentation) {
        for (double v : {segmentation.g_acc, segmentation.m_acc,
                         segmentation.m_iou, segmentation.w_iou,
                         segmentation.m_bfs})
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError(
                    "MetricsReport: segmentation score outside [0,1]");
    }
}

namespace {

json seg_scores_to_json(const SegScores& s) {
    return json{{"g_acc", s.g_acc},
                {"m_acc", s.m_acc},
                {"m_iou", s.m_iou},
                {"w_iou", s.w_iou},
                {"m_bfs", s.m_bfs}};
}

SegScores seg_scores_from_json(const json& doc) {
    require_known_keys(doc, {"g_acc", "m_acc", "m_iou", "w_iou", "m_bfs"},
                       "segmentation scores");
    SegScores s;
    try {
        s.g_acc = doc.at("g_acc").get<double>();
        s.m_acc = doc.at("m_acc").get<double>();
        s.m_iou = doc.at("m_iou").get<double>();
        s.w_iou = doc.at("w_iou").get<double>();
        s.m_bfs = doc.at("m_bfs").get<double>();
    } catch (const json::exception& e) {
        throw ParseError("segmentation scores: " + std::string(e.what()));
    }
    return s;
}

}  // namespace

void store_report(const MetricsReport& report,
                  const std::filesystem::path& path) {
    report.validate();
    json doc;
    doc["add_s_m"] = json::object();
    for (const auto& [label, v] : report.add_s_m) doc["add_s_m"][label] = v;
    doc["curve"] = json::array();
    for (const CurvePoint& p : report.curve)
        doc["curve"].push_back(
            {{"threshold_m", p.threshold}, {"accuracy", p.accuracy}});
    doc["auc"] = report.auc;
    if (report.has_segmentation)
        doc["segmentation"] = seg_scores_to_json(report.segmentation);
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out)
        throw ParseError("store_report: failed to write " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_report: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_report: malformed JSON: " +
                         std::string(e.what()));
    }
    require_known_keys(doc, {"add_s_m", "curve", "auc", "segmentation"},
                       "report");
    MetricsReport report;
    try {
        for (const auto& [label, v] : doc.at("add_s_m").items())
            report.add_s_m[label] = v.get<double>();
        for (const auto& p : doc.at("curve")) {
            require_known_keys(p, {"threshold_m", "accuracy"}, "curve sample");
            report.curve.push_back({p.at("threshold_m").get<double>(),
                                    p.at("accuracy").get<double>()});
        }
        report.auc = doc.at("auc").get<double>();
        if (doc.contains("segmentation")) {
            report.has_segmentation = true;
            report.segmentation = seg_scores_from_json(doc.at("segmentation"));
        }
    } catch (const json::exception& e) {
        throw ParseError("load_report: " + std::string(e.what()));
    }
    report.validate();
    return report;
}

void emit_plot_data(const MetricsReport& report, std::ostream& out) {
    report.validate();
    if (report.curve.empty())
        throw DomainError("emit_plot_data: report has no curve samples");
    out << "threshold_m,accuracy\n";
    char buf[64];
    for (const CurvePoint& p : report.curve) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.threshold,
                      p.accuracy);
        out << buf;
    }
}

const ReferenceScores& reference_scores() {
    static const ReferenceScores scores = [] {
        ReferenceScores s;
        s.segmentation = {0.954, 0.520, 0.455, 0.854, 0.390};
        s.auc_by_object = {{"wine_cup", 0.38},
                           {"tall_cup", 0.32},
                           {"glass_jar", 0.62},
                           {"champagne_cup", 0.35},
                           {"starbucks_bottle", 0.44}};
        s.auc_all = 0.45;
        s.runtime_budget_s = 10.0;
        return s;
    }();
    return scores;
}

}  // namespace plenopose
