#pragma once

// Pose and segmentation evaluation: symmetric average-distance pose error
// (ADD-S), accuracy-vs-threshold curves with exact area under the curve, and
// multi-class segmentation scores including a boundary-F1 term.

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "plenopose/geometry.hpp"
#include "plenopose/image.hpp"
#include "plenopose/model.hpp"

namespace plenopose {

// Accuracy threshold ceiling for pose curves, meters.
inline constexpr double kDefaultPoseThreshold = 0.1;

// Point count at and below which nearest-neighbor search runs brute force;
// larger models use a uniform-grid index that returns identical results.
inline constexpr int kAddSBruteForceLimit = 5000;

// Symmetric average distance between two posed copies of the same model:
// mean over est-posed points of the distance to the closest gt-posed point.
// Invariant under rotations about a model symmetry axis.
double add_s(const ObjectModel& model, const Pose& est, const Pose& gt);

// Reference implementation: exhaustive double loop. add_s must match this
// exactly; exposed so tests can cross-check the accelerated path.
double add_s_brute(const ObjectModel& model, const Pose& est, const Pose& gt);

struct CurvePoint {
    double threshold = 0.0;  // meters
    double accuracy = 0.0;   // fraction of errors at or below the threshold
};

// Step function accuracy(t) = fraction of errors <= t, sampled at zero, every
// distinct error inside (0, max_threshold], and max_threshold itself, so the
// samples carry the exact step function.
std::vector<CurvePoint> accuracy_curve(const std::vector<double>& errors,
                                       double max_threshold);

// Exact integral of the right-continuous step curve divided by its threshold
// span; in [0, 1]. For a curve from accuracy_curve this is
// (1/max_threshold) * integral over [0, max_threshold].
double auc(const std::vector<CurvePoint>& curve);

struct SegScores {
    double g_acc = 0.0;  // overall pixel accuracy
    double m_acc = 0.0;  // mean per-class accuracy (classes present in gt)
    double m_iou = 0.0;  // mean per-class IoU (classes present in either)
    double w_iou = 0.0;  // IoU weighted by gt class pixel frequency
    double m_bfs = 0.0;  // mean per-class boundary F1 within a pixel tolerance
};

// Boundary-match tolerance used by the boundary-F1 term: 0.75% of the image
// diagonal, in pixels.
double default_boundary_tolerance(int height, int width);

// Scores a 3-class prediction against ground truth. Classes absent from both
// maps are excluded from every mean. Throws ShapeError on dim mismatch.
SegScores seg_metrics(const ClassMap& pred, const ClassMap& gt);
SegScores seg_metrics(const ClassMap& pred, const ClassMap& gt,
                      double boundary_tolerance_px);

struct MetricsReport {
    std::map<std::string, double> add_s_m;  // per-object label
    std::vector<CurvePoint> curve;
    double auc = 0.0;
    bool has_segmentation = false;
    SegScores segmentation;

    // Curve thresholds strictly increasing, accuracies non-decreasing, all
    // rates in [0, 1].
    void validate() const;
};

void store_report(const MetricsReport& report,
                  const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

// CSV of the accuracy curve with a fixed "threshold_m,accuracy" header.
// Throws DomainError when the report has no curve samples.
void emit_plot_data(const MetricsReport& report, std::ostream& out);

// Published scores of the LIT system on its real-capture test set. They
// depend on real plenoptic camera data and trained segmentation networks and
// are not reproducible by this toolkit; shipped for reference only.
struct ReferenceScores {
    SegScores segmentation;
    std::map<std::string, double> auc_by_object;
    double auc_all = 0.0;
    double runtime_budget_s = 0.0;  // per-object pose estimation budget
};
const ReferenceScores& reference_scores();

}  // namespace plenopose
