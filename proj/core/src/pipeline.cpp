#include "plenopose/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "plenopose/errors.hpp"
#include "plenopose/lightfield_io.hpp"
#include "plenopose/rng.hpp"
#include "plenopose/votes.hpp"

namespace fs = std::filesystem;

namespace plenopose {

Mask seg_union_mask(const ClassMap& seg) {
    Mask m(seg.height, seg.width);
    for (std::size_t i = 0; i < seg.labels.size(); ++i)
        m.data[i] = seg.labels[i] == kClassTransparent ||
                    seg.labels[i] == kClassBoundary;
    return m;
}

namespace {

void require_file(const fs::path& p, const char* what) {
    if (!fs::exists(p))
        throw ParseError(std::string(what) + ": missing " + p.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
}

// Index of the nearest ground-truth center to (x, y); the oracle stand-in
// for the upstream object detector.
std::size_t nearest_center(const std::vector<Eigen::Vector2d>& centers,
                           double x, double y) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double dx = centers[i].x() - x;
        const double dy = centers[i].y() - y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

// Votes whose voted center lands closest to centers[target]; full field when
// there is only one object.
CenterVoteField votes_for_object(const CenterVoteField& votes,
                                 const std::vector<Eigen::Vector2d>& centers,
                                 std::size_t target) {
    if (centers.size() == 1) return votes;
    CenterVoteField out = votes;
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const Eigen::Vector2d c = votes.voted_center(y, x);
            if (nearest_center(centers, c.x(), c.y()) != target)
                out.mask.at(y, x) = 0;
        }
    return out;
}

// Silhouette-target pixels nearest to centers[target].
Mask seg_for_object(const Mask& seg_union,
                    const std::vector<Eigen::Vector2d>& centers,
                    std::size_t target) {
    if (centers.size() == 1) return seg_union;
    Mask out(seg_union.height, seg_union.width);
    for (int y = 0; y < seg_union.height; ++y)
        for (int x = 0; x < seg_union.width; ++x)
            if (seg_union.at(y, x) &&
                nearest_center(centers, x, y) == target)
                out.at(y, x) = 1;
    return out;
}

}  // namespace

PipelineResult run_pipeline(const fs::path& input_dir,
                            const PipelineConfig& cfg,
                            const fs::path& out_dir) {
    cfg.validate();
    require_file(input_dir / "lightfield.json", "run_pipeline");
    require_file(input_dir / "seg.png", "run_pipeline");
    require_file(input_dir / "votes.json", "run_pipeline");
    require_file(input_dir / "gt.json", "run_pipeline");

    const LightFieldContainer container = load_lightfield(input_dir);
    const ClassMap seg = load_classmap_png(input_dir / "seg.png");
    const CenterVoteField votes = load_votes(input_dir / "votes.json");
    const GroundTruth gt = load_ground_truth(input_dir / "gt.json");
    if (gt.objects.empty())
        throw DomainError("run_pipeline: gt.json lists no objects");
    for (std::size_t i = 0; i < gt.objects.size(); ++i)
        for (std::size_t j = i + 1; j < gt.objects.size(); ++j)
            if (gt.objects[i].label == gt.objects[j].label)
                throw ValidationError("run_pipeline: duplicate object label '" +
                                      gt.objects[i].label + "'");
    if (seg.height != container.field.spatial_h ||
        seg.width != container.field.spatial_w)
        throw ShapeError("run_pipeline: seg.png dims do not match the field");
    if (votes.height != seg.height || votes.width != seg.width)
        throw ShapeError("run_pipeline: votes.json dims do not match seg.png");

    fs::create_directories(out_dir);
    PipelineResult result;

    const Roi full{0, 0, container.field.spatial_w, container.field.spatial_h};
    const auto t_dlv = std::chrono::steady_clock::now();
    const DepthLikelihoodVolume dlv =
        build_dlv(container.field, container.camera, full, cfg.dlv);
    result.dlv_seconds = seconds_since(t_dlv);
    fs::create_directories(out_dir / "dlv");
    store_dlv(dlv, out_dir / "dlv");

    const Mask seg_union = seg_union_mask(seg);
    std::vector<Eigen::Vector2d> centers;
    centers.reserve(gt.objects.size());
    for (const auto& obj : gt.objects) centers.push_back(obj.center_px);

    std::vector<double> errors;
    for (std::size_t i = 0; i < gt.objects.size(); ++i) {
        const auto& entry = gt.objects[i];
        const ObjectModel model =
            make_object(entry.mesh, kDefaultModelPoints, entry.label);
        const CenterVoteField obj_votes = votes_for_object(votes, centers, i);
        const Mask obj_seg = seg_for_object(seg_union, centers, i);
        const auto t_est = std::chrono::steady_clock::now();
        const PoseEstimate est = estimate(
            obj_seg, obj_votes, dlv, model, container.camera, cfg.likelihood,
            cfg.diffusion, cfg.termination,
            derive_seed(cfg.seed, "object", static_cast<std::uint64_t>(i)));
        result.estimate_seconds += seconds_since(t_est);
        store_pose_estimate(est, out_dir / ("pose_" + entry.label + ".json"));
        result.poses[entry.label] = est;
        const double err = add_s(model, est.pose, entry.pose);
        result.report.add_s_m[entry.label] = err;
        errors.push_back(err);
    }

    result.report.curve = accuracy_curve(errors, kDefaultPoseThreshold);
    result.report.auc = auc(result.report.curve);
    store_report(result.report, out_dir / "report.json");
    return result;
}

MetricsReport eval_dirs(const fs::path& est_dir, const fs::path& gt_dir) {
    require_file(gt_dir / "gt.json", "eval");
    const GroundTruth gt = load_ground_truth(gt_dir / "gt.json");
    if (gt.objects.empty()) throw DomainError("eval: gt.json lists no objects");

    MetricsReport report;
    std::vector<double> errors;
    for (const auto& entry : gt.objects) {
        const fs::path pose_path =
            est_dir / ("pose_" + entry.label + ".json");
        require_file(pose_path, "eval");
        const PoseEstimate est = load_pose_estimate(pose_path);
        const ObjectModel model =
            make_object(entry.mesh, kDefaultModelPoints, entry.label);
        const double err = add_s(model, est.pose, entry.pose);
        report.add_s_m[entry.label] = err;
        errors.push_back(err);
    }
    report.curve = accuracy_curve(errors, kDefaultPoseThreshold);
    report.auc = auc(report.curve);

    if (fs::exists(est_dir / "seg.png") && fs::exists(gt_dir / "seg.png")) {
        report.has_segmentation = true;
        report.segmentation =
            seg_metrics(load_classmap_png(est_dir / "seg.png"),
                        load_classmap_png(gt_dir / "seg.png"));
    }
    report.validate();
    return report;
}

void synth_scene(const SceneSpec& spec, const fs::path& out_dir,
                 double vote_noise_std, ConfidenceProfile profile) {
    spec.validate();
    const RenderOutputs outputs = render_scene(spec, vote_noise_std, profile);
    fs::create_directories(out_dir);
    store_lightfield(outputs.lightfield, spec.camera, out_dir);
    store_classmap_png(outputs.seg, out_dir / "seg.png");
    store_votes(outputs.votes, out_dir / "votes.json");
    store_ground_truth(ground_truth_of(spec, outputs), out_dir / "gt.json");
}

}  // namespace plenopose
