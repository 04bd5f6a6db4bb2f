#pragma once

// End-to-end orchestration: read a scene directory (light-field container
// plus oracle segmentation, center votes, and ground truth), build the depth
// likelihood volume, estimate a 6D pose per object, and write poses together
// with an evaluation report.

#include <filesystem>
#include <map>
#include <string>

#include "plenopose/config.hpp"
#include "plenopose/eval.hpp"
#include "plenopose/pose.hpp"
#include "plenopose/scene.hpp"

namespace plenopose {

// Point count for object models rebuilt from ground-truth meshes; dense
// enough that splatted silhouettes close up without morphological cleanup.
inline constexpr int kDefaultModelPoints = 4000;

// Union of the transparent class and its boundary band. This is the
// silhouette target handed to the pose likelihood: the projected model is
// splat-dilated by roughly the same margin as the labeled band, so the two
// footprints agree at the true pose.
Mask seg_union_mask(const ClassMap& seg);

struct PipelineResult {
    std::map<std::string, PoseEstimate> poses;  // by object label
    MetricsReport report;
    double dlv_seconds = 0.0;       // volume construction
    double estimate_seconds = 0.0;  // summed over objects
};

// input_dir must hold the light-field container, seg.png, votes.json, and
// gt.json (object labels, meshes, and poses; labels must be unique). Writes
// dlv/, pose_<label>.json per object, and report.json into out_dir. Missing
// inputs raise ParseError naming the file.
PipelineResult run_pipeline(const std::filesystem::path& input_dir,
                            const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir);

// Scores pose_<label>.json files in est_dir against gt_dir/gt.json. When
// both directories hold a seg.png the report also carries segmentation
// scores.
MetricsReport eval_dirs(const std::filesystem::path& est_dir,
                        const std::filesystem::path& gt_dir);

// Renders a scene spec and writes the full input bundle: container, seg.png,
// votes.json, gt.json.
void synth_scene(const SceneSpec& spec, const std::filesystem::path& out_dir,
                 double vote_noise_std = 0.5,
                 ConfidenceProfile profile = ConfidenceProfile::Constant);

}  // namespace plenopose
