#pragma once

// Synthetic desk-scale scene oracle: renders a camera-grid light field of a
// textured background plane with semi-transparent glassware proxies, plus the
// labels a trained first stage would produce (three-class segmentation,
// center-vote fields) and exact ground-truth poses. Transparency is a proxy
// (alpha blend over the background, a textured overlay at the object's depth,
// per-view specular sparkles) — refraction is not simulated.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "plenopose/image.hpp"
#include "plenopose/lightfield.hpp"
#include "plenopose/model.hpp"
#include "plenopose/votes.hpp"

namespace plenopose {

struct BackgroundSpec {
    double depth = 1.0;  // meters, behind every object
    std::uint64_t texture_seed = 1;
    double contrast = 0.5;  // luminance half-range around 0.5, in [0, 0.5]
};

struct SceneObject {
    std::string label = "object";
    ParametricMesh mesh;
    Pose pose;
    double alpha = 0.55;  // overlay opacity of the transparency proxy
    Eigen::Vector3d tint{0.06, 0.08, 0.10};  // additive surface color
};

struct RenderOptions {
    double noise_std = 0.005;    // additive Gaussian pixel noise
    double sparkle_rate = 0.05;  // per-view specular pixel probability
    std::uint64_t seed = 7;
};

struct SceneSpec {
    CameraModel camera;
    int angular_h = 5;
    int angular_w = 5;
    BackgroundSpec background;
    std::vector<SceneObject> objects;
    RenderOptions render;

    void validate() const;
};

// Segmentation classes.
inline constexpr std::uint8_t kClassBackground = 0;
inline constexpr std::uint8_t kClassTransparent = 1;
inline constexpr std::uint8_t kClassBoundary = 2;
inline constexpr int kBoundaryBandPx = 2;  // outer band width of class 2

enum class ConfidenceProfile : int { Constant, CenterDecay, ResidualExp };

struct RenderOutputs {
    LightField4D lightfield;
    ClassMap seg;
    CenterVoteField votes;
    std::vector<Pose> gt_poses;
    std::vector<Eigen::Vector2d> gt_centers_px;
    Image gt_depth;  // center view, 1 channel, meters
};

LightField4D render_lightfield(const SceneSpec& spec);

// Center-view labels: class 1 is the exact union of object silhouettes
// (pixel-center ray test), class 2 a 2-px outer band, class 0 elsewhere.
ClassMap render_segmentation(const SceneSpec& spec);

// Center-view depth of the first surface hit, background depth elsewhere.
Image render_depth(const SceneSpec& spec);

// Votes from every transparent pixel toward gt_center_px: offsets get iid
// N(0, offset_noise_std^2) per component; confidence per profile (Constant:
// 1; CenterDecay: exp(-distance/20 px); ResidualExp: exp(-tau * realized
// residual), matching the confidence-regression target).
CenterVoteField make_center_votes(const ClassMap& seg,
                                  const Eigen::Vector2d& gt_center_px,
                                  double offset_noise_std,
                                  ConfidenceProfile profile,
                                  std::uint64_t seed = 0, double tau = 0.5);

// Full labeled render; votes are built per object over that object's own
// silhouette pixels (nearest surface wins where objects overlap) and merged.
RenderOutputs render_scene(const SceneSpec& spec,
                           double vote_noise_std = 0.5,
                           ConfidenceProfile profile =
                               ConfidenceProfile::Constant);

// Ground truth bundle for evaluation and model lookup (oracle detector).
struct GroundTruth {
    CameraModel camera;
    struct Entry {
        std::string label;
        ParametricMesh mesh;
        Pose pose;
        Eigen::Vector2d center_px{0.0, 0.0};
        double center_depth_m = 0.0;
    };
    std::vector<Entry> objects;
};

void store_scene_spec(const SceneSpec& spec, const std::filesystem::path& path);
SceneSpec load_scene_spec(const std::filesystem::path& path);
void store_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

GroundTruth ground_truth_of(const SceneSpec& spec,
                            const RenderOutputs& outputs);

}  // namespace plenopose
