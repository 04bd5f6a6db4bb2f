#pragma once

// Generative 6D pose estimation for transparent objects: particles are
// initialized by importance sampling over center-vote confidence crossed with
// the depth likelihood volume, then iteratively reweighted by silhouette
// agreement (region and boundary IoU against the segmentation), resampled,
// and diffused with Gaussian noise until the best raw weight clears a
// threshold.

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "plenopose/dlv.hpp"
#include "plenopose/geometry.hpp"
#include "plenopose/image.hpp"
#include "plenopose/lightfield.hpp"
#include "plenopose/model.hpp"
#include "plenopose/votes.hpp"

namespace plenopose {

struct Particle {
    Pose pose;
    double weight = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;
    bool normalized = false;

    void validate() const;
    // Scales weights to sum 1; all-zero weights throw DomainError.
    void normalize();
};

struct LikelihoodConfig {
    double eta = 0.8;            // region-IoU weight; 1 - eta on boundaries
    int boundary_thickness = 1;  // Chebyshev band width of boundary masks
    int splat_radius = 2;        // disc radius of projected model points
    void validate() const;
};

struct DiffusionConfig {
    double sigma_t = 0.08;  // meters, per translation axis
    double sigma_r = 0.4;   // radians, axis-angle magnitude
    void validate() const;
};

struct TerminationConfig {
    double weight_threshold = 0.7;  // raw best weight that ends iteration
    int max_iterations = 30;
    int num_particles = 400;
    void validate() const;
};

struct PoseEstimate {
    Pose pose;
    double weight = 0.0;  // raw likelihood of the returned pose
    int iterations = 0;
};

// Draws n (u, v, d) triples with probability proportional to b(u, v) *
// D(u, v, d), where b accumulates vote confidences at rounded voted centers
// inside the volume's roi; back-projects each through the pinhole model and
// pairs it with a uniformly random orientation. Weights start at 1/n.
ParticleSet init_samples(const CenterVoteField& votes,
                         const DepthLikelihoodVolume& dlv,
                         const CameraModel& cam, int n, std::uint64_t seed);

// Pixels covered by any projected model point splatted as a disc of radius
// splat_radius; points behind the camera are dropped. An empty mask (nothing
// projects into the image) is a valid result, not an error.
Mask project_silhouette(const ObjectModel& model, const Pose& pose,
                        const CameraModel& cam, int img_w, int img_h,
                        int splat_radius = 2);

// Pixels within `thickness` (Chebyshev) of a pixel with the opposite set
// state (any nonzero byte counts as set); outside the image counts as
// background, so a full mask has its boundary at the image frame.
Mask boundary(const Mask& mask, int thickness);

// Intersection over union of two masks; IoU of two empty masks is 0.
double mask_iou(const Mask& a, const Mask& b);

// eta * IoU(regions) + (1 - eta) * IoU(boundaries); in [0, 1], symmetric.
double likelihood_weight(const Mask& s_pcd, const Mask& s_seg,
                         const Mask& boundary_pcd, const Mask& boundary_seg,
                         const LikelihoodConfig& cfg);

// Systematic resampling with strata (i + u)/n; preserves the particle count
// and returns uniform weights. Requires normalized input weights.
ParticleSet resample(const ParticleSet& ps, std::mt19937_64& rng);

// Adds iid N(0, sigma_t^2) per translation axis and left-composes each
// rotation with a uniform-axis rotation of angle |N(0, sigma_r^2)|.
ParticleSet diffuse(const ParticleSet& ps, const DiffusionConfig& cfg,
                    std::mt19937_64& rng);

// Samples one uniformly distributed unit quaternion.
Eigen::Quaterniond uniform_quaternion(std::mt19937_64& rng);

// Full estimator; deterministic given the seed. Returns the pose with the
// highest raw likelihood ever observed across all iterations.
PoseEstimate estimate(const Mask& seg, const CenterVoteField& votes,
                      const DepthLikelihoodVolume& dlv,
                      const ObjectModel& model, const CameraModel& cam,
                      const LikelihoodConfig& like_cfg,
                      const DiffusionConfig& diff_cfg,
                      const TerminationConfig& term_cfg, std::uint64_t seed);

// pose.json round-trip (translation, quaternion, weight, iterations).
void store_pose_estimate(const PoseEstimate& est,
                         const std::filesystem::path& path);
PoseEstimate load_pose_estimate(const std::filesystem::path& path);

}  // namespace plenopose
