#pragma once

// Depth Likelihood Volume: per-pixel likelihood over a swept set of depth
// planes, built by shifting every sub-aperture view onto the center view at
// each candidate depth and scoring intensity and gradient agreement. Unlike a
// single depth map, each pixel keeps a full normalized distribution, which
// downstream pose sampling consumes directly.

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "plenopose/image.hpp"
#include "plenopose/lightfield.hpp"

namespace plenopose {

struct DlvConfig {
    double depth_min = 0.3;  // meters
    double depth_max = 1.0;  // meters
    int num_planes = 64;
    double intensity_weight = 1.0;  // weight of the color-difference term
    double gradient_weight = 0.5;   // weight of the gradient-magnitude term
    double cost_scale = 0.1;        // sigma of the cost -> likelihood mapping
    // Views participating in the cost; empty means all except the center.
    std::vector<std::pair<int, int>> view_set;  // (t, s)

    void validate() const;
};

struct DepthLikelihoodVolume {
    Roi roi;
    std::vector<double> depths;  // strictly increasing, uniform in 1/depth
    // Row-major (y, x, k) over the roi; every pixel row sums to 1.
    std::vector<float> values;
    DlvConfig config;

    int num_planes() const { return static_cast<int>(depths.size()); }
    std::size_t index(int u, int v, int k) const;
    double value(int u, int v, int k) const { return values[index(u, v, k)]; }

    // Normalized likelihood row of absolute pixel (u, v); sums to 1.
    std::vector<double> pixel_likelihood(int u, int v) const;
    // Depth of the max-likelihood plane; ties break toward the nearer depth.
    double argmax_depth(int u, int v) const;

    void validate() const;
};

// Plane depths for a config: num_planes values spanning
// [depth_min, depth_max], uniformly spaced in inverse depth; a single plane
// sits at depth_min.
std::vector<double> plane_depths(const DlvConfig& cfg);

// Shift-and-compare cost of one view at one pixel and depth: the view is
// sampled at the position that a scene point at that depth would occupy, and
// compared against the center view in mean absolute color difference and
// absolute difference of Sobel gradient magnitudes (luminance). Returns false
// when the shifted sample falls outside the view.
bool cost_T(const LightField4D& lf, const CameraModel& cam, int t, int s,
            double depth, int x, int y, const DlvConfig& cfg, double* cost);

DepthLikelihoodVolume build_dlv(const LightField4D& lf, const CameraModel& cam,
                                const Roi& roi, const DlvConfig& cfg);

// dlv.json (roi, depths, config) + dlv.f32 (row-major float32 likelihoods).
void store_dlv(const DepthLikelihoodVolume& dlv,
               const std::filesystem::path& dir);
DepthLikelihoodVolume load_dlv(const std::filesystem::path& dir);

}  // namespace plenopose
