#pragma once

// Training objectives for the segmentation / center-voting head: frequency-
// weighted cross-entropy over three classes, L1 center-offset regression, and
// confidence regression toward exp(-tau * residual). All are pure scalar
// functions with exact analytic gradients.

#include <vector>

#include <Eigen/Core>

#include "plenopose/image.hpp"
#include "plenopose/votes.hpp"

namespace plenopose {

inline constexpr int kNumSegClasses = 3;  // background, transparent, boundary

struct SegPrediction {
    FeatureMap logits;  // H x W x 3
    void validate() const;
};

struct SegTarget {
    ClassMap labels;  // values in {0, 1, 2}
    void validate() const;
};

struct LossConfig {
    double alpha = 1.0;  // segmentation weight
    double beta = 8.0;   // center-offset weight
    double gamma = 2.0;  // confidence weight
    double tau = 0.5;    // confidence decay per pixel of residual
    void validate() const;
};

// Mean over pixels of cross-entropy, each pixel weighted by the inverse
// frequency of its target class within the image; the per-class weights are
// normalized so that the pixel-weights average to 1 (uniform logits therefore
// score exactly ln 3 regardless of the target).
double seg_loss(const SegPrediction& pred, const SegTarget& target);

// d seg_loss / d logits: (softmax - one_hot) scaled by the pixel's class
// weight over the pixel count.
FeatureMap seg_loss_grad(const SegPrediction& pred, const SegTarget& target);

// Sum over masked pixels of the L1 distance between the voted center
// c_p + h_p and the ground-truth center g (a sum, not a mean).
double center_offset_loss(const CenterVoteField& votes,
                          const Eigen::Vector2d& gt_center);

struct OffsetLossGrad {
    std::vector<double> d_offset_x;  // per pixel, zero off-mask
    std::vector<double> d_offset_y;
};
// Per-component sign subgradient; sign(0) taken as 0.
OffsetLossGrad center_offset_loss_grad(const CenterVoteField& votes,
                                       const Eigen::Vector2d& gt_center);

// Sum over masked pixels of |b_p - exp(-tau * r_p)| where r_p is the L2
// residual between the voted center and g.
double confidence_loss(const CenterVoteField& votes,
                       const Eigen::Vector2d& gt_center, double tau);

struct ConfidenceLossGrad {
    std::vector<double> d_offset_x;
    std::vector<double> d_offset_y;
    std::vector<double> d_confidence;
};
// Subgradients at |.| = 0 and at zero residual taken as 0.
ConfidenceLossGrad confidence_loss_grad(const CenterVoteField& votes,
                                        const Eigen::Vector2d& gt_center,
                                        double tau);

// alpha * seg + beta * pos + gamma * conf.
double total_loss(double seg, double pos, double conf, const LossConfig& cfg);

}  // namespace plenopose
