#include "plenopose/losses.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "plenopose/errors.hpp"

namespace plenopose {

void SegPrediction::validate() const {
    if (logits.channels != kNumSegClasses)
        throw ValidationError("SegPrediction: logits must have 3 channels");
    for (double v : logits.data)
        if (!std::isfinite(v))
            throw ValidationError("SegPrediction: non-finite logit");
}

void SegTarget::validate() const {
    for (std::uint8_t v : labels.labels)
        if (v >= kNumSegClasses)
            throw ValidationError("SegTarget: label " + std::to_string(v) +
                                  " outside {0,1,2}");
}

void LossConfig::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0) || !(tau >= 0.0))
        throw ValidationError("LossConfig: weights and tau must be >= 0");
}

namespace {

void check_seg_pair(const SegPrediction& pred, const SegTarget& target) {
    pred.validate();
    target.validate();
    if (pred.logits.height != target.labels.height ||
        pred.logits.width != target.labels.width)
        throw ShapeError("segmentation loss: prediction " +
                         std::to_string(pred.logits.height) + "x" +
                         std::to_string(pred.logits.width) +
                         " does not match target " +
                         std::to_string(target.labels.height) + "x" +
                         std::to_string(target.labels.width));
    if (pred.logits.height < 1 || pred.logits.width < 1)
        throw DomainError("segmentation loss: empty image");
}

// Inverse-frequency class weights over classes present in the target,
// normalized so the mean pixel weight is exactly 1.
std::array<double, kNumSegClasses> class_weights(const SegTarget& target) {
    std::array<double, kNumSegClasses> counts{0.0, 0.0, 0.0};
    for (std::uint8_t v : target.labels.labels) counts[v] += 1.0;
    int present = 0;
    for (double c : counts)
        if (c > 0.0) ++present;
    const double n = static_cast<double>(target.labels.labels.size());
    std::array<double, kNumSegClasses> w{0.0, 0.0, 0.0};
    for (int k = 0; k < kNumSegClasses; ++k)
        if (counts[k] > 0.0) w[k] = n / (present * counts[k]);
    return w;
}

struct SoftmaxRow {
    std::array<double, kNumSegClasses> p;
    double log_p_target;
};

SoftmaxRow softmax_at(const FeatureMap& logits, int y, int x, int target) {
    std::array<double, kNumSegClasses> z;
    double zmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kNumSegClasses; ++k) {
        z[k] = logits.at(y, x, k);
        zmax = std::max(zmax, z[k]);
    }
    double denom = 0.0;
    for (int k = 0; k < kNumSegClasses; ++k) denom += std::exp(z[k] - zmax);
    SoftmaxRow row;
    for (int k = 0; k < kNumSegClasses; ++k)
        row.p[k] = std::exp(z[k] - zmax) / denom;
    row.log_p_target = z[target] - zmax - std::log(denom);
    return row;
}

}  // namespace

double seg_loss(const SegPrediction& pred, const SegTarget& target) {
    check_seg_pair(pred, target);
    const auto w = class_weights(target);
    const int h = pred.logits.height, wdt = pred.logits.width;
    double acc = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wdt; ++x) {
            const int k = target.labels.at(y, x);
            acc -= w[k] * softmax_at(pred.logits, y, x, k).log_p_target;
        }
    return acc / (static_cast<double>(h) * wdt);
}

FeatureMap seg_loss_grad(const SegPrediction& pred, const SegTarget& target) {
    check_seg_pair(pred, target);
    const auto w = class_weights(target);
    const int h = pred.logits.height, wdt = pred.logits.width;
    const double n = static_cast<double>(h) * wdt;
    FeatureMap grad(h, wdt, kNumSegClasses);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wdt; ++x) {
            const int k = target.labels.at(y, x);
            const SoftmaxRow row = softmax_at(pred.logits, y, x, k);
            for (int c = 0; c < kNumSegClasses; ++c)
                grad.at(y, x, c) =
                    w[k] * (row.p[c] - (c == k ? 1.0 : 0.0)) / n;
        }
    return grad;
}

namespace {

void check_votes(const CenterVoteField& votes, const char* what) {
    votes.validate();
    if (!votes.mask.any())
        throw DomainError(std::string(what) + ": no participating pixels");
}

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double center_offset_loss(const CenterVoteField& votes,
                          const Eigen::Vector2d& gt_center) {
    check_votes(votes, "center_offset_loss");
    double acc = 0.0;
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const Eigen::Vector2d r = gt_center - votes.voted_center(y, x);
            acc += std::abs(r.x()) + std::abs(r.y());
        }
    return acc;
}

OffsetLossGrad center_offset_loss_grad(const CenterVoteField& votes,
                                       const Eigen::Vector2d& gt_center) {
    check_votes(votes, "center_offset_loss_grad");
    const std::size_t n = static_cast<std::size_t>(votes.height) * votes.width;
    OffsetLossGrad grad{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const std::size_t i = votes.index(y, x);
            const Eigen::Vector2d r = gt_center - votes.voted_center(y, x);
            // d/dh |g - (c + h)| = -sign(g - (c + h)) componentwise.
            grad.d_offset_x[i] = -sign0(r.x());
            grad.d_offset_y[i] = -sign0(r.y());
        }
    return grad;
}

double confidence_loss(const CenterVoteField& votes,
                       const Eigen::Vector2d& gt_center, double tau) {
    check_votes(votes, "confidence_loss");
    if (!(tau >= 0.0)) throw ValidationError("confidence_loss: tau must be >= 0");
    double acc = 0.0;
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const std::size_t i = votes.index(y, x);
            const double r = (gt_center - votes.voted_center(y, x)).norm();
            acc += std::abs(votes.confidence[i] - std::exp(-tau * r));
        }
    return acc;
}

ConfidenceLossGrad confidence_loss_grad(const CenterVoteField& votes,
                                        const Eigen::Vector2d& gt_center,
                                        double tau) {
    check_votes(votes, "confidence_loss_grad");
    if (!(tau >= 0.0))
        throw ValidationError("confidence_loss_grad: tau must be >= 0");
    const std::size_t n = static_cast<std::size_t>(votes.height) * votes.width;
    ConfidenceLossGrad grad{std::vector<double>(n, 0.0),
                            std::vector<double>(n, 0.0),
                            std::vector<double>(n, 0.0)};
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const std::size_t i = votes.index(y, x);
            const Eigen::Vector2d res = gt_center - votes.voted_center(y, x);
            const double r = res.norm();
            const double e = std::exp(-tau * r);
            const double s = sign0(votes.confidence[i] - e);
            grad.d_confidence[i] = s;
            if (r > 0.0) {
                // d e / d h = tau * e * res / r; term derivative is -s * that.
                const double k = -s * tau * e / r;
                grad.d_offset_x[i] = k * res.x();
                grad.d_offset_y[i] = k * res.y();
            }
        }
    return grad;
}

double total_loss(double seg, double pos, double conf, const LossConfig& cfg) {
    cfg.validate();
    return cfg.alpha * seg + cfg.beta * pos + cfg.gamma * conf;
}

}  // namespace plenopose
