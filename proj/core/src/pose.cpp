#include "plenopose/pose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/jsonio.hpp"
#include "plenopose/parallel.hpp"
#include "plenopose/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

void ParticleSet::validate() const {
    if (particles.empty()) throw ValidationError("ParticleSet: empty");
    double sum = 0.0;
    for (const Particle& p : particles) {
        if (!(p.weight >= 0.0) || !std::isfinite(p.weight))
            throw ValidationError("ParticleSet: weight must be finite and >= 0");
        sum += p.weight;
    }
    if (normalized && std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("ParticleSet: marked normalized but weights sum "
                              "to " + std::to_string(sum));
}

void ParticleSet::normalize() {
    validate();
    double sum = 0.0;
    for (const Particle& p : particles) sum += p.weight;
    if (sum <= 0.0)
        throw DomainError("ParticleSet: cannot normalize all-zero weights");
    for (Particle& p : particles) p.weight /= sum;
    normalized = true;
}

void LikelihoodConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("LikelihoodConfig: eta must be in [0,1]");
    if (boundary_thickness < 1)
        throw ValidationError(
            "LikelihoodConfig: boundary_thickness must be >= 1");
    if (splat_radius < 1)
        throw ValidationError("LikelihoodConfig: splat_radius must be >= 1");
}

void DiffusionConfig::validate() const {
    if (!(sigma_t > 0.0) || !(sigma_r > 0.0))
        throw ValidationError("DiffusionConfig: sigmas must be > 0");
}

void TerminationConfig::validate() const {
    // Thresholds above 1 are allowed; they simply never terminate early.
    if (!(weight_threshold > 0.0))
        throw ValidationError(
            "TerminationConfig: weight_threshold must be > 0");
    if (max_iterations < 1)
        throw ValidationError("TerminationConfig: max_iterations must be >= 1");
    if (num_particles < 1)
        throw ValidationError("TerminationConfig: num_particles must be >= 1");
}

namespace {

// Mask plus inclusive bounding box of its set pixels.
struct BoundedMask {
    Mask mask;
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // empty when x1 < x0

    bool empty() const { return x1 < x0; }
    void grow(int x, int y) {
        if (empty()) {
            x0 = x1 = x;
            y0 = y1 = y;
        } else {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
};

BoundedMask bounded_from(const Mask& mask) {
    BoundedMask out;
    out.mask = mask;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(y, x)) out.grow(x, y);
    return out;
}

BoundedMask project_silhouette_bounded(const ObjectModel& model,
                                       const Pose& pose,
                                       const CameraModel& cam, int img_w,
                                       int img_h, int splat_radius) {
    BoundedMask out;
    out.mask = Mask(img_h, img_w);
    if (model.points.empty()) return out;
    const Eigen::Matrix3d R = pose.rotation.toRotationMatrix();
    const double r2 = static_cast<double>(splat_radius) * splat_radius;
    std::uint8_t* const data = out.mask.data.data();

    // Transform and project all points in one vectorized pass; per-axis
    // columns stay contiguous so the expressions below use SIMD.
    const Eigen::Index n = static_cast<Eigen::Index>(model.points.size());
    const Eigen::Map<const Eigen::Matrix3Xd> pts(model.points[0].data(), 3, n);
    static thread_local Eigen::Matrix<double, Eigen::Dynamic, 3> cam_pts;
    static thread_local Eigen::VectorXd us, vs;
    cam_pts.noalias() = pts.transpose() * R.transpose();
    cam_pts.col(0).array() += pose.translation.x();
    cam_pts.col(1).array() += pose.translation.y();
    cam_pts.col(2).array() += pose.translation.z();
    us = (cam.fx * cam_pts.col(0).array() + cam.cx * cam_pts.col(2).array()) /
         cam_pts.col(2).array();
    vs = (cam.fy * cam_pts.col(1).array() + cam.cy * cam_pts.col(2).array()) /
         cam_pts.col(2).array();

    for (Eigen::Index i = 0; i < n; ++i) {
        if (cam_pts(i, 2) <= 1e-9) continue;
        const double u = us[i];
        const double v = vs[i];
        // A point this far outside the frame cannot touch any pixel, and
        // skipping it keeps the int casts below in range.
        if (!(std::abs(u) < 1e6) || !(std::abs(v) < 1e6)) continue;
        const int py_lo = std::max(0, static_cast<int>(std::ceil(v - splat_radius)));
        const int py_hi = std::min(img_h - 1,
                                   static_cast<int>(std::floor(v + splat_radius)));
        for (int py = py_lo; py <= py_hi; ++py) {
            // Pixels set in this row are exactly those with
            // (px-u)^2 + (py-v)^2 <= r^2, filled as one contiguous span.
            const double dy = py - v;
            const double rem = r2 - dy * dy;
            if (rem < 0.0) continue;
            const double half = std::sqrt(rem);
            const int px_lo = std::max(0, static_cast<int>(std::ceil(u - half)));
            const int px_hi =
                std::min(img_w - 1, static_cast<int>(std::floor(u + half)));
            if (px_lo > px_hi) continue;
            std::uint8_t* row = data + static_cast<std::size_t>(py) * img_w;
            for (int px = px_lo; px <= px_hi; ++px) row[px] = 1;
            out.grow(px_lo, py);
            out.grow(px_hi, py);
        }
    }
    return out;
}

// A pixel lies on the boundary iff its Chebyshev-thickness window (with
// outside-the-image reading as background) is not constant, i.e. iff the
// window max and min differ. Both extrema are separable, so the window scan
// runs as a horizontal then a vertical pass over the padded bounding box.
BoundedMask boundary_bounded(const BoundedMask& in, int thickness) {
    BoundedMask out;
    out.mask = Mask(in.mask.height, in.mask.width);
    if (in.empty()) return out;
    const int w = in.mask.width, h = in.mask.height;
    const int x_lo = std::max(0, in.x0 - thickness);
    const int x_hi = std::min(w - 1, in.x1 + thickness);
    const int y_lo = std::max(0, in.y0 - thickness);
    const int y_hi = std::min(h - 1, in.y1 + thickness);
    const int bw = x_hi - x_lo + 1, bh = y_hi - y_lo + 1;

    // Row extrema; 0 outside the image acts as the padding value, and 1 is
    // recorded as "saw a set pixel".
    static thread_local std::vector<std::uint8_t> row_max, row_min;
    row_max.assign(static_cast<std::size_t>(bh) * bw, 0);
    row_min.assign(static_cast<std::size_t>(bh) * bw, 1);
    for (int y = y_lo; y <= y_hi; ++y) {
        const std::uint8_t* src =
            in.mask.data.data() + static_cast<std::size_t>(y) * w;
        std::uint8_t* mx = row_max.data() + static_cast<std::size_t>(y - y_lo) * bw;
        std::uint8_t* mn = row_min.data() + static_cast<std::size_t>(y - y_lo) * bw;
        for (int x = x_lo; x <= x_hi; ++x) {
            const int a = std::max(0, x - thickness);
            const int b = std::min(w - 1, x + thickness);
            std::uint8_t vmax = 0;
            std::uint8_t vmin = (x - thickness < 0 || x + thickness >= w) ? 0 : 1;
            for (int xx = a; xx <= b; ++xx) {
                const std::uint8_t set = src[xx] != 0;
                vmax |= set;
                vmin &= set;
            }
            mx[x - x_lo] = vmax;
            mn[x - x_lo] = vmin;
        }
    }
    for (int y = y_lo; y <= y_hi; ++y) {
        const int a = std::max(y_lo, y - thickness);
        const int b = std::min(y_hi, y + thickness);
        // Window rows outside the padded box hold no set pixels (they are
        // beyond the mask's bounding box or beyond the image): they force
        // the window min to 0 and leave the max unchanged.
        const bool outside_rows =
            (y - thickness < y_lo) || (y + thickness > y_hi);
        std::uint8_t* dst =
            out.mask.data.data() + static_cast<std::size_t>(y) * w + x_lo;
        int first = -1, last = -1;
        for (int x = 0; x < bw; ++x) {
            std::uint8_t vmax = 0, vmin = 1;
            for (int yy = a; yy <= b; ++yy) {
                const std::size_t r = static_cast<std::size_t>(yy - y_lo) * bw + x;
                vmax |= row_max[r];
                vmin &= row_min[r];
            }
            if (outside_rows) vmin = 0;
            if (vmax != vmin) {
                dst[x] = 1;
                if (first < 0) first = x;
                last = x;
            }
        }
        if (first >= 0) {
            out.grow(x_lo + first, y);
            out.grow(x_lo + last, y);
        }
    }
    return out;
}

double iou_bounded(const BoundedMask& a, const BoundedMask& b) {
    if (a.empty() && b.empty()) return 0.0;
    const int x_lo = a.empty() ? b.x0 : (b.empty() ? a.x0 : std::min(a.x0, b.x0));
    const int x_hi = a.empty() ? b.x1 : (b.empty() ? a.x1 : std::max(a.x1, b.x1));
    const int y_lo = a.empty() ? b.y0 : (b.empty() ? a.y0 : std::min(a.y0, b.y0));
    const int y_hi = a.empty() ? b.y1 : (b.empty() ? a.y1 : std::max(a.y1, b.y1));
    // Mask bytes are 0/1, so AND/OR sums count the intersection and union;
    // the row loops vectorize.
    std::size_t inter = 0, uni = 0;
    const int w = a.mask.width;
    for (int y = y_lo; y <= y_hi; ++y) {
        const std::uint8_t* pa =
            a.mask.data.data() + static_cast<std::size_t>(y) * w;
        const std::uint8_t* pb =
            b.mask.data.data() + static_cast<std::size_t>(y) * w;
        unsigned row_inter = 0, row_uni = 0;
        for (int x = x_lo; x <= x_hi; ++x) {
            row_inter += (pa[x] & pb[x]) != 0;
            row_uni += (pa[x] | pb[x]) != 0;
        }
        inter += row_inter;
        uni += row_uni;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double weight_bounded(const BoundedMask& s_pcd, const BoundedMask& s_seg,
                      const BoundedMask& b_pcd, const BoundedMask& b_seg,
                      const LikelihoodConfig& cfg) {
    return cfg.eta * iou_bounded(s_pcd, s_seg) +
           (1.0 - cfg.eta) * iou_bounded(b_pcd, b_seg);
}

}  // namespace

ParticleSet init_samples(const CenterVoteField& votes,
                         const DepthLikelihoodVolume& dlv,
                         const CameraModel& cam, int n, std::uint64_t seed) {
    votes.validate();
    if (n < 1) throw ValidationError("init_samples: n must be >= 1");
    // Accumulate vote confidence at rounded voted centers inside the roi.
    std::vector<double> b(static_cast<std::size_t>(votes.height) * votes.width,
                          0.0);
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const Eigen::Vector2d c = votes.voted_center(y, x);
            const int u = static_cast<int>(std::lround(c.x()));
            const int v = static_cast<int>(std::lround(c.y()));
            if (dlv.roi.contains(u, v))
                b[static_cast<std::size_t>(v) * votes.width + u] +=
                    votes.confidence[votes.index(y, x)];
        }

    // Joint distribution over (center pixel, depth plane).
    struct Entry {
        int u, v, k;
    };
    std::vector<Entry> entries;
    std::vector<double> cumulative;
    double total = 0.0;
    const int K = dlv.num_planes();
    for (int v = 0; v < votes.height; ++v)
        for (int u = 0; u < votes.width; ++u) {
            const double bv = b[static_cast<std::size_t>(v) * votes.width + u];
            if (bv <= 0.0) continue;
            const std::size_t base = dlv.index(u, v, 0);
            for (int k = 0; k < K; ++k) {
                const double w = bv * dlv.values[base + k];
                if (w <= 0.0) continue;
                total += w;
                entries.push_back({u, v, k});
                cumulative.push_back(total);
            }
        }
    if (entries.empty() || total <= 0.0)
        throw DomainError("init_samples: vote confidences put no mass inside "
                          "the depth volume");

    auto rng = make_engine(seed, "init");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ParticleSet ps;
    ps.particles.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double target = uni(rng) * total;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(),
                                         target);
        const Entry& e = entries[static_cast<std::size_t>(
            std::min(it - cumulative.begin(),
                     static_cast<std::ptrdiff_t>(entries.size()) - 1))];
        const double d = dlv.depths[static_cast<std::size_t>(e.k)];
        Particle& p = ps.particles[static_cast<std::size_t>(i)];
        p.pose.translation = {(e.u - cam.cx) * d / cam.fx,
                              (e.v - cam.cy) * d / cam.fy, d};
        p.pose.rotation = uniform_quaternion(rng);
        p.weight = 1.0 / n;
    }
    ps.normalized = true;
    return ps;
}

Mask project_silhouette(const ObjectModel& model, const Pose& pose,
                        const CameraModel& cam, int img_w, int img_h,
                        int splat_radius) {
    model.validate();
    pose.validate();
    if (img_w < 1 || img_h < 1)
        throw ShapeError("project_silhouette: empty image dims");
    if (splat_radius < 0)
        throw ValidationError("project_silhouette: negative splat radius");
    return project_silhouette_bounded(model, pose, cam, img_w, img_h,
                                      splat_radius)
        .mask;
}

Mask boundary(const Mask& mask, int thickness) {
    if (thickness < 1)
        throw ValidationError("boundary: thickness must be >= 1");
    BoundedMask in;
    in.mask = mask;
    // Full-frame candidate region, so the image-border convention applies
    // even for masks filling the frame.
    if (mask.any()) {
        in.x0 = 0;
        in.y0 = 0;
        in.x1 = mask.width - 1;
        in.y1 = mask.height - 1;
    }
    return boundary_bounded(in, thickness).mask;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (a.height != b.height || a.width != b.width)
        throw ShapeError("mask_iou: dims differ");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool av = a.data[i] != 0, bv = b.data[i] != 0;
        inter += av && bv;
        uni += av || bv;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double likelihood_weight(const Mask& s_pcd, const Mask& s_seg,
                         const Mask& boundary_pcd, const Mask& boundary_seg,
                         const LikelihoodConfig& cfg) {
    cfg.validate();
    if (!s_pcd.same_shape(s_seg) || !boundary_pcd.same_shape(boundary_seg) ||
        !s_pcd.same_shape(boundary_pcd))
        throw ShapeError("likelihood_weight: mask dims differ");
    return cfg.eta * mask_iou(s_pcd, s_seg) +
           (1.0 - cfg.eta) * mask_iou(boundary_pcd, boundary_seg);
}

ParticleSet resample(const ParticleSet& ps, std::mt19937_64& rng) {
    ps.validate();
    double sum = 0.0;
    for (const Particle& p : ps.particles) sum += p.weight;
    if (sum <= 0.0)
        throw DomainError("resample: all weights are zero");
    if (!ps.normalized || std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("resample: weights must be normalized");
    const std::size_t n = ps.particles.size();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u0 = uni(rng);
    ParticleSet out;
    out.particles.reserve(n);
    std::size_t idx = 0;
    double cum = ps.particles[0].weight;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = (static_cast<double>(i) + u0) /
                              static_cast<double>(n);
        while (target > cum && idx + 1 < n) {
            ++idx;
            cum += ps.particles[idx].weight;
        }
        out.particles.push_back(
            {ps.particles[idx].pose, 1.0 / static_cast<double>(n)});
    }
    out.normalized = true;
    return out;
}

namespace {

void diffuse_particle(Particle& p, const DiffusionConfig& cfg,
                      std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int a = 0; a < 3; ++a)
        p.pose.translation[a] += cfg.sigma_t * gauss(rng);
    Eigen::Vector3d axis;
    do {
        axis = {gauss(rng), gauss(rng), gauss(rng)};
    } while (axis.squaredNorm() < 1e-12);
    axis.normalize();
    const double angle = std::abs(cfg.sigma_r * gauss(rng));
    const Eigen::Quaterniond noise(Eigen::AngleAxisd(angle, axis));
    p.pose.rotation = (noise * p.pose.rotation).normalized();
}

}  // namespace

ParticleSet diffuse(const ParticleSet& ps, const DiffusionConfig& cfg,
                    std::mt19937_64& rng) {
    ps.validate();
    cfg.validate();
    ParticleSet out = ps;
    for (Particle& p : out.particles) diffuse_particle(p, cfg, rng);
    return out;
}

Eigen::Quaterniond uniform_quaternion(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q;
    double n2;
    do {
        q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        n2 = q.squaredNorm();
    } while (n2 < 1e-12);
    q.normalize();
    return q;
}

PoseEstimate estimate(const Mask& seg, const CenterVoteField& votes,
                      const DepthLikelihoodVolume& dlv,
                      const ObjectModel& model, const CameraModel& cam,
                      const LikelihoodConfig& like_cfg,
                      const DiffusionConfig& diff_cfg,
                      const TerminationConfig& term_cfg, std::uint64_t seed) {
    like_cfg.validate();
    diff_cfg.validate();
    term_cfg.validate();
    model.validate();
    if (!seg.any()) throw DomainError("estimate: empty segmentation mask");

    const BoundedMask seg_region = bounded_from(seg);
    const BoundedMask seg_boundary =
        boundary_bounded(seg_region, like_cfg.boundary_thickness);

    ParticleSet ps = init_samples(votes, dlv, cam, term_cfg.num_particles,
                                  derive_seed(seed, "init"));

    PoseEstimate best;
    best.weight = -1.0;
    std::vector<double> raw(ps.particles.size(), 0.0);
    int iterations = 0;
    for (int iter = 1; iter <= term_cfg.max_iterations; ++iter) {
        iterations = iter;
        parallel_for(ps.particles.size(), [&](std::size_t i) {
            const BoundedMask silh = project_silhouette_bounded(
                model, ps.particles[i].pose, cam, seg.width, seg.height,
                like_cfg.splat_radius);
            const BoundedMask silh_boundary =
                boundary_bounded(silh, like_cfg.boundary_thickness);
            raw[i] = weight_bounded(silh, seg_region, silh_boundary,
                                    seg_boundary, like_cfg);
        });
        double max_raw = -1.0;
        for (std::size_t i = 0; i < ps.particles.size(); ++i) {
            if (raw[i] > best.weight) {
                best.weight = raw[i];
                best.pose = ps.particles[i].pose;
            }
            max_raw = std::max(max_raw, raw[i]);
        }
        if (max_raw >= term_cfg.weight_threshold ||
            iter == term_cfg.max_iterations)
            break;

        double sum = 0.0;
        ps.normalized = false;
        for (std::size_t i = 0; i < ps.particles.size(); ++i) {
            ps.particles[i].weight = raw[i];
            sum += raw[i];
        }
        if (sum > 0.0) {
            ps.normalize();
        } else {
            // Nothing matched anywhere; keep exploring from a uniform prior.
            for (Particle& p : ps.particles)
                p.weight = 1.0 / static_cast<double>(ps.particles.size());
            ps.normalized = true;
        }
        auto resample_rng =
            make_engine(seed, "resample", static_cast<std::uint64_t>(iter));
        ps = resample(ps, resample_rng);
        for (std::size_t i = 0; i < ps.particles.size(); ++i) {
            auto rng = make_engine(seed, "diffuse",
                                   static_cast<std::uint64_t>(iter), i);
            diffuse_particle(ps.particles[i], diff_cfg, rng);
        }
        ps.normalized = true;
    }
    best.iterations = iterations;
    return best;
}

void store_pose_estimate(const PoseEstimate& est, const fs::path& path) {
    est.pose.validate();
    json doc = pose_to_json(est.pose);
    doc["weight"] = est.weight;
    doc["iterations"] = est.iterations;
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out)
        throw ParseError("store_pose_estimate: failed to write " +
                         path.string());
}

PoseEstimate load_pose_estimate(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_pose_estimate: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_pose_estimate: malformed JSON: " +
                         std::string(e.what()));
    }
    require_known_keys(doc, {"translation_m", "quaternion_wxyz", "weight",
                             "iterations"},
                       "pose estimate");
    PoseEstimate est;
    json pose_only = {{"translation_m", doc.at("translation_m")},
                      {"quaternion_wxyz", doc.at("quaternion_wxyz")}};
    est.pose = pose_from_json(pose_only, "pose estimate");
    try {
        est.weight = doc.at("weight").get<double>();
        est.iterations = doc.at("iterations").get<int>();
    } catch (const json::exception& e) {
        throw ParseError("load_pose_estimate: missing field: " +
                         std::string(e.what()));
    }
    return est;
}

}  // namespace plenopose
