// Acceptance suite: eight end-to-end checks of the toolkit's headline
// guarantees, one PASS/FAIL line each. Exit status is the number of failures.
//
// Run all criteria:            plenopose_acceptance
// Run a subset (for triage):   plenopose_acceptance 1 3 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <unistd.h>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <plenopose/dlv.hpp>
#include <plenopose/eval.hpp>
#include <plenopose/filters.hpp>
#include <plenopose/lightfield.hpp>
#include <plenopose/losses.hpp>
#include <plenopose/model.hpp>
#include <plenopose/parallel.hpp>
#include <plenopose/pipeline.hpp>
#include <plenopose/pose.hpp>
#include <plenopose/rng.hpp>
#include <plenopose/scene.hpp>
#include <plenopose/votes.hpp>

namespace fs = std::filesystem;
using namespace plenopose;
using Clock = std::chrono::steady_clock;

namespace {

double secs_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: planted-pose recovery under the published budget.
// ---------------------------------------------------------------------------

// Termination settings for the acceptance scene. The early-exit threshold
// sits between the best weight reachable by wrong-basin poses (~0.77 on this
// scene) and the weight of near-truth poses (~0.9), so convergent runs stop
// early while hard runs keep the full iteration budget. On 60 probe seeds the
// estimates never improve after iteration 32, so the cap trades no accuracy
// for a bounded worst-case runtime.
constexpr double kPlantedWeightThreshold = 0.85;
constexpr int kPlantedMaxIterations = 32;
constexpr int kPlantedModelPoints = 8000;
constexpr std::uint64_t kPlantedFirstSeed = 1000;  // seeds 1000..1019

SceneSpec planted_scene_spec() {
    SceneSpec spec;
    spec.camera.fx = 500.0;
    spec.camera.fy = 500.0;
    spec.camera.cx = 111.5;
    spec.camera.cy = 111.5;
    spec.camera.baseline = 0.01;
    spec.camera.image_w = 224;
    spec.camera.image_h = 224;
    spec.background.depth = 1.0;
    spec.background.texture_seed = 11;
    SceneObject obj;
    obj.label = "cylinder";
    obj.mesh = ParametricMesh::cylinder(0.04, 0.12);
    obj.pose.translation = {0.0, 0.0, 0.5};
    const double s = std::sqrt(0.5);
    obj.pose.rotation = Eigen::Quaterniond(s, 0.0, s, 0.0);  // side-on
    obj.alpha = 0.85;
    spec.objects.push_back(obj);
    return spec;
}

bool criterion_planted_pose(std::string& detail) {
    const SceneSpec spec = planted_scene_spec();
    const RenderOutputs out = render_scene(spec);
    const Mask seg = seg_union_mask(out.seg);

    DlvConfig dcfg;
    dcfg.cost_scale = 0.02;
    auto t0 = Clock::now();
    const DepthLikelihoodVolume dlv = build_dlv(
        out.lightfield, spec.camera,
        {0, 0, spec.camera.image_w, spec.camera.image_h}, dcfg);
    const double dlv_s = secs_since(t0);

    const ObjectModel model =
        make_object(spec.objects[0].mesh, kPlantedModelPoints, "cylinder");
    const Pose gt = spec.objects[0].pose;

    const LikelihoodConfig like;  // defaults: eta 0.8, splat 2, thickness 1
    DiffusionConfig diff;
    diff.sigma_t = 0.08;
    diff.sigma_r = 0.4;
    TerminationConfig term;
    term.weight_threshold = kPlantedWeightThreshold;
    term.max_iterations = kPlantedMaxIterations;
    term.num_particles = 400;

    int pass = 0;
    double worst_err = 0.0, worst_total_s = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::uint64_t seed = kPlantedFirstSeed + k;
        t0 = Clock::now();
        const PoseEstimate est = estimate(seg, out.votes, dlv, model,
                                          spec.camera, like, diff, term, seed);
        const double total_s = dlv_s + secs_since(t0);
        const double err = add_s(model, est.pose, gt);
        pass += err < 0.01;
        worst_err = std::max(worst_err, err);
        worst_total_s = std::max(worst_total_s, total_s);
    }

    std::ostringstream os;
    os << "ADD-S < 0.01 m on " << pass << "/20 seeds (worst "
       << worst_err << " m), worst per-object runtime " << worst_total_s
       << " s";
    detail = os.str();
    return pass >= 18 && worst_total_s < 10.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: depth likelihood volume localizes a planted textured plane.
// ---------------------------------------------------------------------------

bool criterion_dlv_plane(std::string& detail) {
    SceneSpec spec;
    spec.camera.fx = 500.0;
    spec.camera.fy = 500.0;
    spec.camera.cx = 111.5;
    spec.camera.cy = 111.5;
    spec.camera.baseline = 0.01;
    spec.camera.image_w = 224;
    spec.camera.image_h = 224;
    spec.background.depth = 0.5;  // the planted plane
    spec.background.texture_seed = 21;
    const RenderOutputs out = render_scene(spec);

    DlvConfig cfg;  // 64 planes over [0.3, 1.0] m
    const auto t0 = Clock::now();
    const DepthLikelihoodVolume dlv = build_dlv(
        out.lightfield, spec.camera,
        {0, 0, spec.camera.image_w, spec.camera.image_h}, cfg);
    const double build_s = secs_since(t0);

    // Index of the plane at exactly 0.5 m (the grid is uniform in inverse
    // depth, so 1/0.5 lands exactly on a knot).
    int true_k = 0;
    for (int k = 0; k < dlv.num_planes(); ++k)
        if (std::abs(dlv.depths[k] - 0.5) < 1e-9) true_k = k;

    const Image center =
        subaperture_view(out.lightfield, out.lightfield.center_s(),
                         out.lightfield.center_t());
    std::size_t gated = 0, hits = 0;
    for (int y = 1; y < center.height - 1; ++y)
        for (int x = 1; x < center.width - 1; ++x) {
            // Texture contrast: 3x3 luminance range of the center view.
            double lo = 1e300, hi = -1e300;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    double lum = 0.0;
                    for (int c = 0; c < 3; ++c)
                        lum += center.at(y + dy, x + dx, c);
                    lum /= 3.0;
                    lo = std::min(lo, lum);
                    hi = std::max(hi, lum);
                }
            if (hi - lo <= 0.05) continue;
            ++gated;
            int best_k = 0;
            double best_v = -1.0;
            for (int k = 0; k < dlv.num_planes(); ++k) {
                const double v = dlv.value(x, y, k);
                if (v > best_v) {
                    best_v = v;
                    best_k = k;
                }
            }
            hits += std::abs(best_k - true_k) <= 1;
        }

    const double frac =
        gated == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(gated);
    std::ostringstream os;
    os << "argmax within one plane of 0.5 m at " << 100.0 * frac << "% of "
       << gated << " textured pixels, build " << build_s << " s";
    detail = os.str();
    return gated > 1000 && frac >= 0.95 && build_s < 5.0;
}

// ---------------------------------------------------------------------------
// Criterion 3: analytic gradients match central finite differences.
// ---------------------------------------------------------------------------

constexpr double kFdStep = 1e-3;
constexpr double kFdTol = 1e-4;
// Non-differentiable points are excluded by requiring every ReLU
// pre-activation (or L1 residual component) to sit further than this margin
// from its kink; instances that violate it are redrawn with a fresh seed.
constexpr double kKinkMargin = 2.0 * kFdStep;

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

LightField4D random_field(int sh, int sw, int ah, int aw, std::uint64_t seed) {
    LightField4D lf(sh, sw, ah, aw);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : lf.data) v = uni(rng);
    return lf;
}

FeatureMap random_upstream(int h, int w, int c, std::uint64_t seed) {
    FeatureMap up(h, w, c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (double& v : up.data) v = uni(rng);
    return up;
}

double scalar_loss(const FeatureMap& out, const FeatureMap& up) {
    double acc = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        acc += out.data[i] * up.data[i];
    return acc;
}

// Smallest |pre-activation| across the bank application; the FD step must
// not be able to flip any ReLU branch.
template <typename Bank, typename ApplyFn>
double min_preactivation(const LightField4D& lf, Bank bank, ApplyFn apply) {
    Bank linear = bank;
    linear.activation = Activation::Identity;
    const FeatureMap pre = apply(lf, linear);
    double m = 1e300;
    for (double v : pre.data) m = std::min(m, std::abs(v));
    return m;
}

bool angular_fd_ok(double& worst) {
    int accepted = 0;
    for (std::uint64_t seed = 1; accepted < 10 && seed < 300; ++seed) {
        const LightField4D lf = random_field(5, 5, 3, 3, seed);
        const AngularFilterBank bank =
            make_angular_bank(2, 3, 3, Activation::Relu, seed ^ 0x9e37);
        const auto apply = [](const LightField4D& f,
                              const AngularFilterBank& b) {
            return apply_angular(f, b);
        };
        if (min_preactivation(lf, bank, apply) <= kKinkMargin) continue;
        ++accepted;
        const FeatureMap up = random_upstream(5, 5, 2, seed ^ 0x51f);
        const AngularVjp vjp = filter_vjp(lf, bank, up);
        // Every bank weight.
        for (std::size_t i = 0; i < bank.weights.size(); ++i) {
            AngularFilterBank hi = bank, lo = bank;
            hi.weights[i] += kFdStep;
            lo.weights[i] -= kFdStep;
            const double fd = (scalar_loss(apply_angular(lf, hi), up) -
                               scalar_loss(apply_angular(lf, lo), up)) /
                              (2.0 * kFdStep);
            worst = std::max(worst, rel_err(fd, vjp.grad_weights.weights[i]));
        }
        // Every input coordinate.
        for (std::size_t i = 0; i < lf.data.size(); ++i) {
            LightField4D hi = lf, lo = lf;
            hi.data[i] += kFdStep;
            lo.data[i] -= kFdStep;
            const double fd = (scalar_loss(apply_angular(hi, bank), up) -
                               scalar_loss(apply_angular(lo, bank), up)) /
                              (2.0 * kFdStep);
            worst = std::max(worst, rel_err(fd, vjp.grad_input.data[i]));
        }
    }
    return accepted == 10 && worst <= kFdTol;
}

bool epi_fd_ok(SliceOrientation orient, double& worst) {
    int accepted = 0;
    for (std::uint64_t seed = 1; accepted < 10 && seed < 300; ++seed) {
        const LightField4D lf = random_field(6, 6, 3, 3, seed ^ 0xabc);
        const EpiFilterBank bank = make_epi_bank(orient, 3, 2, 3, 3,
                                                 Activation::Relu, seed ^ 0x7e1);
        const auto apply = [](const LightField4D& f, const EpiFilterBank& b) {
            return apply_epi(f, b);
        };
        if (min_preactivation(lf, bank, apply) <= kKinkMargin) continue;
        ++accepted;
        const FeatureMap up = random_upstream(6, 6, 2, seed ^ 0x222);
        const EpiVjp vjp = filter_vjp(lf, bank, up);
        for (std::size_t i = 0; i < bank.weights.size(); ++i) {
            EpiFilterBank hi = bank, lo = bank;
            hi.weights[i] += kFdStep;
            lo.weights[i] -= kFdStep;
            const double fd = (scalar_loss(apply_epi(lf, hi), up) -
                               scalar_loss(apply_epi(lf, lo), up)) /
                              (2.0 * kFdStep);
            worst = std::max(worst, rel_err(fd, vjp.grad_weights.weights[i]));
        }
        for (std::size_t i = 0; i < lf.data.size(); ++i) {
            LightField4D hi = lf, lo = lf;
            hi.data[i] += kFdStep;
            lo.data[i] -= kFdStep;
            const double fd = (scalar_loss(apply_epi(hi, bank), up) -
                               scalar_loss(apply_epi(lo, bank), up)) /
                              (2.0 * kFdStep);
            worst = std::max(worst, rel_err(fd, vjp.grad_input.data[i]));
        }
    }
    return accepted == 10 && worst <= kFdTol;
}

// Random vote field kept clear of every L1 / |.| kink so central differences
// see a locally smooth function.
CenterVoteField clean_votes(int h, int w, std::uint64_t seed,
                            const Eigen::Vector2d& g, double tau) {
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        CenterVoteField votes(h, w);
        std::mt19937_64 rng(seed ^ (attempt * 0x9e3779b97f4a7c15ull));
        std::uniform_real_distribution<double> off(-3.0, 3.0);
        std::uniform_real_distribution<double> conf(0.1, 0.9);
        std::bernoulli_distribution pick(0.6);
        bool ok = true, any = false;
        for (int y = 0; y < h && ok; ++y)
            for (int x = 0; x < w && ok; ++x) {
                const std::size_t i = votes.index(y, x);
                if (!pick(rng)) continue;
                votes.mask.at(y, x) = 1;
                any = true;
                votes.offset_x[i] = off(rng);
                votes.offset_y[i] = off(rng);
                votes.confidence[i] = conf(rng);
                const Eigen::Vector2d c = votes.voted_center(y, x);
                const double r = (c - g).norm();
                const double margin = 5e-3;
                if (std::abs(c.x() - g.x()) <= margin ||
                    std::abs(c.y() - g.y()) <= margin || r <= margin ||
                    std::abs(votes.confidence[i] - std::exp(-tau * r)) <=
                        margin)
                    ok = false;
            }
        if (ok && any) return votes;
    }
    throw std::runtime_error("clean_votes: no kink-free instance found");
}

bool losses_fd_ok(double& worst) {
    // Frequency-weighted cross-entropy (smooth; no kink handling needed).
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        std::uniform_int_distribution<int> cls(0, 2);
        SegPrediction pred;
        pred.logits = FeatureMap(4, 5, 3);
        for (double& v : pred.logits.data) v = uni(rng);
        SegTarget target;
        target.labels = ClassMap(4, 5);
        for (auto& v : target.labels.labels) v = static_cast<std::uint8_t>(cls(rng));
        const FeatureMap grad = seg_loss_grad(pred, target);
        for (std::size_t i = 0; i < pred.logits.data.size(); ++i) {
            SegPrediction hi = pred, lo = pred;
            hi.logits.data[i] += kFdStep;
            lo.logits.data[i] -= kFdStep;
            const double fd =
                (seg_loss(hi, target) - seg_loss(lo, target)) / (2.0 * kFdStep);
            worst = std::max(worst, rel_err(fd, grad.data[i]));
        }
    }
    // L1 center-offset and confidence losses on kink-free vote fields.
    const Eigen::Vector2d g(3.25, 2.75);
    const double tau = 0.5;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const CenterVoteField votes = clean_votes(5, 6, seed, g, tau);
        const OffsetLossGrad og = center_offset_loss_grad(votes, g);
        const ConfidenceLossGrad cg = confidence_loss_grad(votes, g, tau);
        for (int y = 0; y < votes.height; ++y)
            for (int x = 0; x < votes.width; ++x) {
                if (!votes.mask.at(y, x)) continue;
                const std::size_t i = votes.index(y, x);
                for (int axis = 0; axis < 3; ++axis) {
                    CenterVoteField hi = votes, lo = votes;
                    std::vector<double>& hv =
                        axis == 0 ? hi.offset_x
                                  : (axis == 1 ? hi.offset_y : hi.confidence);
                    std::vector<double>& lv =
                        axis == 0 ? lo.offset_x
                                  : (axis == 1 ? lo.offset_y : lo.confidence);
                    hv[i] += kFdStep;
                    lv[i] -= kFdStep;
                    if (axis < 2) {
                        const double fd = (center_offset_loss(hi, g) -
                                           center_offset_loss(lo, g)) /
                                          (2.0 * kFdStep);
                        const double an =
                            axis == 0 ? og.d_offset_x[i] : og.d_offset_y[i];
                        worst = std::max(worst, rel_err(fd, an));
                    }
                    const double fd = (confidence_loss(hi, g, tau) -
                                       confidence_loss(lo, g, tau)) /
                                      (2.0 * kFdStep);
                    const double an =
                        axis == 0 ? cg.d_offset_x[i]
                                  : (axis == 1 ? cg.d_offset_y[i]
                                               : cg.d_confidence[i]);
                    worst = std::max(worst, rel_err(fd, an));
                }
            }
    }
    return worst <= kFdTol;
}

bool criterion_gradients(std::string& detail) {
    double worst = 0.0;
    const bool ok_ang = angular_fd_ok(worst);
    bool ok_epi = true;
    for (SliceOrientation o : {SliceOrientation::S, SliceOrientation::T}) {
        double w = 0.0;
        ok_epi = epi_fd_ok(o, w) && ok_epi;
        worst = std::max(worst, w);
    }
    double w = 0.0;
    const bool ok_loss = losses_fd_ok(w);
    worst = std::max(worst, w);
    std::ostringstream os;
    os << "worst relative error " << worst << " over >= 10 instances per "
       << "operator (step " << kFdStep << ")";
    detail = os.str();
    return ok_ang && ok_epi && ok_loss;
}

// ---------------------------------------------------------------------------
// Criterion 4: likelihood weight unit cases and symmetry.
// ---------------------------------------------------------------------------

Mask rect_mask(int h, int w, int y0, int x0, int y1, int x1) {
    Mask m(h, w);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.at(y, x) = 1;
    return m;
}

double weight_of(const Mask& a, const Mask& b, double eta) {
    LikelihoodConfig cfg;
    cfg.eta = eta;
    return likelihood_weight(a, b, boundary(a, cfg.boundary_thickness),
                             boundary(b, cfg.boundary_thickness), cfg);
}

bool criterion_weight_properties(std::string& detail) {
    const Mask s = rect_mask(16, 16, 4, 4, 10, 12);
    bool ok = true;
    std::ostringstream os;

    if (std::abs(weight_of(s, s, 1.0) - 1.0) > 1e-15 ||
        std::abs(weight_of(s, s, 0.8) - 1.0) > 1e-15) {
        ok = false;
        os << "identity != 1; ";
    }
    const Mask far = rect_mask(16, 16, 12, 13, 15, 16);
    if (weight_of(s, far, 1.0) != 0.0) {
        ok = false;
        os << "disjoint != 0 at eta 1; ";
    }
    // Two 2x4 rectangles overlapping on half of each: IoU = 4 / 12 = 1/3.
    const Mask a = rect_mask(8, 8, 0, 0, 2, 4);
    const Mask b = rect_mask(8, 8, 0, 2, 2, 6);
    if (std::abs(weight_of(a, b, 1.0) - 1.0 / 3.0) > 1e-15) {
        ok = false;
        os << "half-overlap != 1/3 at eta 1; ";
    }

    std::mt19937_64 rng(404);
    std::bernoulli_distribution bit(0.4);
    double max_asym = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Mask x(12, 12), y(12, 12);
        for (int i = 0; i < 12 * 12; ++i) {
            x.data[i] = bit(rng);
            y.data[i] = bit(rng);
        }
        const double wxy = weight_of(x, y, 0.8);
        const double wyx = weight_of(y, x, 0.8);
        max_asym = std::max(max_asym, std::abs(wxy - wyx));
        if (wxy < 0.0 || wxy > 1.0) ok = false;
    }
    if (max_asym != 0.0) {
        ok = false;
        os << "asymmetry " << max_asym << "; ";
    }
    os << "identity/disjoint/half-overlap cases and symmetry on 100 pairs";
    detail = os.str();
    return ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: initial sampling distribution and exact back-projection.
// ---------------------------------------------------------------------------

bool criterion_init_sampling(std::string& detail) {
    CameraModel cam;
    cam.fx = cam.fy = 100.0;
    cam.cx = cam.cy = 7.5;

    DepthLikelihoodVolume dlv;
    dlv.roi = {4, 4, 8, 8};
    dlv.depths = {0.4, 0.5};
    dlv.config.depth_min = 0.4;
    dlv.config.depth_max = 0.5;
    dlv.config.num_planes = 2;
    dlv.values.assign(static_cast<std::size_t>(8) * 8 * 2, 0.5f);
    const auto cell = [&](int u, int v, int k) -> float& {
        return dlv.values[dlv.index(u, v, k)];
    };
    cell(5, 6, 0) = 0.75f;  // pixel A: rows must stay normalized
    cell(5, 6, 1) = 0.25f;
    cell(9, 10, 0) = 0.0f;  // pixel B
    cell(9, 10, 1) = 1.0f;

    CenterVoteField votes(16, 16);
    const auto aim = [&](int y, int x, double cx, double cy, double conf) {
        const std::size_t i = votes.index(y, x);
        votes.mask.at(y, x) = 1;
        votes.offset_x[i] = cx - x;
        votes.offset_y[i] = cy - y;
        votes.confidence[i] = conf;
    };
    aim(0, 0, 5.0, 6.0, 0.8);   // votes for pixel A = (u 5, v 6)
    aim(0, 1, 9.0, 10.0, 0.2);  // votes for pixel B = (u 9, v 10)

    const int n = 10000;
    const ParticleSet ps = init_samples(votes, dlv, cam, n, 7042);

    // Expected cell probabilities: confidence times depth likelihood.
    struct Cell {
        double u, v, d, p;
        long count = 0;
    };
    std::vector<Cell> cells = {{5, 6, 0.4, 0.6},
                               {5, 6, 0.5, 0.2},
                               {9, 10, 0.5, 0.2}};
    double worst_bp = 0.0;
    long matched = 0;
    bool quats_ok = true;
    for (const Particle& p : ps.particles) {
        quats_ok = quats_ok && std::abs(p.pose.rotation.norm() - 1.0) <= 1e-12;
        for (Cell& c : cells) {
            const Eigen::Vector3d expect((c.u - cam.cx) * c.d / cam.fx,
                                         (c.v - cam.cy) * c.d / cam.fy, c.d);
            const double diff = (p.pose.translation - expect).norm();
            if (diff <= 1e-9) {
                worst_bp = std::max(worst_bp, diff);
                ++c.count;
                ++matched;
                break;
            }
        }
    }

    bool freq_ok = true;
    std::ostringstream os;
    for (const Cell& c : cells) {
        const double sigma = std::sqrt(n * c.p * (1.0 - c.p));
        if (std::abs(c.count - n * c.p) > 3.0 * sigma) freq_ok = false;
        os << "cell(" << c.u << "," << c.v << "," << c.d << ") " << c.count
           << "/" << n * c.p << "  ";
    }
    os << "back-projection worst " << worst_bp << " m";
    detail = os.str();
    return matched == n && freq_ok && worst_bp <= 1e-12 && quats_ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: ADD-S equals brute force; AUC closed forms.
// ---------------------------------------------------------------------------

bool criterion_eval_exactness(std::string& detail) {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        ParametricMesh mesh;
        if (trial % 2 == 0) {
            mesh = ParametricMesh::cylinder(0.02 + 0.02 * std::abs(uni(rng)),
                                            0.05 + 0.05 * std::abs(uni(rng)));
        } else {
            mesh = ParametricMesh::lathe(
                {{-0.04, 0.015}, {0.0, 0.03}, {0.05, 0.01}});
        }
        const ObjectModel model =
            make_object(mesh, 150, "m" + std::to_string(trial));
        const auto rand_pose = [&] {
            Pose p;
            p.translation =
                Eigen::Vector3d(uni(rng), uni(rng), uni(rng)) * 0.05;
            p.translation.z() += 0.5;
            Eigen::Quaterniond q(uni(rng), uni(rng), uni(rng), uni(rng));
            while (q.squaredNorm() < 1e-6)
                q = Eigen::Quaterniond(uni(rng), uni(rng), uni(rng), uni(rng));
            q.normalize();
            p.rotation = q;
            return p;
        };
        const Pose est = rand_pose(), gt = rand_pose();
        worst = std::max(worst, std::abs(add_s(model, est, gt) -
                                         add_s_brute(model, est, gt)));
    }

    double worst_auc = 0.0;
    for (double e : {0.01, 0.05, 0.09}) {
        const std::vector<double> errors(7, e);
        const double a = auc(accuracy_curve(errors, kDefaultPoseThreshold));
        worst_auc = std::max(worst_auc, std::abs(a - (1.0 - e / 0.1)));
    }

    std::ostringstream os;
    os << "max |add_s - brute| " << worst << " over 50 models, max AUC "
       << "closed-form gap " << worst_auc;
    detail = os.str();
    return worst <= 1e-12 && worst_auc <= 1e-12;
}

// ---------------------------------------------------------------------------
// Criterion 7: end-to-end determinism and thread-count invariance.
// ---------------------------------------------------------------------------

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("plenopose_accept_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::set<fs::path> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel_a.insert(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rel_b.insert(fs::relative(e.path(), b));
    if (rel_a != rel_b) {
        why = "file lists differ";
        return false;
    }
    for (const auto& rel : rel_a)
        if (slurp(a / rel) != slurp(b / rel)) {
            why = "content differs: " + rel.string();
            return false;
        }
    return true;
}

bool criterion_determinism(std::string& detail) {
    const TempDir dir("det");
    SceneSpec spec;
    spec.camera.fx = 200.0;
    spec.camera.fy = 200.0;
    spec.camera.cx = 47.5;
    spec.camera.cy = 47.5;
    spec.camera.baseline = 0.01;
    spec.camera.image_w = 96;
    spec.camera.image_h = 96;
    spec.background.depth = 1.0;
    spec.background.texture_seed = 3;
    SceneObject obj;
    obj.label = "cylinder";
    obj.mesh = ParametricMesh::cylinder(0.03, 0.09);
    obj.pose.translation = {0.0, 0.0, 0.5};
    const double s = std::sqrt(0.5);
    obj.pose.rotation = Eigen::Quaterniond(s, 0.0, s, 0.0);
    obj.alpha = 0.85;
    spec.objects.push_back(obj);

    const fs::path input = dir.path / "scene";
    synth_scene(spec, input);

    PipelineConfig cfg;
    cfg.seed = 11;
    cfg.dlv.num_planes = 12;
    cfg.termination.num_particles = 150;
    cfg.termination.max_iterations = 3;
    cfg.termination.weight_threshold = 1.01;
    const fs::path cfg_path = dir.path / "config.json";
    store_config(cfg, cfg_path);

    const std::string tool = PLENOPOSE_TOOL_PATH;
    const auto run_once = [&](const fs::path& out_dir) {
        const std::string cmd = tool + " run --input " + input.string() +
                                " --config " + cfg_path.string() + " --out " +
                                out_dir.string() + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    const fs::path out1 = dir.path / "out1", out2 = dir.path / "out2";
    if (run_once(out1) != 0 || run_once(out2) != 0) {
        detail = "run tool exited nonzero";
        return false;
    }
    std::string why;
    if (!trees_identical(out1, out2, why)) {
        detail = "repeat run not byte-identical: " + why;
        return false;
    }

    // Depth likelihood volumes must not depend on the thread budget.
    const RenderOutputs out = render_scene(spec);
    DlvConfig dcfg;
    dcfg.num_planes = 16;
    set_thread_budget(1);
    const DepthLikelihoodVolume one =
        build_dlv(out.lightfield, spec.camera, {0, 0, 96, 96}, dcfg);
    set_thread_budget(5);
    const DepthLikelihoodVolume five =
        build_dlv(out.lightfield, spec.camera, {0, 0, 96, 96}, dcfg);
    set_thread_budget(0);
    if (one.values.size() != five.values.size() ||
        std::memcmp(one.values.data(), five.values.data(),
                    one.values.size() * sizeof(float)) != 0) {
        detail = "DLV differs across thread budgets";
        return false;
    }
    detail = "repeat runs byte-identical; DLV bitwise equal across thread "
             "budgets 1 and 5";
    return true;
}

// ---------------------------------------------------------------------------
// Criterion 8: published reference constants ship with a documented gap.
// ---------------------------------------------------------------------------

bool criterion_reference_constants(std::string& detail) {
    const ReferenceScores& ref = reference_scores();
    bool ok = ref.segmentation.g_acc == 0.954 &&
              ref.segmentation.m_acc == 0.520 &&
              ref.segmentation.m_iou == 0.455 &&
              ref.segmentation.w_iou == 0.854 &&
              ref.segmentation.m_bfs == 0.390 && ref.auc_all == 0.45 &&
              ref.runtime_budget_s == 10.0 &&
              ref.auc_by_object.size() == 5;
    if (!ok) {
        detail = "constant values drifted";
        return false;
    }
    const fs::path readme = fs::path(PLENOPOSE_REPO_ROOT) / "README.md";
    const std::vector<char> text = slurp(readme);
    const std::string hay(text.begin(), text.end());
    if (hay.find("not reproducible") == std::string::npos) {
        detail = "README.md does not document the reproducibility gap";
        return false;
    }
    detail = "reference constants intact and documented as not reproducible";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* title;
        std::function<bool(std::string&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "planted-pose recovery within budget", criterion_planted_pose},
        {2, "depth likelihood volume localizes a planted plane",
         criterion_dlv_plane},
        {3, "analytic gradients match finite differences",
         criterion_gradients},
        {4, "likelihood weight unit cases and symmetry",
         criterion_weight_properties},
        {5, "initial sampling distribution and back-projection",
         criterion_init_sampling},
        {6, "ADD-S brute-force equality and AUC closed forms",
         criterion_eval_exactness},
        {7, "end-to-end determinism and thread invariance",
         criterion_determinism},
        {8, "reference constants with documented gap",
         criterion_reference_constants},
    };

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        std::string det;
        bool ok = false;
        try {
            ok = c.fn(det);
        } catch (const std::exception& e) {
            det = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.title, det.c_str());
        std::fflush(stdout);
        failures += !ok;
    }
    return failures;
}
