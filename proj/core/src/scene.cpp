#include "plenopose/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/jsonio.hpp"
#include "plenopose/parallel.hpp"
#include "plenopose/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

namespace {

double hash_unit(std::uint64_t key) {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

double lattice_value(std::uint64_t seed, int ix, int iy) {
    std::uint64_t key = seed;
    key = splitmix64(key ^ static_cast<std::uint64_t>(ix + (1 << 24)));
    key = splitmix64(key ^ static_cast<std::uint64_t>(iy + (1 << 24)));
    return static_cast<double>(key >> 11) * 0x1.0p-53;
}

// Band-limited value noise: bilinear interpolation of seeded lattice values
// at two spatial scales. Continuous over the whole plane, so views can sample
// arbitrarily shifted texture coordinates.
double value_noise(std::uint64_t seed, double x, double y) {
    struct Octave {
        double spacing, weight;
    };
    constexpr Octave octaves[] = {{4.0, 0.65}, {16.0, 0.35}};
    double v = 0.0;
    int oct = 0;
    for (const auto& o : octaves) {
        const double gx = x / o.spacing, gy = y / o.spacing;
        const int ix = static_cast<int>(std::floor(gx));
        const int iy = static_cast<int>(std::floor(gy));
        const double fx = gx - ix, fy = gy - iy;
        const std::uint64_t s = splitmix64(seed + 0x9E37 * oct);
        const double v00 = lattice_value(s, ix, iy);
        const double v01 = lattice_value(s, ix + 1, iy);
        const double v10 = lattice_value(s, ix, iy + 1);
        const double v11 = lattice_value(s, ix + 1, iy + 1);
        v += o.weight * ((1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                         fy * ((1.0 - fx) * v10 + fx * v11));
        ++oct;
    }
    return v;
}

double texture_sample(std::uint64_t seed, int channel, double x, double y,
                      double contrast) {
    const std::uint64_t chan_seed = derive_seed(seed, "channel",
                                                static_cast<std::uint64_t>(channel));
    return 0.5 + (value_noise(chan_seed, x, y) - 0.5) * 2.0 * contrast;
}

// First object hit along the center ray of pixel (x, y) in view (t, s);
// returns object index and depth, or -1.
int raycast(const SceneSpec& spec, const Eigen::Vector3d& origin,
            const Eigen::Vector3d& dir, double* depth) {
    int hit = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto tau =
            intersect_ray(spec.objects[i].mesh, spec.objects[i].pose, origin,
                          dir);
        if (tau && *tau < best) {
            best = *tau;
            hit = static_cast<int>(i);
        }
    }
    if (hit >= 0) *depth = best;
    return hit;
}

Eigen::Vector3d pixel_ray(const CameraModel& cam, double x, double y) {
    return {(x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0};
}

}  // namespace

void SceneSpec::validate() const {
    camera.validate();
    if (angular_h < 1 || angular_w < 1 || angular_h % 2 == 0 ||
        angular_w % 2 == 0)
        throw ValidationError("SceneSpec: angular extents must be odd and >= 1");
    if (!(background.depth > 0.0))
        throw ValidationError("SceneSpec: background depth must be > 0");
    if (!(background.contrast >= 0.0 && background.contrast <= 0.5))
        throw ValidationError("SceneSpec: contrast must be in [0, 0.5]");
    if (!(render.noise_std >= 0.0) || !(render.sparkle_rate >= 0.0) ||
        !(render.sparkle_rate <= 1.0))
        throw ValidationError("SceneSpec: bad render options");
    for (const auto& obj : objects) {
        obj.mesh.validate();
        obj.pose.validate();
        if (!(obj.pose.translation.z() > 0.0))
            throw ValidationError("SceneSpec: object '" + obj.label +
                                  "' must sit in front of the camera");
        const double reach = mesh_diameter(obj.mesh) / 2.0;
        if (!(background.depth > obj.pose.translation.z() + reach))
            throw ValidationError("SceneSpec: background plane must lie "
                                  "behind object '" + obj.label + "'");
        if (!(obj.alpha >= 0.0 && obj.alpha <= 1.0))
            throw ValidationError("SceneSpec: object alpha outside [0,1]");
    }
}

LightField4D render_lightfield(const SceneSpec& spec) {
    spec.validate();
    const CameraModel& cam = spec.camera;
    LightField4D lf(cam.image_h, cam.image_w, spec.angular_h, spec.angular_w);
    const int ct = lf.center_t(), cs = lf.center_s();
    const double disp_bg = depth_to_disparity(cam, spec.background.depth);
    std::vector<double> disp_obj(spec.objects.size());
    for (std::size_t i = 0; i < spec.objects.size(); ++i)
        disp_obj[i] =
            depth_to_disparity(cam, spec.objects[i].pose.translation.z());

    parallel_for(static_cast<std::size_t>(lf.angular_h) * lf.angular_w,
                 [&](std::size_t vi) {
        const int t = static_cast<int>(vi) / lf.angular_w;
        const int s = static_cast<int>(vi) % lf.angular_w;
        const double os = s - cs, ot = t - ct;
        const Eigen::Vector3d origin(os * cam.baseline, ot * cam.baseline,
                                     0.0);
        auto noise_rng = make_engine(spec.render.seed, "view_noise",
                                     static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(s));
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::uint64_t sparkle_seed =
            derive_seed(spec.render.seed, "sparkle",
                        static_cast<std::uint64_t>(t),
                        static_cast<std::uint64_t>(s));
        for (int y = 0; y < lf.spatial_h; ++y) {
            for (int x = 0; x < lf.spatial_w; ++x) {
                double px[3];
                for (int c = 0; c < 3; ++c)
                    px[c] = texture_sample(spec.background.texture_seed, c,
                                           x + disp_bg * os, y + disp_bg * ot,
                                           spec.background.contrast);
                double depth;
                const int hit = raycast(spec, origin, pixel_ray(cam, x, y),
                                        &depth);
                if (hit >= 0) {
                    const SceneObject& obj =
                        spec.objects[static_cast<std::size_t>(hit)];
                    const std::uint64_t bb_seed =
                        derive_seed(spec.background.texture_seed, "billboard",
                                    static_cast<std::uint64_t>(hit));
                    for (int c = 0; c < 3; ++c) {
                        const double surface =
                            obj.tint[c] +
                            texture_sample(bb_seed, c,
                                           x + disp_obj[static_cast<
                                               std::size_t>(hit)] * os,
                                           y + disp_obj[static_cast<
                                               std::size_t>(hit)] * ot,
                                           spec.background.contrast);
                        px[c] = (1.0 - obj.alpha) * px[c] + obj.alpha * surface;
                    }
                    if (spec.render.sparkle_rate > 0.0) {
                        const std::uint64_t key =
                            sparkle_seed +
                            static_cast<std::uint64_t>(y) * lf.spatial_w + x;
                        if (hash_unit(key) < spec.render.sparkle_rate)
                            for (double& v : px) v += 0.4;
                    }
                }
                for (int c = 0; c < 3; ++c) {
                    double v = px[c];
                    if (spec.render.noise_std > 0.0)
                        v += spec.render.noise_std * gauss(noise_rng);
                    lf.at(y, x, t, s, c) = std::clamp(v, 0.0, 1.0);
                }
            }
        }
    });
    return lf;
}

ClassMap render_segmentation(const SceneSpec& spec) {
    spec.validate();
    const CameraModel& cam = spec.camera;
    ClassMap seg(cam.image_h, cam.image_w);
    Mask silhouette(cam.image_h, cam.image_w);
    for (int y = 0; y < cam.image_h; ++y)
        for (int x = 0; x < cam.image_w; ++x) {
            double depth;
            if (raycast(spec, Eigen::Vector3d::Zero(), pixel_ray(cam, x, y),
                        &depth) >= 0)
                silhouette.at(y, x) = 1;
        }
    for (int y = 0; y < cam.image_h; ++y)
        for (int x = 0; x < cam.image_w; ++x) {
            if (silhouette.at(y, x)) {
                seg.at(y, x) = kClassTransparent;
                continue;
            }
            bool near = false;
            for (int dy = -kBoundaryBandPx; dy <= kBoundaryBandPx && !near;
                 ++dy)
                for (int dx = -kBoundaryBandPx; dx <= kBoundaryBandPx; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < cam.image_h && xx >= 0 &&
                        xx < cam.image_w && silhouette.at(yy, xx)) {
                        near = true;
                        break;
                    }
                }
            seg.at(y, x) = near ? kClassBoundary : kClassBackground;
        }
    return seg;
}

Image render_depth(const SceneSpec& spec) {
    spec.validate();
    const CameraModel& cam = spec.camera;
    Image depth_map(cam.image_h, cam.image_w, 1);
    for (int y = 0; y < cam.image_h; ++y)
        for (int x = 0; x < cam.image_w; ++x) {
            double depth = spec.background.depth;
            raycast(spec, Eigen::Vector3d::Zero(), pixel_ray(cam, x, y),
                    &depth);
            depth_map.at(y, x, 0) = depth;
        }
    return depth_map;
}

namespace {

void fill_votes(CenterVoteField& votes, const std::vector<std::pair<int, int>>&
                    pixels,
                const Eigen::Vector2d& center, double noise_std,
                ConfidenceProfile profile, std::mt19937_64& rng, double tau) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const auto& [x, y] : pixels) {
        const std::size_t i = votes.index(y, x);
        double hx = center.x() - x;
        double hy = center.y() - y;
        if (noise_std > 0.0) {
            hx += noise_std * gauss(rng);
            hy += noise_std * gauss(rng);
        }
        votes.offset_x[i] = hx;
        votes.offset_y[i] = hy;
        switch (profile) {
            case ConfidenceProfile::Constant:
                votes.confidence[i] = 1.0;
                break;
            case ConfidenceProfile::CenterDecay: {
                const double dist = std::hypot(center.x() - x, center.y() - y);
                votes.confidence[i] = std::exp(-dist / 20.0);
                break;
            }
            case ConfidenceProfile::ResidualExp: {
                const double res = std::hypot(center.x() - (x + hx),
                                              center.y() - (y + hy));
                votes.confidence[i] = std::exp(-tau * res);
                break;
            }
        }
        votes.mask.at(y, x) = 1;
    }
}

}  // namespace

CenterVoteField make_center_votes(const ClassMap& seg,
                                  const Eigen::Vector2d& gt_center_px,
                                  double offset_noise_std,
                                  ConfidenceProfile profile,
                                  std::uint64_t seed, double tau) {
    std::vector<std::pair<int, int>> pixels;
    for (int y = 0; y < seg.height; ++y)
        for (int x = 0; x < seg.width; ++x)
            if (seg.at(y, x) == kClassTransparent) pixels.push_back({x, y});
    if (pixels.empty())
        throw DomainError("make_center_votes: no transparent pixels");
    CenterVoteField votes(seg.height, seg.width);
    auto rng = make_engine(seed, "votes");
    fill_votes(votes, pixels, gt_center_px, offset_noise_std, profile, rng,
               tau);
    return votes;
}

RenderOutputs render_scene(const SceneSpec& spec, double vote_noise_std,
                           ConfidenceProfile profile) {
    spec.validate();
    RenderOutputs out;
    out.lightfield = render_lightfield(spec);
    out.seg = render_segmentation(spec);
    out.gt_depth = render_depth(spec);
    const CameraModel& cam = spec.camera;

    // Attribute each silhouette pixel to the nearest-hit object.
    std::vector<std::vector<std::pair<int, int>>> object_pixels(
        spec.objects.size());
    for (int y = 0; y < cam.image_h; ++y)
        for (int x = 0; x < cam.image_w; ++x) {
            if (out.seg.at(y, x) != kClassTransparent) continue;
            double depth;
            const int hit = raycast(spec, Eigen::Vector3d::Zero(),
                                    pixel_ray(cam, x, y), &depth);
            if (hit >= 0)
                object_pixels[static_cast<std::size_t>(hit)].push_back({x, y});
        }

    out.votes = CenterVoteField(cam.image_h, cam.image_w);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const Pose& pose = spec.objects[i].pose;
        const Eigen::Vector3d& c = pose.translation;
        const Eigen::Vector2d center(cam.fx * c.x() / c.z() + cam.cx,
                                     cam.fy * c.y() / c.z() + cam.cy);
        out.gt_poses.push_back(pose);
        out.gt_centers_px.push_back(center);
        if (object_pixels[i].empty()) continue;
        auto rng = make_engine(spec.render.seed, "votes",
                               static_cast<std::uint64_t>(i));
        fill_votes(out.votes, object_pixels[i], center, vote_noise_std,
                   profile, rng, 0.5);
    }
    return out;
}

GroundTruth ground_truth_of(const SceneSpec& spec,
                            const RenderOutputs& outputs) {
    GroundTruth gt;
    gt.camera = spec.camera;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        GroundTruth::Entry e;
        e.label = spec.objects[i].label;
        e.mesh = spec.objects[i].mesh;
        e.pose = outputs.gt_poses[i];
        e.center_px = outputs.gt_centers_px[i];
        e.center_depth_m = spec.objects[i].pose.translation.z();
        gt.objects.push_back(std::move(e));
    }
    return gt;
}

void store_scene_spec(const SceneSpec& spec, const fs::path& path) {
    spec.validate();
    json doc;
    doc["camera"] = camera_to_json(spec.camera);
    doc["angular"] = {{"h", spec.angular_h}, {"w", spec.angular_w}};
    doc["background"] = {{"depth_m", spec.background.depth},
                         {"texture_seed", spec.background.texture_seed},
                         {"contrast", spec.background.contrast}};
    json objs = json::array();
    for (const auto& obj : spec.objects) {
        json o;
        o["label"] = obj.label;
        o["mesh"] = mesh_to_json(obj.mesh);
        o["pose"] = pose_to_json(obj.pose);
        o["alpha"] = obj.alpha;
        o["tint"] = {obj.tint.x(), obj.tint.y(), obj.tint.z()};
        objs.push_back(std::move(o));
    }
    doc["objects"] = std::move(objs);
    doc["render"] = {{"noise_std", spec.render.noise_std},
                     {"sparkle_rate", spec.render.sparkle_rate},
                     {"seed", spec.render.seed}};
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out)
        throw ParseError("store_scene_spec: failed to write " + path.string());
}

SceneSpec load_scene_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_scene_spec: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_scene_spec: malformed JSON: " +
                         std::string(e.what()));
    }
    require_known_keys(doc, {"camera", "angular", "background", "objects",
                             "render"},
                       "scene spec");
    SceneSpec spec;
    try {
        spec.camera = camera_from_json(doc.at("camera"), "scene spec");
        require_known_keys(doc.at("angular"), {"h", "w"}, "scene spec angular");
        spec.angular_h = doc.at("angular").at("h").get<int>();
        spec.angular_w = doc.at("angular").at("w").get<int>();
        const json& bg = doc.at("background");
        require_known_keys(bg, {"depth_m", "texture_seed", "contrast"},
                           "scene spec background");
        spec.background.depth = bg.at("depth_m").get<double>();
        spec.background.texture_seed = bg.at("texture_seed").get<std::uint64_t>();
        spec.background.contrast = bg.at("contrast").get<double>();
        for (const json& o : doc.at("objects")) {
            require_known_keys(o, {"label", "mesh", "pose", "alpha", "tint"},
                               "scene spec object");
            SceneObject obj;
            obj.label = o.at("label").get<std::string>();
            obj.mesh = mesh_from_json(o.at("mesh"), "scene spec object");
            obj.pose = pose_from_json(o.at("pose"), "scene spec object");
            obj.alpha = o.at("alpha").get<double>();
            const json& tint = o.at("tint");
            obj.tint = {tint.at(0).get<double>(), tint.at(1).get<double>(),
                        tint.at(2).get<double>()};
            spec.objects.push_back(std::move(obj));
        }
        const json& r = doc.at("render");
        require_known_keys(r, {"noise_std", "sparkle_rate", "seed"},
                           "scene spec render");
        spec.render.noise_std = r.at("noise_std").get<double>();
        spec.render.sparkle_rate = r.at("sparkle_rate").get<double>();
        spec.render.seed = r.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ParseError("load_scene_spec: missing field: " +
                         std::string(e.what()));
    }
    spec.validate();
    return spec;
}

void store_ground_truth(const GroundTruth& gt, const fs::path& path) {
    json doc;
    doc["camera"] = camera_to_json(gt.camera);
    json objs = json::array();
    for (const auto& e : gt.objects) {
        json o;
        o["label"] = e.label;
        o["mesh"] = mesh_to_json(e.mesh);
        o["pose"] = pose_to_json(e.pose);
        o["center_px"] = {e.center_px.x(), e.center_px.y()};
        o["center_depth_m"] = e.center_depth_m;
        objs.push_back(std::move(o));
    }
    doc["objects"] = std::move(objs);
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out)
        throw ParseError("store_ground_truth: failed to write " +
                         path.string());
}

GroundTruth load_ground_truth(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_ground_truth: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_ground_truth: malformed JSON: " +
                         std::string(e.what()));
    }
    require_known_keys(doc, {"camera", "objects"}, "ground truth");
    GroundTruth gt;
    try {
        gt.camera = camera_from_json(doc.at("camera"), "ground truth");
        for (const json& o : doc.at("objects")) {
            require_known_keys(o, {"label", "mesh", "pose", "center_px",
                                   "center_depth_m"},
                               "ground truth object");
            GroundTruth::Entry e;
            e.label = o.at("label").get<std::string>();
            e.mesh = mesh_from_json(o.at("mesh"), "ground truth object");
            e.pose = pose_from_json(o.at("pose"), "ground truth object");
            e.center_px = {o.at("center_px").at(0).get<double>(),
                           o.at("center_px").at(1).get<double>()};
            e.center_depth_m = o.at("center_depth_m").get<double>();
            gt.objects.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ParseError("load_ground_truth: missing field: " +
                         std::string(e.what()));
    }
    return gt;
}

}  // namespace plenopose
