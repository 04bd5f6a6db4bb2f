#include "plenopose/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

namespace {

constexpr std::uint64_t kPointSamplingSeed = 42;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

ParametricMesh ParametricMesh::cylinder(double radius, double height) {
    ParametricMesh m;
    m.kind = MeshKind::Cylinder;
    m.radius = radius;
    m.height = height;
    m.validate();
    return m;
}

ParametricMesh ParametricMesh::lathe(std::vector<Eigen::Vector2d> profile) {
    ParametricMesh m;
    m.kind = MeshKind::Lathe;
    m.profile = std::move(profile);
    m.validate();
    return m;
}

std::vector<Eigen::Vector2d> ParametricMesh::knots() const {
    if (kind == MeshKind::Cylinder)
        return {{-height / 2.0, radius}, {height / 2.0, radius}};
    return profile;
}

void ParametricMesh::validate() const {
    if (kind == MeshKind::Cylinder) {
        if (!(radius > 0.0) || !(height > 0.0))
            throw DomainError("ParametricMesh: cylinder needs radius > 0 and "
                              "height > 0");
        return;
    }
    if (profile.size() < 2)
        throw DomainError("ParametricMesh: lathe profile needs >= 2 knots");
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (!std::isfinite(profile[i].x()) || !std::isfinite(profile[i].y()))
            throw DomainError("ParametricMesh: non-finite profile knot");
        if (!(profile[i].y() > 0.0))
            throw DomainError("ParametricMesh: profile radii must be > 0");
        if (i > 0 && !(profile[i].x() > profile[i - 1].x()))
            throw DomainError(
                "ParametricMesh: profile heights must strictly increase");
    }
}

void ObjectModel::validate() const {
    if (points.size() < 3)
        throw ValidationError("ObjectModel: needs at least 3 points");
    if (!(diameter > 0.0))
        throw ValidationError("ObjectModel: diameter must be > 0");
    for (const auto& p : points)
        if (!p.allFinite())
            throw ValidationError("ObjectModel: non-finite point");
}

double mesh_diameter(const ParametricMesh& mesh) {
    mesh.validate();
    const auto ks = mesh.knots();
    // Surface extremes lie on the knot circles; the farthest pair of points
    // on circles i and j sits diametrically opposed, at distance
    // sqrt((z_i - z_j)^2 + (r_i + r_j)^2).
    double best = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i)
        for (std::size_t j = i; j < ks.size(); ++j) {
            const double dz = ks[i].x() - ks[j].x();
            const double rr = ks[i].y() + ks[j].y();
            best = std::max(best, std::sqrt(dz * dz + rr * rr));
        }
    return best;
}

namespace {

struct Face {
    bool is_cap;
    // Frustum: knot circles (z0,r0) -> (z1,r1). Cap: z0/r0 only.
    double z0, r0, z1, r1;
    double area;
};

std::vector<Face> mesh_faces(const ParametricMesh& mesh) {
    const auto ks = mesh.knots();
    std::vector<Face> faces;
    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
        const double z0 = ks[i].x(), r0 = ks[i].y();
        const double z1 = ks[i + 1].x(), r1 = ks[i + 1].y();
        const double slant = std::hypot(z1 - z0, r1 - r0);
        faces.push_back(
            {false, z0, r0, z1, r1, std::numbers::pi * (r0 + r1) * slant});
    }
    const auto& lo = ks.front();
    const auto& hi = ks.back();
    faces.push_back({true, lo.x(), lo.y(), 0.0, 0.0,
                     std::numbers::pi * lo.y() * lo.y()});
    faces.push_back({true, hi.x(), hi.y(), 0.0, 0.0,
                     std::numbers::pi * hi.y() * hi.y()});
    return faces;
}

// Exact integer allocation proportional to face area (largest remainder).
std::vector<int> allocate_points(const std::vector<Face>& faces, int n) {
    const double total =
        std::accumulate(faces.begin(), faces.end(), 0.0,
                        [](double a, const Face& f) { return a + f.area; });
    std::vector<int> counts(faces.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const double quota = n * faces[i].area / total;
        counts[i] = static_cast<int>(std::floor(quota));
        assigned += counts[i];
        remainders.push_back({quota - counts[i], i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) {
                         return a.first > b.first;
                     });
    for (int k = 0; k < n - assigned; ++k)
        ++counts[remainders[static_cast<std::size_t>(k)].second];
    return counts;
}

}  // namespace

ObjectModel make_object(const ParametricMesh& mesh, int n_points,
                        const std::string& label) {
    mesh.validate();
    if (n_points < 100)
        throw DomainError("make_object: n_points must be >= 100, got " +
                          std::to_string(n_points));
    const auto faces = mesh_faces(mesh);
    const auto counts = allocate_points(faces, n_points);

    ObjectModel model;
    model.label = label;
    model.points.reserve(static_cast<std::size_t>(n_points));
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& face = faces[f];
        auto rng = make_engine(kPointSamplingSeed, "object_face",
                               static_cast<std::uint64_t>(f));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < counts[f]; ++i) {
            const double strat = (i + uni(rng)) / counts[f];
            const double theta = kTwoPi * uni(rng);
            if (face.is_cap) {
                const double rho = face.r0 * std::sqrt(strat);
                model.points.emplace_back(rho * std::cos(theta),
                                          rho * std::sin(theta), face.z0);
            } else {
                // Area density along the slant is proportional to the local
                // radius r(t) = r0 + dr*t; invert its CDF for t.
                const double dr = face.r1 - face.r0;
                double t;
                if (std::abs(dr) < 1e-15) {
                    t = strat;
                } else {
                    const double mean_r = face.r0 + dr / 2.0;
                    const double disc =
                        face.r0 * face.r0 + dr * (2.0 * strat * mean_r);
                    t = (-face.r0 + std::sqrt(std::max(0.0, disc))) / dr;
                }
                t = std::clamp(t, 0.0, 1.0);
                const double r = face.r0 + dr * t;
                const double z = face.z0 + (face.z1 - face.z0) * t;
                model.points.emplace_back(r * std::cos(theta),
                                          r * std::sin(theta), z);
            }
        }
    }
    model.diameter = mesh_diameter(mesh);
    model.validate();
    return model;
}

std::optional<double> intersect_ray(const ParametricMesh& mesh,
                                    const Pose& pose,
                                    const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir) {
    const Eigen::Quaterniond inv = pose.rotation.conjugate();
    const Eigen::Vector3d o = inv * (origin - pose.translation);
    const Eigen::Vector3d d = inv * dir;
    const auto ks = mesh.knots();
    constexpr double kMinTau = 1e-9;
    std::optional<double> best;
    auto consider = [&](double tau) {
        if (tau > kMinTau && (!best || tau < *best)) best = tau;
    };

    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
        const double z0 = ks[i].x(), r0 = ks[i].y();
        const double z1 = ks[i + 1].x(), r1 = ks[i + 1].y();
        // Lateral surface: x^2 + y^2 = (a*z + b)^2 with r linear in z.
        const double a = (r1 - r0) / (z1 - z0);
        const double b = r0 - a * z0;
        const double A = d.x() * d.x() + d.y() * d.y() - a * a * d.z() * d.z();
        const double B = 2.0 * (o.x() * d.x() + o.y() * d.y() -
                                (a * o.z() + b) * a * d.z());
        const double C =
            o.x() * o.x() + o.y() * o.y() -
            (a * o.z() + b) * (a * o.z() + b);
        auto consider_lateral = [&](double tau) {
            const double z = o.z() + tau * d.z();
            if (z >= z0 && z <= z1) consider(tau);
        };
        if (std::abs(A) < 1e-14) {
            if (std::abs(B) > 1e-14) consider_lateral(-C / B);
        } else {
            const double disc = B * B - 4.0 * A * C;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                consider_lateral((-B - sq) / (2.0 * A));
                consider_lateral((-B + sq) / (2.0 * A));
            }
        }
    }
    // Flat caps at the profile ends.
    for (const auto& end : {ks.front(), ks.back()}) {
        if (std::abs(d.z()) < 1e-14) continue;
        const double tau = (end.x() - o.z()) / d.z();
        const double px = o.x() + tau * d.x();
        const double py = o.y() + tau * d.y();
        if (px * px + py * py <= end.y() * end.y()) consider(tau);
    }
    return best;
}

void store_object(const ObjectModel& model, const fs::path& path) {
    model.validate();
    json doc;
    doc["label"] = model.label;
    doc["diameter_m"] = model.diameter;
    json pts = json::array();
    for (const auto& p : model.points)
        pts.push_back({p.x(), p.y(), p.z()});
    doc["points_m"] = std::move(pts);
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out) throw ParseError("store_object: failed to write " + path.string());
}

ObjectModel load_object(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_object: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_object: malformed JSON: " +
                         std::string(e.what()));
    }
    ObjectModel model;
    try {
        model.label = doc.at("label").get<std::string>();
        model.diameter = doc.at("diameter_m").get<double>();
        for (const json& p : doc.at("points_m"))
            model.points.emplace_back(p.at(0).get<double>(),
                                      p.at(1).get<double>(),
                                      p.at(2).get<double>());
    } catch (const json::exception& e) {
        throw ParseError("load_object: missing field: " +
                         std::string(e.what()));
    }
    model.validate();
    return model;
}

}  // namespace plenopose
