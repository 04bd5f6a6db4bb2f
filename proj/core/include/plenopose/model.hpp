#pragma once

// Parametric glassware stand-ins: solids of revolution about the local z axis
// (plain cylinders or lathe profiles), surface-sampled into point models for
// silhouette projection and symmetric pose error evaluation.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "plenopose/geometry.hpp"

namespace plenopose {

enum class MeshKind : int { Cylinder, Lathe };

// A surface of revolution about local z. The profile lists (z, radius) knots
// with strictly increasing z; consecutive knots span conical frusta, and the
// two end circles are closed with flat caps. A cylinder is the two-knot
// constant-radius special case, centered on the origin.
struct ParametricMesh {
    MeshKind kind = MeshKind::Cylinder;
    double radius = 0.0;  // cylinder only
    double height = 0.0;  // cylinder only
    std::vector<Eigen::Vector2d> profile;  // lathe only: (z, r) knots

    static ParametricMesh cylinder(double radius, double height);
    static ParametricMesh lathe(std::vector<Eigen::Vector2d> profile);

    // Unified (z, r) knot list for either kind.
    std::vector<Eigen::Vector2d> knots() const;
    void validate() const;
};

struct ObjectModel {
    std::string label;
    std::vector<Eigen::Vector3d> points;  // object local frame, meters
    double diameter = 0.0;                // max pairwise surface distance

    void validate() const;
};

// Exact maximum pairwise distance between surface points, from the profile
// knots in closed form.
double mesh_diameter(const ParametricMesh& mesh);

// Deterministic stratified sampling of exactly n_points surface points,
// allocated to faces (frusta and caps) proportionally to area.
ObjectModel make_object(const ParametricMesh& mesh, int n_points,
                        const std::string& label = "object");

// First intersection of the ray origin + tau * dir (tau > 0) with the posed
// surface; returns the smallest such tau.
std::optional<double> intersect_ray(const ParametricMesh& mesh,
                                    const Pose& pose,
                                    const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir);

// obj.json round-trip (label, points, diameter).
void store_object(const ObjectModel& model, const std::filesystem::path& path);
ObjectModel load_object(const std::filesystem::path& path);

}  // namespace plenopose
