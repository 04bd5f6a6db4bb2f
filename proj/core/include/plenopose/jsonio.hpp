#pragma once

// Shared JSON helpers: strict key validation (unknown keys are hard errors,
// to catch config typos) and round-trips for poses, meshes, and cameras.

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "plenopose/geometry.hpp"
#include "plenopose/lightfield.hpp"
#include "plenopose/model.hpp"

namespace plenopose {

// Throws ConfigError naming the first key of `obj` not in `allowed`.
void require_known_keys(const nlohmann::json& obj,
                        std::initializer_list<const char*> allowed,
                        const std::string& context);

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j, const std::string& context);

nlohmann::json mesh_to_json(const ParametricMesh& mesh);
ParametricMesh mesh_from_json(const nlohmann::json& j,
                              const std::string& context);

nlohmann::json camera_to_json(const CameraModel& cam);
CameraModel camera_from_json(const nlohmann::json& j,
                             const std::string& context);

}  // namespace plenopose
