#include "plenopose/jsonio.hpp"

#include <algorithm>

#include "plenopose/errors.hpp"

using json = nlohmann::json;

namespace plenopose {

void require_known_keys(const json& obj,
                        std::initializer_list<const char*> allowed,
                        const std::string& context) {
    if (!obj.is_object())
        throw ConfigError(context + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end())
            throw ConfigError(context + ": unknown key '" + key + "'");
    }
}

json pose_to_json(const Pose& pose) {
    return {{"translation_m",
             {pose.translation.x(), pose.translation.y(),
              pose.translation.z()}},
            {"quaternion_wxyz",
             {pose.rotation.w(), pose.rotation.x(), pose.rotation.y(),
              pose.rotation.z()}}};
}

Pose pose_from_json(const json& j, const std::string& context) {
    require_known_keys(j, {"translation_m", "quaternion_wxyz"}, context);
    Pose pose;
    try {
        const json& t = j.at("translation_m");
        pose.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                            t.at(2).get<double>()};
        const json& q = j.at("quaternion_wxyz");
        pose.rotation = Eigen::Quaterniond(q.at(0).get<double>(),
                                           q.at(1).get<double>(),
                                           q.at(2).get<double>(),
                                           q.at(3).get<double>());
    } catch (const json::exception& e) {
        throw ParseError(context + ": bad pose: " + std::string(e.what()));
    }
    pose.validate();
    return pose;
}

json mesh_to_json(const ParametricMesh& mesh) {
    if (mesh.kind == MeshKind::Cylinder)
        return {{"kind", "cylinder"},
                {"radius_m", mesh.radius},
                {"height_m", mesh.height}};
    json profile = json::array();
    for (const auto& knot : mesh.profile)
        profile.push_back({knot.x(), knot.y()});
    return {{"kind", "lathe"}, {"profile_zr_m", std::move(profile)}};
}

ParametricMesh mesh_from_json(const json& j, const std::string& context) {
    std::string kind;
    try {
        kind = j.at("kind").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(context + ": bad mesh: " + std::string(e.what()));
    }
    try {
        if (kind == "cylinder") {
            require_known_keys(j, {"kind", "radius_m", "height_m"}, context);
            return ParametricMesh::cylinder(j.at("radius_m").get<double>(),
                                            j.at("height_m").get<double>());
        }
        if (kind == "lathe") {
            require_known_keys(j, {"kind", "profile_zr_m"}, context);
            std::vector<Eigen::Vector2d> profile;
            for (const json& knot : j.at("profile_zr_m"))
                profile.emplace_back(knot.at(0).get<double>(),
                                     knot.at(1).get<double>());
            return ParametricMesh::lathe(std::move(profile));
        }
    } catch (const json::exception& e) {
        throw ParseError(context + ": bad mesh: " + std::string(e.what()));
    }
    throw ParseError(context + ": unknown mesh kind '" + kind + "'");
}

json camera_to_json(const CameraModel& cam) {
    return {{"fx", cam.fx},     {"fy", cam.fy},
            {"cx", cam.cx},     {"cy", cam.cy},
            {"baseline_m", cam.baseline},
            {"image_w", cam.image_w},
            {"image_h", cam.image_h}};
}

CameraModel camera_from_json(const json& j, const std::string& context) {
    require_known_keys(
        j, {"fx", "fy", "cx", "cy", "baseline_m", "image_w", "image_h"},
        context);
    CameraModel cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        cam.baseline = j.at("baseline_m").get<double>();
        cam.image_w = j.at("image_w").get<int>();
        cam.image_h = j.at("image_h").get<int>();
    } catch (const json::exception& e) {
        throw ParseError(context + ": bad camera: " + std::string(e.what()));
    }
    cam.validate();
    return cam;
}

}  // namespace plenopose
