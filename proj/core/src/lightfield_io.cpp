#include "plenopose/lightfield_io.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

namespace {

std::string view_name(int t, int s) {
    return "view_" + std::to_string(t) + "_" + std::to_string(s) + ".png";
}

constexpr double kScale16 = 65535.0;

}  // namespace

void store_lightfield(const LightField4D& lf, const CameraModel& cam,
                      const fs::path& dir) {
    fs::create_directories(dir);
    json meta;
    meta["spatial_h"] = lf.spatial_h;
    meta["spatial_w"] = lf.spatial_w;
    meta["angular_h"] = lf.angular_h;
    meta["angular_w"] = lf.angular_w;
    meta["bit_depth"] = 16;
    meta["baseline_m"] = cam.baseline;
    meta["camera"] = {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
                      {"cy", cam.cy}};
    std::ofstream out(dir / "lightfield.json");
    out << meta.dump(2) << "\n";

    cv::Mat view(lf.spatial_h, lf.spatial_w, CV_16UC3);
    for (int t = 0; t < lf.angular_h; ++t) {
        for (int s = 0; s < lf.angular_w; ++s) {
            for (int y = 0; y < lf.spatial_h; ++y) {
                auto* row = view.ptr<uint16_t>(y);
                for (int x = 0; x < lf.spatial_w; ++x) {
                    // imwrite expects BGR channel order.
                    for (int c = 0; c < 3; ++c) {
                        double v = lf.at(y, x, t, s, c);
                        row[x * 3 + (2 - c)] = static_cast<uint16_t>(
                            std::lround(std::clamp(v, 0.0, 1.0) * kScale16));
                    }
                }
            }
            if (!cv::imwrite((dir / view_name(t, s)).string(), view))
                throw ParseError("store_lightfield: failed to write " +
                                 view_name(t, s));
        }
    }
}

LightFieldContainer load_lightfield(const fs::path& dir) {
    const fs::path meta_path = dir / "lightfield.json";
    std::ifstream in(meta_path);
    if (!in)
        throw ParseError("load_lightfield: missing " + meta_path.string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ParseError("load_lightfield: malformed lightfield.json: " +
                         std::string(e.what()));
    }

    int sh, sw, ah, aw, bit_depth;
    CameraModel cam;
    try {
        sh = meta.at("spatial_h").get<int>();
        sw = meta.at("spatial_w").get<int>();
        ah = meta.at("angular_h").get<int>();
        aw = meta.at("angular_w").get<int>();
        bit_depth = meta.at("bit_depth").get<int>();
        cam.baseline = meta.at("baseline_m").get<double>();
        const json& c = meta.at("camera");
        cam.fx = c.at("fx").get<double>();
        cam.fy = c.at("fy").get<double>();
        cam.cx = c.at("cx").get<double>();
        cam.cy = c.at("cy").get<double>();
    } catch (const json::exception& e) {
        throw ParseError("load_lightfield: missing metadata field: " +
                         std::string(e.what()));
    }
    if (bit_depth != 16)
        throw ParseError("load_lightfield: unsupported bit_depth " +
                         std::to_string(bit_depth));
    if (sh < 1 || sw < 1 || ah < 1 || aw < 1)
        throw ValidationError("load_lightfield: non-positive dimension");
    if (ah % 2 == 0 || aw % 2 == 0)
        throw ValidationError("load_lightfield: angular extents must be odd");
    cam.image_w = sw;
    cam.image_h = sh;
    cam.validate();

    LightFieldContainer out;
    out.camera = cam;
    out.field = LightField4D(sh, sw, ah, aw);
    for (int t = 0; t < ah; ++t) {
        for (int s = 0; s < aw; ++s) {
            const fs::path p = dir / view_name(t, s);
            cv::Mat view = cv::imread(p.string(), cv::IMREAD_UNCHANGED);
            if (view.empty())
                throw ParseError("load_lightfield: missing view " +
                                 view_name(t, s));
            if (view.rows != sh || view.cols != sw || view.type() != CV_16UC3)
                throw ParseError("load_lightfield: view " + view_name(t, s) +
                                 " has inconsistent dimensions or depth");
            for (int y = 0; y < sh; ++y) {
                const auto* row = view.ptr<uint16_t>(y);
                for (int x = 0; x < sw; ++x)
                    for (int c = 0; c < 3; ++c)
                        out.field.at(y, x, t, s, c) =
                            row[x * 3 + (2 - c)] / kScale16;
            }
        }
    }
    return out;
}

void store_classmap_png(const ClassMap& m, const fs::path& path) {
    cv::Mat img(m.height, m.width, CV_8UC1);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            img.at<uint8_t>(y, x) = m.at(y, x);
    if (!cv::imwrite(path.string(), img))
        throw ParseError("store_classmap_png: failed to write " + path.string());
}

ClassMap load_classmap_png(const fs::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (img.empty())
        throw ParseError("load_classmap_png: cannot read " + path.string());
    ClassMap m(img.rows, img.cols);
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x) m.at(y, x) = img.at<uint8_t>(y, x);
    return m;
}

}  // namespace plenopose
