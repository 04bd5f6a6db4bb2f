#pragma once

#include <filesystem>
#include <string>

#include "plenopose/image.hpp"
#include "plenopose/lightfield.hpp"

namespace plenopose {

/// On-disk light-field container: a directory holding `lightfield.json`
/// (dimensions, camera intrinsics, baseline, bit depth) plus one 16-bit RGB
/// PNG per view named `view_{t}_{s}.png`, row-major, top-left origin.
struct LightFieldContainer {
    LightField4D field;
    CameraModel camera;
};

void store_lightfield(const LightField4D& lf, const CameraModel& cam,
                      const std::filesystem::path& dir);

/// Throws ParseError for missing views, inconsistent dimensions or broken
/// metadata; ValidationError when the metadata violates container invariants.
LightFieldContainer load_lightfield(const std::filesystem::path& dir);

// 8-bit grayscale PNG helpers used for class-index masks.
void store_classmap_png(const ClassMap& m, const std::filesystem::path& path);
ClassMap load_classmap_png(const std::filesystem::path& path);

}  // namespace plenopose
