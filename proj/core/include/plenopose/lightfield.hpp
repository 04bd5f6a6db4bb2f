#pragma once

#include <cstdint>
#include <vector>

#include "plenopose/errors.hpp"
#include "plenopose/image.hpp"

namespace plenopose {

/// Pinhole intrinsics of the virtual camera grid. `baseline` is the metric
/// spacing between adjacent views, identical horizontally and vertically.
struct CameraModel {
    double fx = 0;
    double fy = 0;
    double cx = 0;
    double cy = 0;
    double baseline = 0;  // meters between adjacent sub-aperture views
    int image_w = 0;
    int image_h = 0;

    void validate() const;
};

/// 4D radiance container: spatial (y, x), angular (t, s), 3 color channels.
/// Samples are dimensionless radiance in [0, 1]. Angular dimensions are odd
/// so a center view exists at s = (angular_w-1)/2, t = (angular_h-1)/2.
///
/// Storage is dense row-major in index order (y, x, t, s, channel):
/// the full angular patch of one pixel is contiguous.
struct LightField4D {
    int spatial_h = 0;
    int spatial_w = 0;
    int angular_h = 0;
    int angular_w = 0;
    static constexpr int channels = 3;
    std::vector<double> data;

    LightField4D() = default;
    LightField4D(int sh, int sw, int ah, int aw, double fill = 0.0);

    int center_s() const { return (angular_w - 1) / 2; }
    int center_t() const { return (angular_h - 1) / 2; }

    size_t index(int y, int x, int t, int s, int c) const {
        return (((static_cast<size_t>(y) * spatial_w + x) * angular_h + t) *
                    angular_w +
                s) *
                   channels +
               c;
    }
    double& at(int y, int x, int t, int s, int c) { return data[index(y, x, t, s, c)]; }
    double at(int y, int x, int t, int s, int c) const { return data[index(y, x, t, s, c)]; }

    void check_view(int s, int t) const;
    void check_pixel(int x, int y) const;

    /// Full invariant check: dimensions, odd angular extents, finite samples
    /// in [0, 1]. Throws ValidationError on the first violation.
    void validate() const;
};

/// All angular samples of one spatial pixel, (t, s, channel).
struct AngularPatch {
    int angular_h = 0;
    int angular_w = 0;
    std::vector<double> values;  // t-major, then s, then channel

    double at(int t, int s, int c) const {
        return values[(static_cast<size_t>(t) * angular_w + s) * 3 + c];
    }
};

enum class SliceOrientation { S, T };

/// Epipolar-plane slice: one spatial axis against one angular axis.
/// S-slices fix (y, t) and hold data[x][s][c]; T-slices fix (x, s) and hold
/// data[y][t][c]. Scene points trace lines whose slope encodes disparity.
struct EpiSlice {
    SliceOrientation orientation = SliceOrientation::S;
    int spatial_extent = 0;
    int angular_extent = 0;
    std::vector<double> data;

    double at(int spatial, int angular, int c) const {
        return data[(static_cast<size_t>(spatial) * angular_extent + angular) * 3 + c];
    }
    double& at(int spatial, int angular, int c) {
        return data[(static_cast<size_t>(spatial) * angular_extent + angular) * 3 + c];
    }
};

/// Shear result. Out-of-frame resampled cells are zero in `field` and flagged
/// invalid here instead of being clamped, so downstream cost sums can drop
/// them. `valid` is indexed (y, x, t, s).
struct ShearedLightField {
    LightField4D field;
    std::vector<uint8_t> valid;

    bool is_valid(int y, int x, int t, int s) const {
        return valid[((static_cast<size_t>(y) * field.spatial_w + x) *
                          field.angular_h +
                      t) *
                         field.angular_w +
                     s] != 0;
    }
};

/// Extracts the 2D image of view (s, t).
Image subaperture_view(const LightField4D& lf, int s, int t);

/// Builds a light field from a t-major grid of equally sized views.
LightField4D assemble_views(const std::vector<std::vector<Image>>& views);

/// All angular samples of spatial pixel (x, y).
AngularPatch angular_patch(const LightField4D& lf, int x, int y);

EpiSlice epi_slice_s(const LightField4D& lf, int y, int t);
EpiSlice epi_slice_t(const LightField4D& lf, int x, int s);

/// Keeps every `stride`-th view starting at index 0 on both angular axes.
/// The resulting angular extents must stay odd.
LightField4D angular_subsample(const LightField4D& lf, int stride);

/// Per-view pixel shift of a point at the given metric depth:
/// disparity = fx * baseline / depth.
double depth_to_disparity(const CameraModel& cam, double depth);

/// Resamples every view toward the center view under a disparity hypothesis:
/// out(y, x, t, s) = lf(y - d*(t - ct), x - d*(s - cs), t, s), bilinear.
/// The center view passes through unchanged.
ShearedLightField shear(const LightField4D& lf, double disparity);

/// Shear of an already sheared field; validity of the four bilinear source
/// taps propagates (taps with zero weight are ignored).
ShearedLightField shear(const ShearedLightField& lf, double disparity);

}  // namespace plenopose
