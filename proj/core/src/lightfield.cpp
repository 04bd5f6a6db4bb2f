#include "plenopose/lightfield.hpp"

#include <cmath>
#include <string>

#include "plenopose/parallel.hpp"

namespace plenopose {

void CameraModel::validate() const {
    if (!(fx > 0) || !(fy > 0))
        throw ValidationError("CameraModel: focal lengths must be > 0");
    if (!(baseline > 0))
        throw ValidationError("CameraModel: baseline must be > 0");
    if (image_w <= 0 || image_h <= 0)
        throw ValidationError("CameraModel: image dimensions must be > 0");
    if (!(cx >= 0 && cx < image_w))
        throw ValidationError("CameraModel: cx outside image");
    if (!(cy >= 0 && cy < image_h))
        throw ValidationError("CameraModel: cy outside image");
}

LightField4D::LightField4D(int sh, int sw, int ah, int aw, double fill)
    : spatial_h(sh), spatial_w(sw), angular_h(ah), angular_w(aw),
      data(static_cast<size_t>(sh) * sw * ah * aw * channels, fill) {
    if (sh < 1 || sw < 1 || ah < 1 || aw < 1)
        throw ValidationError("LightField4D: all dimensions must be >= 1");
    if (ah % 2 == 0 || aw % 2 == 0)
        throw ValidationError(
            "LightField4D: angular extents must be odd (got " +
            std::to_string(ah) + "x" + std::to_string(aw) + ")");
}

void LightField4D::check_view(int s, int t) const {
    if (s < 0 || s >= angular_w)
        throw IndexError("s index " + std::to_string(s) + " out of range [0," +
                         std::to_string(angular_w) + ")");
    if (t < 0 || t >= angular_h)
        throw IndexError("t index " + std::to_string(t) + " out of range [0," +
                         std::to_string(angular_h) + ")");
}

void LightField4D::check_pixel(int x, int y) const {
    if (x < 0 || x >= spatial_w)
        throw IndexError("x index " + std::to_string(x) + " out of range [0," +
                         std::to_string(spatial_w) + ")");
    if (y < 0 || y >= spatial_h)
        throw IndexError("y index " + std::to_string(y) + " out of range [0," +
                         std::to_string(spatial_h) + ")");
}

void LightField4D::validate() const {
    if (spatial_h < 1 || spatial_w < 1 || angular_h < 1 || angular_w < 1)
        throw ValidationError("LightField4D: all dimensions must be >= 1");
    if (angular_h % 2 == 0 || angular_w % 2 == 0)
        throw ValidationError("LightField4D: angular extents must be odd");
    if (data.size() != static_cast<size_t>(spatial_h) * spatial_w * angular_h *
                           angular_w * channels)
        throw ValidationError("LightField4D: data size does not match dims");
    for (double v : data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError(
                "LightField4D: sample outside [0,1] or not finite");
    }
}

Image subaperture_view(const LightField4D& lf, int s, int t) {
    lf.check_view(s, t);
    Image out(lf.spatial_h, lf.spatial_w, 3);
    for (int y = 0; y < lf.spatial_h; ++y)
        for (int x = 0; x < lf.spatial_w; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = lf.at(y, x, t, s, c);
    return out;
}

LightField4D assemble_views(const std::vector<std::vector<Image>>& views) {
    if (views.empty() || views.front().empty())
        throw ValidationError("assemble_views: empty view grid");
    const int ah = static_cast<int>(views.size());
    const int aw = static_cast<int>(views.front().size());
    const Image& first = views.front().front();
    LightField4D lf(first.height, first.width, ah, aw);
    for (int t = 0; t < ah; ++t) {
        if (static_cast<int>(views[t].size()) != aw)
            throw ValidationError("assemble_views: ragged view grid");
        for (int s = 0; s < aw; ++s) {
            const Image& v = views[t][s];
            if (v.height != first.height || v.width != first.width ||
                v.channels != 3)
                throw ShapeError("assemble_views: view " + std::to_string(t) +
                                 "," + std::to_string(s) +
                                 " has mismatched shape");
            for (int y = 0; y < lf.spatial_h; ++y)
                for (int x = 0; x < lf.spatial_w; ++x)
                    for (int c = 0; c < 3; ++c)
                        lf.at(y, x, t, s, c) = v.at(y, x, c);
        }
    }
    return lf;
}

AngularPatch angular_patch(const LightField4D& lf, int x, int y) {
    lf.check_pixel(x, y);
    AngularPatch p;
    p.angular_h = lf.angular_h;
    p.angular_w = lf.angular_w;
    p.values.assign(lf.data.begin() + lf.index(y, x, 0, 0, 0),
                    lf.data.begin() + lf.index(y, x, 0, 0, 0) +
                        static_cast<size_t>(lf.angular_h) * lf.angular_w * 3);
    return p;
}

EpiSlice epi_slice_s(const LightField4D& lf, int y, int t) {
    if (y < 0 || y >= lf.spatial_h)
        throw IndexError("y index " + std::to_string(y) + " out of range");
    if (t < 0 || t >= lf.angular_h)
        throw IndexError("t index " + std::to_string(t) + " out of range");
    EpiSlice sl;
    sl.orientation = SliceOrientation::S;
    sl.spatial_extent = lf.spatial_w;
    sl.angular_extent = lf.angular_w;
    sl.data.resize(static_cast<size_t>(sl.spatial_extent) * sl.angular_extent * 3);
    for (int x = 0; x < lf.spatial_w; ++x)
        for (int s = 0; s < lf.angular_w; ++s)
            for (int c = 0; c < 3; ++c) sl.at(x, s, c) = lf.at(y, x, t, s, c);
    return sl;
}

EpiSlice epi_slice_t(const LightField4D& lf, int x, int s) {
    if (x < 0 || x >= lf.spatial_w)
        throw IndexError("x index " + std::to_string(x) + " out of range");
    if (s < 0 || s >= lf.angular_w)
        throw IndexError("s index " + std::to_string(s) + " out of range");
    EpiSlice sl;
    sl.orientation = SliceOrientation::T;
    sl.spatial_extent = lf.spatial_h;
    sl.angular_extent = lf.angular_h;
    sl.data.resize(static_cast<size_t>(sl.spatial_extent) * sl.angular_extent * 3);
    for (int y = 0; y < lf.spatial_h; ++y)
        for (int t = 0; t < lf.angular_h; ++t)
            for (int c = 0; c < 3; ++c) sl.at(y, t, c) = lf.at(y, x, t, s, c);
    return sl;
}

LightField4D angular_subsample(const LightField4D& lf, int stride) {
    if (stride < 1) throw DomainError("angular_subsample: stride must be >= 1");
    const int ah = (lf.angular_h + stride - 1) / stride;
    const int aw = (lf.angular_w + stride - 1) / stride;
    if (ah % 2 == 0 || aw % 2 == 0)
        throw ValidationError(
            "angular_subsample: stride would leave an even angular extent");
    LightField4D out(lf.spatial_h, lf.spatial_w, ah, aw);
    for (int y = 0; y < lf.spatial_h; ++y)
        for (int x = 0; x < lf.spatial_w; ++x)
            for (int t = 0; t < ah; ++t)
                for (int s = 0; s < aw; ++s)
                    for (int c = 0; c < 3; ++c)
                        out.at(y, x, t, s, c) =
                            lf.at(y, x, t * stride, s * stride, c);
    return out;
}

double depth_to_disparity(const CameraModel& cam, double depth) {
    if (!(depth > 0)) throw DomainError("depth_to_disparity: depth must be > 0");
    return cam.fx * cam.baseline / depth;
}

namespace {

// Shared shear kernel; `src_valid` is null for a fully valid source.
ShearedLightField shear_impl(const LightField4D& lf, double disparity,
                             const std::vector<uint8_t>* src_valid) {
    const int cs = lf.center_s();
    const int ct = lf.center_t();
    const double max_off =
        std::abs(disparity) * std::max(cs, ct);
    if (max_off >= std::min(lf.spatial_w, lf.spatial_h))
        throw DomainError("shear: disparity shifts views past the frame");

    ShearedLightField out;
    out.field = LightField4D(lf.spatial_h, lf.spatial_w, lf.angular_h, lf.angular_w);
    out.valid.assign(static_cast<size_t>(lf.spatial_h) * lf.spatial_w *
                         lf.angular_h * lf.angular_w,
                     0);

    auto valid_at = [&](int y, int x, int t, int s) -> bool {
        if (!src_valid) return true;
        return (*src_valid)[((static_cast<size_t>(y) * lf.spatial_w + x) *
                                 lf.angular_h +
                             t) *
                                lf.angular_w +
                            s] != 0;
    };

    parallel_for(static_cast<size_t>(lf.angular_h) * lf.angular_w, [&](size_t v) {
        const int t = static_cast<int>(v) / lf.angular_w;
        const int s = static_cast<int>(v) % lf.angular_w;
        const double dx = disparity * (s - cs);
        const double dy = disparity * (t - ct);
        for (int y = 0; y < lf.spatial_h; ++y) {
            const double sy = y - dy;
            for (int x = 0; x < lf.spatial_w; ++x) {
                const double sx = x - dx;
                if (sx < 0 || sx > lf.spatial_w - 1 || sy < 0 ||
                    sy > lf.spatial_h - 1)
                    continue;
                int x0 = static_cast<int>(sx);
                int y0 = static_cast<int>(sy);
                if (x0 > lf.spatial_w - 2) x0 = lf.spatial_w - 2;
                if (y0 > lf.spatial_h - 2) y0 = lf.spatial_h - 2;
                if (x0 < 0) x0 = 0;
                if (y0 < 0) y0 = 0;
                const int x1 = x0 + 1 < lf.spatial_w ? x0 + 1 : x0;
                const int y1 = y0 + 1 < lf.spatial_h ? y0 + 1 : y0;
                const double fx = sx - x0;
                const double fy = sy - y0;
                const double w00 = (1 - fy) * (1 - fx);
                const double w01 = (1 - fy) * fx;
                const double w10 = fy * (1 - fx);
                const double w11 = fy * fx;
                // A zero-weight tap may be invalid without harm.
                bool ok = true;
                if (w00 > 0 && !valid_at(y0, x0, t, s)) ok = false;
                if (w01 > 0 && !valid_at(y0, x1, t, s)) ok = false;
                if (w10 > 0 && !valid_at(y1, x0, t, s)) ok = false;
                if (w11 > 0 && !valid_at(y1, x1, t, s)) ok = false;
                if (!ok) continue;
                for (int c = 0; c < 3; ++c) {
                    const double val = w00 * lf.at(y0, x0, t, s, c) +
                                       w01 * lf.at(y0, x1, t, s, c) +
                                       w10 * lf.at(y1, x0, t, s, c) +
                                       w11 * lf.at(y1, x1, t, s, c);
                    out.field.at(y, x, t, s, c) = val;
                }
                out.valid[((static_cast<size_t>(y) * lf.spatial_w + x) *
                               lf.angular_h +
                           t) *
                              lf.angular_w +
                          s] = 1;
            }
        }
    });
    return out;
}

}  // namespace

ShearedLightField shear(const LightField4D& lf, double disparity) {
    return shear_impl(lf, disparity, nullptr);
}

ShearedLightField shear(const ShearedLightField& lf, double disparity) {
    return shear_impl(lf.field, disparity, &lf.valid);
}

}  // namespace plenopose
