#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plenopose/errors.hpp"

namespace plenopose {

/// Dense H x W x C image, row-major, double precision.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h < 0 || w < 0 || c < 0)
            throw ValidationError("Image: negative dimension");
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    void check_pixel(int x, int y) const {
        if (x < 0 || x >= width)
            throw IndexError("x index " + std::to_string(x) +
                             " out of range [0," + std::to_string(width) + ")");
        if (y < 0 || y >= height)
            throw IndexError("y index " + std::to_string(y) +
                             " out of range [0," + std::to_string(height) + ")");
    }

    /// Bilinear sample of one channel at continuous (x, y); integer pixel
    /// coordinates address pixel centers. Caller guarantees coordinates are
    /// inside [0, width-1] x [0, height-1].
    double sample(double x, double y, int c) const {
        int x0 = static_cast<int>(x);
        int y0 = static_cast<int>(y);
        if (x0 > width - 2) x0 = width - 2;
        if (y0 > height - 2) y0 = height - 2;
        if (x0 < 0) x0 = 0;
        if (y0 < 0) y0 = 0;
        const int x1 = x0 + 1 < width ? x0 + 1 : x0;
        const int y1 = y0 + 1 < height ? y0 + 1 : y0;
        const double fx = x - x0;
        const double fy = y - y0;
        const double v00 = at(y0, x0, c);
        const double v01 = at(y0, x1, c);
        const double v10 = at(y1, x0, c);
        const double v11 = at(y1, x1, c);
        return (1 - fy) * ((1 - fx) * v00 + fx * v01) +
               fy * ((1 - fx) * v10 + fx * v11);
    }
};

/// Feature maps share the image container; channel count is the filter count.
using FeatureMap = Image;

/// Binary H x W mask (0 = background, nonzero = foreground).
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w, uint8_t fill = 0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    bool same_shape(const Mask& o) const {
        return height == o.height && width == o.width;
    }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += (v != 0);
        return n;
    }
    bool any() const {
        for (uint8_t v : data)
            if (v) return true;
        return false;
    }
};

/// H x W map of small class indices (segmentation labels).
struct ClassMap {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> labels;

    ClassMap() = default;
    ClassMap(int h, int w, uint8_t fill = 0)
        : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }

    bool same_shape(const ClassMap& o) const {
        return height == o.height && width == o.width;
    }

    /// Binary mask of pixels carrying class `k`.
    Mask class_mask(uint8_t k) const {
        Mask m(height, width);
        for (size_t i = 0; i < labels.size(); ++i) m.data[i] = (labels[i] == k);
        return m;
    }
};

/// Axis-aligned pixel rectangle, x/y top-left corner, w/h extents.
struct Roi {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
};

}  // namespace plenopose
