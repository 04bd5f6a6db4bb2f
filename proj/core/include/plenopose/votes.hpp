#pragma once

// Per-pixel center votes: each participating pixel proposes an offset toward
// its object's projected center together with a confidence in [0, 1].

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "plenopose/image.hpp"

namespace plenopose {

struct CenterVoteField {
    int height = 0;
    int width = 0;
    std::vector<double> offset_x;    // h_p, horizontal component, pixels
    std::vector<double> offset_y;    // h_p, vertical component, pixels
    std::vector<double> confidence;  // b_p in [0, 1]
    Mask mask;                       // pixels that participate

    CenterVoteField() = default;
    CenterVoteField(int height, int width)
        : height(height),
          width(width),
          offset_x(static_cast<std::size_t>(height) * width, 0.0),
          offset_y(static_cast<std::size_t>(height) * width, 0.0),
          confidence(static_cast<std::size_t>(height) * width, 0.0),
          mask(height, width) {}

    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    // Voted center of pixel (x, y): c_p + h_p.
    Eigen::Vector2d voted_center(int y, int x) const {
        const std::size_t i = index(y, x);
        return {x + offset_x[i], y + offset_y[i]};
    }
    std::size_t active_count() const { return mask.count(); }
    void validate() const;
};

// Sparse JSON round-trip: one record per masked pixel.
void store_votes(const CenterVoteField& votes, const std::filesystem::path& path);
CenterVoteField load_votes(const std::filesystem::path& path);

}  // namespace plenopose
