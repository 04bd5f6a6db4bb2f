#pragma once

// Light-field filter banks: per-pixel angular filters and 3D filters over
// epipolar-plane volumes, as deterministic forward operators with exact
// adjoint (vector-Jacobian product) backward passes, plus a handcrafted
// angular-variance cue for non-Lambertian surfaces.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "plenopose/image.hpp"
#include "plenopose/lightfield.hpp"

namespace plenopose {

enum class Activation : std::uint8_t { Identity, Relu };

double apply_activation(Activation a, double v);
// Derivative of the activation at pre-activation value v; relu'(0) == 0.
double activation_derivative(Activation a, double v);

// Bank of per-pixel filters that contract the full angular patch of a pixel:
// out[y][x][j] = g(sum_{c,t,s} w[j][c][t][s] * lf(y,x,t,s,c)).
struct AngularFilterBank {
    int num_filters = 0;
    int channels = 3;
    int angular_h = 0;
    int angular_w = 0;
    Activation activation = Activation::Relu;
    // Row-major [j][c][t][s].
    std::vector<double> weights;

    AngularFilterBank() = default;
    AngularFilterBank(int num_filters, int angular_h, int angular_w,
                      Activation activation);

    std::size_t index(int j, int c, int t, int s) const {
        return ((static_cast<std::size_t>(j) * channels + c) * angular_h + t) *
                   angular_w +
               s;
    }
    double& at(int j, int c, int t, int s) { return weights[index(j, c, t, s)]; }
    double at(int j, int c, int t, int s) const {
        return weights[index(j, c, t, s)];
    }
    void validate() const;
};

// Bank of 3D filters over an epipolar volume: a spatial n-by-n window crossed
// with one full angular axis. An S-oriented bank spans the horizontal angular
// axis at the center row t; a T-oriented bank spans the vertical angular axis
// at the center column s. The T-oriented bank records the stride (dilation)
// its angular taps would have over a flattened (t*angular_w + s) axis.
struct EpiFilterBank {
    SliceOrientation orientation = SliceOrientation::S;
    int kernel_size = 0;  // spatial extent n, odd
    int num_filters = 0;
    int channels = 3;
    int angular_extent = 0;  // taps along the bank's angular axis
    int dilation = 1;        // 1 for S-oriented, angular_w for T-oriented
    Activation activation = Activation::Relu;
    // Row-major [j][c][v][u][a]: v vertical offset, u horizontal, a angular.
    std::vector<double> weights;

    EpiFilterBank() = default;
    EpiFilterBank(SliceOrientation orientation, int kernel_size,
                  int num_filters, int angular_extent, int dilation,
                  Activation activation);

    std::size_t index(int j, int c, int v, int u, int a) const {
        return (((static_cast<std::size_t>(j) * channels + c) * kernel_size +
                 v) *
                    kernel_size +
                u) *
                   angular_extent +
               a;
    }
    double& at(int j, int c, int v, int u, int a) {
        return weights[index(j, c, v, u, a)];
    }
    double at(int j, int c, int v, int u, int a) const {
        return weights[index(j, c, v, u, a)];
    }
    void validate() const;
};

// Deterministic seeded banks with uniform weights in [-0.1, 0.1].
AngularFilterBank make_angular_bank(int num_filters, int angular_h,
                                    int angular_w, Activation activation,
                                    std::uint64_t seed);
EpiFilterBank make_epi_bank(SliceOrientation orientation, int kernel_size,
                            int num_filters, int angular_h, int angular_w,
                            Activation activation, std::uint64_t seed);

// Forward passes. Output spatial dims always equal the field's; C = J.
FeatureMap apply_angular(const LightField4D& lf, const AngularFilterBank& bank);
// Spatial taps outside the image contribute zero (zero padding of (n-1)/2).
FeatureMap apply_epi(const LightField4D& lf, const EpiFilterBank& bank);

// Channel-stacks maps of equal spatial dims in argument order.
FeatureMap concat_features(const std::vector<FeatureMap>& maps);

struct AngularVjp {
    AngularFilterBank grad_weights;  // same shape as the bank, zero activation
    LightField4D grad_input;
};
struct EpiVjp {
    EpiFilterBank grad_weights;
    LightField4D grad_input;
};

// Exact adjoint of the forward map evaluated at (lf, bank), applied to the
// upstream cotangent. relu' at exactly 0 is defined as 0.
AngularVjp filter_vjp(const LightField4D& lf, const AngularFilterBank& bank,
                      const FeatureMap& upstream);
EpiVjp filter_vjp(const LightField4D& lf, const EpiFilterBank& bank,
                  const FeatureMap& upstream);

// Per-pixel population variance of the angular patch, computed per channel
// over all views and averaged over channels. Zero iff the patch is constant
// per channel; large on specular or refractive pixels.
FeatureMap angular_variance(const LightField4D& lf);

// bank.json (shape metadata) + bank.f32 (row-major little-endian float32).
void store_angular_bank(const AngularFilterBank& bank,
                        const std::filesystem::path& dir);
void store_epi_bank(const EpiFilterBank& bank,
                    const std::filesystem::path& dir);
AngularFilterBank load_angular_bank(const std::filesystem::path& dir);
EpiFilterBank load_epi_bank(const std::filesystem::path& dir);

}  // namespace plenopose
