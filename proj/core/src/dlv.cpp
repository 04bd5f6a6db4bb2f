#include "plenopose/dlv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

namespace {

constexpr double kHugeCost = 1e9;  // pixel with no valid view at a plane

template <class Lum>
double sobel_mag_impl(Lum&& lum, int x, int y, int w, int h) {
    auto L = [&](int xx, int yy) {
        return lum(std::clamp(xx, 0, w - 1), std::clamp(yy, 0, h - 1));
    };
    const double gx = (L(x + 1, y - 1) + 2.0 * L(x + 1, y) + L(x + 1, y + 1) -
                       L(x - 1, y - 1) - 2.0 * L(x - 1, y) - L(x - 1, y + 1)) /
                      8.0;
    const double gy = (L(x - 1, y + 1) + 2.0 * L(x, y + 1) + L(x + 1, y + 1) -
                       L(x - 1, y - 1) - 2.0 * L(x, y - 1) - L(x + 1, y - 1)) /
                      8.0;
    return std::sqrt(gx * gx + gy * gy);
}

double sobel_mag_view(const LightField4D& lf, int t, int s, int x, int y) {
    return sobel_mag_impl(
        [&](int xx, int yy) {
            return (lf.at(yy, xx, t, s, 0) + lf.at(yy, xx, t, s, 1) +
                    lf.at(yy, xx, t, s, 2)) /
                   3.0;
        },
        x, y, lf.spatial_w, lf.spatial_h);
}

// Interleaved per-view plane: (y*W + x)*4 + {r, g, b, gradmag}, padded with
// one extra zero row plus one pixel so that zero-weight bilinear taps at the
// far edge stay in bounds.
std::vector<double> view_planes(const LightField4D& lf, int t, int s) {
    const int w = lf.spatial_w, h = lf.spatial_h;
    std::vector<double> lum(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            lum[static_cast<std::size_t>(y) * w + x] =
                (lf.at(y, x, t, s, 0) + lf.at(y, x, t, s, 1) +
                 lf.at(y, x, t, s, 2)) /
                3.0;
    std::vector<double> p((static_cast<std::size_t>(h + 1) * w + 1) * 4, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 4;
            p[i + 0] = lf.at(y, x, t, s, 0);
            p[i + 1] = lf.at(y, x, t, s, 1);
            p[i + 2] = lf.at(y, x, t, s, 2);
            p[i + 3] = sobel_mag_impl(
                [&](int xx, int yy) {
                    return lum[static_cast<std::size_t>(yy) * w + xx];
                },
                x, y, w, h);
        }
    return p;
}

std::vector<std::pair<int, int>> resolve_view_set(const LightField4D& lf,
                                                  const DlvConfig& cfg) {
    std::vector<std::pair<int, int>> views;
    if (cfg.view_set.empty()) {
        for (int t = 0; t < lf.angular_h; ++t)
            for (int s = 0; s < lf.angular_w; ++s)
                if (t != lf.center_t() || s != lf.center_s())
                    views.push_back({t, s});
    } else {
        for (const auto& [t, s] : cfg.view_set) {
            if (t < 0 || t >= lf.angular_h || s < 0 || s >= lf.angular_w)
                throw ConfigError("DlvConfig: view (" + std::to_string(t) +
                                  "," + std::to_string(s) +
                                  ") outside the angular grid");
            if (t == lf.center_t() && s == lf.center_s())
                throw ConfigError(
                    "DlvConfig: view_set must not include the center view "
                    "(costs compare each view against it)");
            views.push_back({t, s});
        }
    }
    return views;
}

}  // namespace

void DlvConfig::validate() const {
    if (num_planes < 1)
        throw ConfigError("DlvConfig: num_planes must be >= 1");
    if (!(depth_min > 0.0) || !(depth_max > depth_min))
        throw ConfigError("DlvConfig: need 0 < depth_min < depth_max");
    if (!(intensity_weight >= 0.0) || !(gradient_weight >= 0.0) ||
        !(intensity_weight + gradient_weight > 0.0))
        throw ConfigError("DlvConfig: cost weights must be >= 0 and not both 0");
    if (!(cost_scale > 0.0)) throw ConfigError("DlvConfig: cost_scale must be > 0");
}

std::vector<double> plane_depths(const DlvConfig& cfg) {
    cfg.validate();
    std::vector<double> depths(static_cast<std::size_t>(cfg.num_planes));
    if (cfg.num_planes == 1) {
        depths[0] = cfg.depth_min;
        return depths;
    }
    const double inv_near = 1.0 / cfg.depth_min;
    const double inv_far = 1.0 / cfg.depth_max;
    for (int k = 0; k < cfg.num_planes; ++k) {
        const double t = static_cast<double>(k) / (cfg.num_planes - 1);
        depths[static_cast<std::size_t>(k)] =
            1.0 / (inv_near + t * (inv_far - inv_near));
    }
    return depths;
}

std::size_t DepthLikelihoodVolume::index(int u, int v, int k) const {
    if (!roi.contains(u, v))
        throw IndexError("DepthLikelihoodVolume: pixel (" + std::to_string(u) +
                         "," + std::to_string(v) + ") outside roi");
    if (k < 0 || k >= num_planes())
        throw IndexError("DepthLikelihoodVolume: plane " + std::to_string(k) +
                         " out of range [0," + std::to_string(num_planes()) +
                         ")");
    return (static_cast<std::size_t>(v - roi.y) * roi.w + (u - roi.x)) *
               static_cast<std::size_t>(num_planes()) +
           static_cast<std::size_t>(k);
}

std::vector<double> DepthLikelihoodVolume::pixel_likelihood(int u, int v) const {
    const std::size_t base = index(u, v, 0);
    std::vector<double> row(static_cast<std::size_t>(num_planes()));
    for (int k = 0; k < num_planes(); ++k)
        row[static_cast<std::size_t>(k)] = values[base + k];
    return row;
}

double DepthLikelihoodVolume::argmax_depth(int u, int v) const {
    const std::size_t base = index(u, v, 0);
    int best = 0;
    for (int k = 1; k < num_planes(); ++k)
        if (values[base + k] > values[base + best]) best = k;
    return depths[static_cast<std::size_t>(best)];
}

void DepthLikelihoodVolume::validate() const {
    if (roi.w < 1 || roi.h < 1)
        throw ValidationError("DepthLikelihoodVolume: empty roi");
    if (depths.empty())
        throw ValidationError("DepthLikelihoodVolume: no depth planes");
    for (std::size_t k = 1; k < depths.size(); ++k)
        if (!(depths[k] > depths[k - 1]))
            throw ValidationError(
                "DepthLikelihoodVolume: depths must strictly increase");
    if (values.size() != static_cast<std::size_t>(roi.w) * roi.h *
                             depths.size())
        throw ValidationError("DepthLikelihoodVolume: value count mismatch");
    const int K = num_planes();
    for (std::size_t p = 0; p < static_cast<std::size_t>(roi.w) * roi.h; ++p) {
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            const float v = values[p * K + k];
            if (!(v >= 0.0f))
                throw ValidationError(
                    "DepthLikelihoodVolume: negative likelihood");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw ValidationError(
                "DepthLikelihoodVolume: pixel likelihood row sums to " +
                std::to_string(sum) + ", expected 1");
    }
}

bool cost_T(const LightField4D& lf, const CameraModel& cam, int t, int s,
            double depth, int x, int y, const DlvConfig& cfg, double* cost) {
    lf.check_view(t, s);
    lf.check_pixel(y, x);
    const double disp = depth_to_disparity(cam, depth);
    const double sx = x - disp * (s - lf.center_s());
    const double sy = y - disp * (t - lf.center_t());
    if (sx < 0.0 || sx > lf.spatial_w - 1 || sy < 0.0 || sy > lf.spatial_h - 1)
        return false;
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = x0 + 1 < lf.spatial_w ? x0 + 1 : x0;
    const int y1 = y0 + 1 < lf.spatial_h ? y0 + 1 : y0;
    const double fx = sx - x0, fy = sy - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy), w01 = fx * (1.0 - fy);
    const double w10 = (1.0 - fx) * fy, w11 = fx * fy;
    auto bil = [&](auto&& f) {
        return w00 * f(x0, y0) + w01 * f(x1, y0) + w10 * f(x0, y1) +
               w11 * f(x1, y1);
    };
    double intensity = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double shifted =
            bil([&](int xx, int yy) { return lf.at(yy, xx, t, s, c); });
        intensity += std::abs(shifted - lf.at(y, x, lf.center_t(),
                                              lf.center_s(), c));
    }
    intensity /= 3.0;
    const double g_shift =
        bil([&](int xx, int yy) { return sobel_mag_view(lf, t, s, xx, yy); });
    const double g_center =
        sobel_mag_view(lf, lf.center_t(), lf.center_s(), x, y);
    *cost = cfg.intensity_weight * intensity +
            cfg.gradient_weight * std::abs(g_shift - g_center);
    return true;
}

DepthLikelihoodVolume build_dlv(const LightField4D& lf, const CameraModel& cam,
                                const Roi& roi, const DlvConfig& cfg) {
    lf.validate();
    cam.validate();
    cfg.validate();
    if (roi.w < 1 || roi.h < 1 || roi.x < 0 || roi.y < 0 ||
        roi.x + roi.w > lf.spatial_w || roi.y + roi.h > lf.spatial_h)
        throw DomainError("build_dlv: roi [" + std::to_string(roi.x) + "," +
                          std::to_string(roi.y) + " " + std::to_string(roi.w) +
                          "x" + std::to_string(roi.h) +
                          "] outside the " + std::to_string(lf.spatial_w) +
                          "x" + std::to_string(lf.spatial_h) + " field");
    const auto views = resolve_view_set(lf, cfg);
    const auto depths = plane_depths(cfg);
    const int K = cfg.num_planes;
    const int W = lf.spatial_w;
    const std::size_t npix = static_cast<std::size_t>(roi.w) * roi.h;

    const std::vector<double> center =
        view_planes(lf, lf.center_t(), lf.center_s());
    std::vector<double> acc(static_cast<std::size_t>(K) * npix, 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(K) * npix, 0);

    for (const auto& [vt, vs] : views) {
        const std::vector<double> vp = view_planes(lf, vt, vs);
        const double os = vs - lf.center_s();
        const double ot = vt - lf.center_t();
        // Each plane slice is private to its task, so results are
        // independent of the thread count.
        parallel_for(static_cast<std::size_t>(K), [&](std::size_t ki) {
            const int k = static_cast<int>(ki);
            const double disp = depth_to_disparity(cam, depths[ki]);
            const double shift_x = disp * os;
            const double shift_y = disp * ot;
            const int x_lo = std::max(roi.x,
                                      static_cast<int>(std::ceil(shift_x)));
            const int x_hi = std::min(roi.x + roi.w - 1,
                                      static_cast<int>(std::floor(
                                          lf.spatial_w - 1 + shift_x)));
            const int y_lo = std::max(roi.y,
                                      static_cast<int>(std::ceil(shift_y)));
            const int y_hi = std::min(roi.y + roi.h - 1,
                                      static_cast<int>(std::floor(
                                          lf.spatial_h - 1 + shift_y)));
            if (x_lo > x_hi || y_lo > y_hi) return;
            const double off_x = -shift_x, off_y = -shift_y;
            const int bx = static_cast<int>(std::floor(off_x));
            const int by = static_cast<int>(std::floor(off_y));
            const double fxf = off_x - bx, fyf = off_y - by;
            const double w00 = (1.0 - fxf) * (1.0 - fyf), w01 = fxf * (1.0 - fyf);
            const double w10 = (1.0 - fxf) * fyf, w11 = fxf * fyf;
            double* acc_k = acc.data() + ki * npix;
            int* cnt_k = cnt.data() + ki * npix;
            for (int y = y_lo; y <= y_hi; ++y) {
                const std::size_t src_row =
                    (static_cast<std::size_t>(y + by) * W + bx) * 4;
                const std::size_t ctr_row = static_cast<std::size_t>(y) * W * 4;
                const std::ptrdiff_t out_row =
                    static_cast<std::ptrdiff_t>(y - roi.y) * roi.w - roi.x;
                for (int x = x_lo; x <= x_hi; ++x) {
                    const double* p = vp.data() + src_row + 4 * x;
                    const double* c = center.data() + ctr_row + 4 * x;
                    const std::size_t stride = 4 * static_cast<std::size_t>(W);
                    double intensity = 0.0;
                    for (int ch = 0; ch < 3; ++ch)
                        intensity += std::abs(
                            w00 * p[ch] + w01 * p[ch + 4] +
                            w10 * p[ch + stride] + w11 * p[ch + stride + 4] -
                            c[ch]);
                    intensity /= 3.0;
                    const double gm = w00 * p[3] + w01 * p[7] +
                                      w10 * p[3 + stride] +
                                      w11 * p[7 + stride];
                    acc_k[out_row + x] +=
                        cfg.intensity_weight * intensity +
                        cfg.gradient_weight * std::abs(gm - c[3]);
                    ++cnt_k[out_row + x];
                }
            }
        });
    }

    DepthLikelihoodVolume dlv;
    dlv.roi = roi;
    dlv.depths = depths;
    dlv.config = cfg;
    dlv.values.assign(npix * static_cast<std::size_t>(K), 0.0f);
    parallel_for(npix, [&](std::size_t p) {
        double row[512];
        std::vector<double> row_heap;
        double* r = row;
        if (K > 512) {
            row_heap.resize(static_cast<std::size_t>(K));
            r = row_heap.data();
        }
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            const std::size_t i = static_cast<std::size_t>(k) * npix + p;
            const double raw = cnt[i] > 0 ? acc[i] / cnt[i] : kHugeCost;
            r[k] = std::exp(-raw / cfg.cost_scale);
            sum += r[k];
        }
        float* out = dlv.values.data() + p * static_cast<std::size_t>(K);
        if (sum > 0.0) {
            for (int k = 0; k < K; ++k)
                out[k] = static_cast<float>(r[k] / sum);
        } else {
            for (int k = 0; k < K; ++k)
                out[k] = static_cast<float>(1.0 / K);
        }
    });
    return dlv;
}

void store_dlv(const DepthLikelihoodVolume& dlv, const fs::path& dir) {
    dlv.validate();
    fs::create_directories(dir);
    json meta;
    meta["roi"] = {{"x", dlv.roi.x}, {"y", dlv.roi.y}, {"w", dlv.roi.w},
                   {"h", dlv.roi.h}};
    meta["depths_m"] = dlv.depths;
    json cfg;
    cfg["depth_min"] = dlv.config.depth_min;
    cfg["depth_max"] = dlv.config.depth_max;
    cfg["num_planes"] = dlv.config.num_planes;
    cfg["intensity_weight"] = dlv.config.intensity_weight;
    cfg["gradient_weight"] = dlv.config.gradient_weight;
    cfg["cost_scale"] = dlv.config.cost_scale;
    json vs = json::array();
    for (const auto& [t, s] : dlv.config.view_set) vs.push_back({t, s});
    cfg["view_set"] = std::move(vs);
    meta["config"] = std::move(cfg);
    std::ofstream(dir / "dlv.json") << meta.dump(2) << "\n";
    std::ofstream blob(dir / "dlv.f32", std::ios::binary);
    blob.write(reinterpret_cast<const char*>(dlv.values.data()),
               static_cast<std::streamsize>(dlv.values.size() * sizeof(float)));
    if (!blob) throw ParseError("store_dlv: failed to write dlv.f32");
}

DepthLikelihoodVolume load_dlv(const fs::path& dir) {
    std::ifstream in(dir / "dlv.json");
    if (!in) throw ParseError("load_dlv: missing " + (dir / "dlv.json").string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ParseError("load_dlv: malformed dlv.json: " +
                         std::string(e.what()));
    }
    DepthLikelihoodVolume dlv;
    try {
        const json& r = meta.at("roi");
        dlv.roi = {r.at("x").get<int>(), r.at("y").get<int>(),
                   r.at("w").get<int>(), r.at("h").get<int>()};
        dlv.depths = meta.at("depths_m").get<std::vector<double>>();
        const json& c = meta.at("config");
        dlv.config.depth_min = c.at("depth_min").get<double>();
        dlv.config.depth_max = c.at("depth_max").get<double>();
        dlv.config.num_planes = c.at("num_planes").get<int>();
        dlv.config.intensity_weight = c.at("intensity_weight").get<double>();
        dlv.config.gradient_weight = c.at("gradient_weight").get<double>();
        dlv.config.cost_scale = c.at("cost_scale").get<double>();
        for (const json& v : c.at("view_set"))
            dlv.config.view_set.push_back(
                {v.at(0).get<int>(), v.at(1).get<int>()});
    } catch (const json::exception& e) {
        throw ParseError("load_dlv: missing field: " + std::string(e.what()));
    }
    std::ifstream blob(dir / "dlv.f32", std::ios::binary);
    if (!blob)
        throw ParseError("load_dlv: missing " + (dir / "dlv.f32").string());
    blob.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(blob.tellg());
    const std::size_t want = static_cast<std::size_t>(dlv.roi.w) * dlv.roi.h *
                             dlv.depths.size();
    if (bytes != want * sizeof(float))
        throw ParseError("load_dlv: dlv.f32 holds " +
                         std::to_string(bytes / sizeof(float)) +
                         " floats, expected " + std::to_string(want));
    blob.seekg(0);
    dlv.values.resize(want);
    blob.read(reinterpret_cast<char*>(dlv.values.data()),
              static_cast<std::streamsize>(bytes));
    dlv.validate();
    return dlv;
}

}  // namespace plenopose
