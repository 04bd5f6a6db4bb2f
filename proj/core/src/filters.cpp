#include "plenopose/filters.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"
#include "plenopose/parallel.hpp"
#include "plenopose/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

double apply_activation(Activation a, double v) {
    return a == Activation::Relu ? (v > 0.0 ? v : 0.0) : v;
}

double activation_derivative(Activation a, double v) {
    return a == Activation::Relu ? (v > 0.0 ? 1.0 : 0.0) : 1.0;
}

namespace {

void check_finite(const std::vector<double>& w, const char* what) {
    for (double v : w)
        if (!std::isfinite(v))
            throw ValidationError(std::string(what) + ": non-finite weight");
}

std::string activation_name(Activation a) {
    return a == Activation::Relu ? "relu" : "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    throw ParseError("unknown activation '" + name + "'");
}

}  // namespace

AngularFilterBank::AngularFilterBank(int num_filters, int angular_h,
                                     int angular_w, Activation activation)
    : num_filters(num_filters),
      angular_h(angular_h),
      angular_w(angular_w),
      activation(activation),
      weights(static_cast<std::size_t>(num_filters) * 3 * angular_h * angular_w,
              0.0) {
    if (num_filters < 1)
        throw ValidationError("AngularFilterBank: num_filters must be >= 1");
    if (angular_h < 1 || angular_w < 1)
        throw ValidationError("AngularFilterBank: angular dims must be >= 1");
}

void AngularFilterBank::validate() const {
    if (weights.size() != static_cast<std::size_t>(num_filters) * channels *
                              angular_h * angular_w)
        throw ValidationError("AngularFilterBank: weight count mismatch");
    check_finite(weights, "AngularFilterBank");
}

EpiFilterBank::EpiFilterBank(SliceOrientation orientation, int kernel_size,
                             int num_filters, int angular_extent, int dilation,
                             Activation activation)
    : orientation(orientation),
      kernel_size(kernel_size),
      num_filters(num_filters),
      angular_extent(angular_extent),
      dilation(dilation),
      activation(activation),
      weights(static_cast<std::size_t>(num_filters) * 3 * kernel_size *
                  kernel_size * angular_extent,
              0.0) {
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ValidationError("EpiFilterBank: kernel_size must be odd and >= 1");
    if (num_filters < 1)
        throw ValidationError("EpiFilterBank: num_filters must be >= 1");
    if (angular_extent < 1)
        throw ValidationError("EpiFilterBank: angular_extent must be >= 1");
    if (dilation < 1)
        throw ValidationError("EpiFilterBank: dilation must be >= 1");
}

void EpiFilterBank::validate() const {
    if (kernel_size % 2 == 0)
        throw ValidationError("EpiFilterBank: kernel_size must be odd");
    if (weights.size() != static_cast<std::size_t>(num_filters) * channels *
                              kernel_size * kernel_size * angular_extent)
        throw ValidationError("EpiFilterBank: weight count mismatch");
    check_finite(weights, "EpiFilterBank");
}

AngularFilterBank make_angular_bank(int num_filters, int angular_h,
                                    int angular_w, Activation activation,
                                    std::uint64_t seed) {
    AngularFilterBank bank(num_filters, angular_h, angular_w, activation);
    auto rng = make_engine(seed, "angular_bank");
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (double& w : bank.weights) w = dist(rng);
    return bank;
}

EpiFilterBank make_epi_bank(SliceOrientation orientation, int kernel_size,
                            int num_filters, int angular_h, int angular_w,
                            Activation activation, std::uint64_t seed) {
    const bool horizontal = orientation == SliceOrientation::S;
    EpiFilterBank bank(orientation, kernel_size, num_filters,
                       horizontal ? angular_w : angular_h,
                       horizontal ? 1 : angular_w, activation);
    auto rng = make_engine(seed, horizontal ? "sepi_bank" : "tepi_bank");
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (double& w : bank.weights) w = dist(rng);
    return bank;
}

FeatureMap apply_angular(const LightField4D& lf, const AngularFilterBank& bank) {
    bank.validate();
    if (bank.angular_h != lf.angular_h || bank.angular_w != lf.angular_w)
        throw ShapeError("apply_angular: bank angular dims " +
                         std::to_string(bank.angular_h) + "x" +
                         std::to_string(bank.angular_w) +
                         " do not match field " +
                         std::to_string(lf.angular_h) + "x" +
                         std::to_string(lf.angular_w));
    FeatureMap out(lf.spatial_h, lf.spatial_w, bank.num_filters);
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     for (int j = 0; j < bank.num_filters; ++j) {
                         double acc = 0.0;
                         for (int c = 0; c < 3; ++c)
                             for (int t = 0; t < lf.angular_h; ++t)
                                 for (int s = 0; s < lf.angular_w; ++s)
                                     acc += bank.at(j, c, t, s) *
                                            lf.at(y, x, t, s, c);
                         out.at(y, x, j) = apply_activation(bank.activation, acc);
                     }
                 });
    return out;
}

namespace {

// Pre-activation value of one EPI filter at one pixel. Spatial taps outside
// the image contribute zero.
double epi_preact(const LightField4D& lf, const EpiFilterBank& bank, int y,
                  int x, int j) {
    const bool horizontal = bank.orientation == SliceOrientation::S;
    const int fixed = horizontal ? lf.center_t() : lf.center_s();
    const int off = (bank.kernel_size - 1) / 2;
    double acc = 0.0;
    for (int v = 0; v < bank.kernel_size; ++v) {
        const int yy = y + v - off;
        if (yy < 0 || yy >= lf.spatial_h) continue;
        for (int u = 0; u < bank.kernel_size; ++u) {
            const int xx = x + u - off;
            if (xx < 0 || xx >= lf.spatial_w) continue;
            for (int a = 0; a < bank.angular_extent; ++a)
                for (int c = 0; c < 3; ++c)
                    acc += bank.at(j, c, v, u, a) *
                           (horizontal ? lf.at(yy, xx, fixed, a, c)
                                       : lf.at(yy, xx, a, fixed, c));
        }
    }
    return acc;
}

void check_epi_bank(const LightField4D& lf, const EpiFilterBank& bank) {
    bank.validate();
    const int want = bank.orientation == SliceOrientation::S ? lf.angular_w
                                                             : lf.angular_h;
    if (bank.angular_extent != want)
        throw ShapeError("apply_epi: bank angular extent " +
                         std::to_string(bank.angular_extent) +
                         " does not match field extent " +
                         std::to_string(want));
}

}  // namespace

FeatureMap apply_epi(const LightField4D& lf, const EpiFilterBank& bank) {
    check_epi_bank(lf, bank);
    FeatureMap out(lf.spatial_h, lf.spatial_w, bank.num_filters);
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     for (int j = 0; j < bank.num_filters; ++j)
                         out.at(y, x, j) = apply_activation(
                             bank.activation, epi_preact(lf, bank, y, x, j));
                 });
    return out;
}

FeatureMap concat_features(const std::vector<FeatureMap>& maps) {
    if (maps.empty()) throw ShapeError("concat_features: no maps");
    int channels = 0;
    for (const FeatureMap& m : maps) {
        if (m.height != maps[0].height || m.width != maps[0].width)
            throw ShapeError("concat_features: spatial dims differ (" +
                             std::to_string(m.height) + "x" +
                             std::to_string(m.width) + " vs " +
                             std::to_string(maps[0].height) + "x" +
                             std::to_string(maps[0].width) + ")");
        channels += m.channels;
    }
    FeatureMap out(maps[0].height, maps[0].width, channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            int c0 = 0;
            for (const FeatureMap& m : maps) {
                for (int c = 0; c < m.channels; ++c)
                    out.at(y, x, c0 + c) = m.at(y, x, c);
                c0 += m.channels;
            }
        }
    return out;
}

namespace {

void check_upstream(const FeatureMap& upstream, int h, int w, int j,
                    const char* what) {
    if (upstream.height != h || upstream.width != w || upstream.channels != j)
        throw ShapeError(std::string(what) + ": upstream shape " +
                         std::to_string(upstream.height) + "x" +
                         std::to_string(upstream.width) + "x" +
                         std::to_string(upstream.channels) +
                         " does not match forward output " +
                         std::to_string(h) + "x" + std::to_string(w) + "x" +
                         std::to_string(j));
}

}  // namespace

AngularVjp filter_vjp(const LightField4D& lf, const AngularFilterBank& bank,
                      const FeatureMap& upstream) {
    bank.validate();
    if (bank.angular_h != lf.angular_h || bank.angular_w != lf.angular_w)
        throw ShapeError("filter_vjp: bank angular dims do not match field");
    check_upstream(upstream, lf.spatial_h, lf.spatial_w, bank.num_filters,
                   "filter_vjp(angular)");

    // Upstream cotangent pulled through the activation derivative.
    FeatureMap delta(lf.spatial_h, lf.spatial_w, bank.num_filters);
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     for (int j = 0; j < bank.num_filters; ++j) {
                         double acc = 0.0;
                         for (int c = 0; c < 3; ++c)
                             for (int t = 0; t < lf.angular_h; ++t)
                                 for (int s = 0; s < lf.angular_w; ++s)
                                     acc += bank.at(j, c, t, s) *
                                            lf.at(y, x, t, s, c);
                         delta.at(y, x, j) =
                             upstream.at(y, x, j) *
                             activation_derivative(bank.activation, acc);
                     }
                 });

    AngularVjp out{AngularFilterBank(bank.num_filters, bank.angular_h,
                                     bank.angular_w, bank.activation),
                   LightField4D(lf.spatial_h, lf.spatial_w, lf.angular_h,
                                lf.angular_w)};
    parallel_for(bank.num_filters, [&](std::size_t ji) {
        const int j = static_cast<int>(ji);
        for (int y = 0; y < lf.spatial_h; ++y)
            for (int x = 0; x < lf.spatial_w; ++x) {
                const double d = delta.at(y, x, j);
                if (d == 0.0) continue;
                for (int c = 0; c < 3; ++c)
                    for (int t = 0; t < lf.angular_h; ++t)
                        for (int s = 0; s < lf.angular_w; ++s)
                            out.grad_weights.at(j, c, t, s) +=
                                d * lf.at(y, x, t, s, c);
            }
    });
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     for (int c = 0; c < 3; ++c)
                         for (int t = 0; t < lf.angular_h; ++t)
                             for (int s = 0; s < lf.angular_w; ++s) {
                                 double acc = 0.0;
                                 for (int j = 0; j < bank.num_filters; ++j)
                                     acc += delta.at(y, x, j) *
                                            bank.at(j, c, t, s);
                                 out.grad_input.at(y, x, t, s, c) = acc;
                             }
                 });
    return out;
}

EpiVjp filter_vjp(const LightField4D& lf, const EpiFilterBank& bank,
                  const FeatureMap& upstream) {
    check_epi_bank(lf, bank);
    check_upstream(upstream, lf.spatial_h, lf.spatial_w, bank.num_filters,
                   "filter_vjp(epi)");
    const bool horizontal = bank.orientation == SliceOrientation::S;
    const int fixed = horizontal ? lf.center_t() : lf.center_s();
    const int off = (bank.kernel_size - 1) / 2;

    FeatureMap delta(lf.spatial_h, lf.spatial_w, bank.num_filters);
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     for (int j = 0; j < bank.num_filters; ++j)
                         delta.at(y, x, j) =
                             upstream.at(y, x, j) *
                             activation_derivative(
                                 bank.activation, epi_preact(lf, bank, y, x, j));
                 });

    EpiVjp out{EpiFilterBank(bank.orientation, bank.kernel_size,
                             bank.num_filters, bank.angular_extent,
                             bank.dilation, bank.activation),
               LightField4D(lf.spatial_h, lf.spatial_w, lf.angular_h,
                            lf.angular_w)};
    parallel_for(bank.num_filters, [&](std::size_t ji) {
        const int j = static_cast<int>(ji);
        for (int y = 0; y < lf.spatial_h; ++y)
            for (int x = 0; x < lf.spatial_w; ++x) {
                const double d = delta.at(y, x, j);
                if (d == 0.0) continue;
                for (int v = 0; v < bank.kernel_size; ++v) {
                    const int yy = y + v - off;
                    if (yy < 0 || yy >= lf.spatial_h) continue;
                    for (int u = 0; u < bank.kernel_size; ++u) {
                        const int xx = x + u - off;
                        if (xx < 0 || xx >= lf.spatial_w) continue;
                        for (int a = 0; a < bank.angular_extent; ++a)
                            for (int c = 0; c < 3; ++c)
                                out.grad_weights.at(j, c, v, u, a) +=
                                    d * (horizontal
                                             ? lf.at(yy, xx, fixed, a, c)
                                             : lf.at(yy, xx, a, fixed, c));
                    }
                }
            }
    });
    // Gather form of the input gradient: each field sample collects the
    // contributions of every output pixel whose kernel window covers it.
    // Only the fixed angular row (or column) receives gradient.
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int yy = static_cast<int>(p) / lf.spatial_w;
                     const int xx = static_cast<int>(p) % lf.spatial_w;
                     for (int a = 0; a < bank.angular_extent; ++a)
                         for (int c = 0; c < 3; ++c) {
                             double acc = 0.0;
                             for (int v = 0; v < bank.kernel_size; ++v) {
                                 const int y = yy - (v - off);
                                 if (y < 0 || y >= lf.spatial_h) continue;
                                 for (int u = 0; u < bank.kernel_size; ++u) {
                                     const int x = xx - (u - off);
                                     if (x < 0 || x >= lf.spatial_w) continue;
                                     for (int j = 0; j < bank.num_filters; ++j)
                                         acc += delta.at(y, x, j) *
                                                bank.at(j, c, v, u, a);
                                 }
                             }
                             if (horizontal)
                                 out.grad_input.at(yy, xx, fixed, a, c) = acc;
                             else
                                 out.grad_input.at(yy, xx, a, fixed, c) = acc;
                         }
                 });
    return out;
}

FeatureMap angular_variance(const LightField4D& lf) {
    FeatureMap out(lf.spatial_h, lf.spatial_w, 1);
    const double n = static_cast<double>(lf.angular_h) * lf.angular_w;
    parallel_for(static_cast<std::size_t>(lf.spatial_h) * lf.spatial_w,
                 [&](std::size_t p) {
                     const int y = static_cast<int>(p) / lf.spatial_w;
                     const int x = static_cast<int>(p) % lf.spatial_w;
                     double pooled = 0.0;
                     for (int c = 0; c < 3; ++c) {
                         double sum = 0.0, sum_sq = 0.0;
                         for (int t = 0; t < lf.angular_h; ++t)
                             for (int s = 0; s < lf.angular_w; ++s) {
                                 const double v = lf.at(y, x, t, s, c);
                                 sum += v;
                                 sum_sq += v * v;
                             }
                         const double mean = sum / n;
                         const double var = sum_sq / n - mean * mean;
                         pooled += var > 0.0 ? var : 0.0;
                     }
                     out.at(y, x, 0) = pooled / 3.0;
                 });
    return out;
}

namespace {

void write_f32_blob(const std::vector<double>& w, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    for (double v : w) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!out) throw ParseError("failed to write " + path.string());
}

std::vector<double> read_f32_blob(const fs::path& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("missing weight blob " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != count * sizeof(float))
        throw ParseError("weight blob " + path.string() + " holds " +
                         std::to_string(bytes / sizeof(float)) +
                         " floats, expected " + std::to_string(count));
    in.seekg(0);
    std::vector<double> w(count);
    for (std::size_t i = 0; i < count; ++i) {
        float f;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        w[i] = f;
    }
    return w;
}

json load_bank_json(const fs::path& dir, const std::string& want_kind) {
    std::ifstream in(dir / "bank.json");
    if (!in) throw ParseError("missing " + (dir / "bank.json").string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ParseError("malformed bank.json: " + std::string(e.what()));
    }
    if (meta.value("kind", "") != want_kind)
        throw ParseError("bank.json kind '" + meta.value("kind", "") +
                         "', expected '" + want_kind + "'");
    return meta;
}

}  // namespace

void store_angular_bank(const AngularFilterBank& bank, const fs::path& dir) {
    bank.validate();
    fs::create_directories(dir);
    json meta;
    meta["kind"] = "angular";
    meta["num_filters"] = bank.num_filters;
    meta["angular_h"] = bank.angular_h;
    meta["angular_w"] = bank.angular_w;
    meta["activation"] = activation_name(bank.activation);
    std::ofstream(dir / "bank.json") << meta.dump(2) << "\n";
    write_f32_blob(bank.weights, dir / "bank.f32");
}

void store_epi_bank(const EpiFilterBank& bank, const fs::path& dir) {
    bank.validate();
    fs::create_directories(dir);
    json meta;
    meta["kind"] = bank.orientation == SliceOrientation::S ? "sepi" : "tepi";
    meta["num_filters"] = bank.num_filters;
    meta["kernel_size"] = bank.kernel_size;
    meta["angular_extent"] = bank.angular_extent;
    meta["dilation"] = bank.dilation;
    meta["activation"] = activation_name(bank.activation);
    std::ofstream(dir / "bank.json") << meta.dump(2) << "\n";
    write_f32_blob(bank.weights, dir / "bank.f32");
}

AngularFilterBank load_angular_bank(const fs::path& dir) {
    const json meta = load_bank_json(dir, "angular");
    AngularFilterBank bank;
    try {
        bank = AngularFilterBank(
            meta.at("num_filters").get<int>(), meta.at("angular_h").get<int>(),
            meta.at("angular_w").get<int>(),
            activation_from_name(meta.at("activation").get<std::string>()));
    } catch (const json::exception& e) {
        throw ParseError("bank.json missing field: " + std::string(e.what()));
    }
    bank.weights = read_f32_blob(dir / "bank.f32", bank.weights.size());
    bank.validate();
    return bank;
}

EpiFilterBank load_epi_bank(const fs::path& dir) {
    std::ifstream in(dir / "bank.json");
    if (!in) throw ParseError("missing " + (dir / "bank.json").string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ParseError("malformed bank.json: " + std::string(e.what()));
    }
    const std::string kind = meta.value("kind", "");
    if (kind != "sepi" && kind != "tepi")
        throw ParseError("bank.json kind '" + kind +
                         "', expected 'sepi' or 'tepi'");
    EpiFilterBank bank;
    try {
        bank = EpiFilterBank(
            kind == "sepi" ? SliceOrientation::S : SliceOrientation::T,
            meta.at("kernel_size").get<int>(), meta.at("num_filters").get<int>(),
            meta.at("angular_extent").get<int>(), meta.at("dilation").get<int>(),
            activation_from_name(meta.at("activation").get<std::string>()));
    } catch (const json::exception& e) {
        throw ParseError("bank.json missing field: " + std::string(e.what()));
    }
    bank.weights = read_f32_blob(dir / "bank.f32", bank.weights.size());
    bank.validate();
    return bank;
}

}  // namespace plenopose
