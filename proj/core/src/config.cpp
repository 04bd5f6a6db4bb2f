#include "plenopose/config.hpp"

#include <fstream>

#include "plenopose/errors.hpp"
#include "plenopose/jsonio.hpp"

using json = nlohmann::json;

namespace plenopose {

void PipelineConfig::validate() const {
    try {
        dlv.validate();
        likelihood.validate();
        diffusion.validate();
        termination.validate();
        loss.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

namespace {

template <typename T>
void read_field(const json& doc, const char* key, T* out,
                const std::string& context) {
    if (!doc.contains(key)) return;
    try {
        *out = doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(context + ": key '" + std::string(key) +
                          "' has the wrong type");
    }
}

}  // namespace

json config_to_json(const PipelineConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    json& d = doc["dlv"];
    d["depth_min_m"] = cfg.dlv.depth_min;
    d["depth_max_m"] = cfg.dlv.depth_max;
    d["num_planes"] = cfg.dlv.num_planes;
    d["intensity_weight"] = cfg.dlv.intensity_weight;
    d["gradient_weight"] = cfg.dlv.gradient_weight;
    d["cost_scale"] = cfg.dlv.cost_scale;
    if (!cfg.dlv.view_set.empty()) {
        d["view_set"] = json::array();
        for (const auto& [t, s] : cfg.dlv.view_set)
            d["view_set"].push_back({t, s});
    }
    json& l = doc["likelihood"];
    l["eta"] = cfg.likelihood.eta;
    l["boundary_thickness_px"] = cfg.likelihood.boundary_thickness;
    l["splat_radius_px"] = cfg.likelihood.splat_radius;
    json& f = doc["diffusion"];
    f["sigma_t_m"] = cfg.diffusion.sigma_t;
    f["sigma_r_rad"] = cfg.diffusion.sigma_r;
    json& t = doc["termination"];
    t["weight_threshold"] = cfg.termination.weight_threshold;
    t["max_iterations"] = cfg.termination.max_iterations;
    t["num_particles"] = cfg.termination.num_particles;
    json& o = doc["loss"];
    o["alpha"] = cfg.loss.alpha;
    o["beta"] = cfg.loss.beta;
    o["gamma"] = cfg.loss.gamma;
    o["tau"] = cfg.loss.tau;
    return doc;
}

PipelineConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: not a JSON object");
    require_known_keys(doc, {"seed", "dlv", "likelihood", "diffusion",
                             "termination", "loss"},
                       "config");
    if (!doc.contains("seed"))
        throw ConfigError(
            "config: 'seed' is required (no wall-clock seeding)");
    PipelineConfig cfg;
    read_field(doc, "seed", &cfg.seed, "config");
    if (doc.contains("dlv")) {
        const json& d = doc.at("dlv");
        require_known_keys(d, {"depth_min_m", "depth_max_m", "num_planes",
                               "intensity_weight", "gradient_weight",
                               "cost_scale", "view_set"},
                           "config.dlv");
        read_field(d, "depth_min_m", &cfg.dlv.depth_min, "config.dlv");
        read_field(d, "depth_max_m", &cfg.dlv.depth_max, "config.dlv");
        read_field(d, "num_planes", &cfg.dlv.num_planes, "config.dlv");
        read_field(d, "intensity_weight", &cfg.dlv.intensity_weight,
                   "config.dlv");
        read_field(d, "gradient_weight", &cfg.dlv.gradient_weight,
                   "config.dlv");
        read_field(d, "cost_scale", &cfg.dlv.cost_scale, "config.dlv");
        if (d.contains("view_set")) {
            cfg.dlv.view_set.clear();
            for (const auto& pair : d.at("view_set")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError(
                        "config.dlv: view_set entries must be [t, s] pairs");
                cfg.dlv.view_set.emplace_back(pair[0].get<int>(),
                                              pair[1].get<int>());
            }
        }
    }
    if (doc.contains("likelihood")) {
        const json& l = doc.at("likelihood");
        require_known_keys(
            l, {"eta", "boundary_thickness_px", "splat_radius_px"},
            "config.likelihood");
        read_field(l, "eta", &cfg.likelihood.eta, "config.likelihood");
        read_field(l, "boundary_thickness_px",
                   &cfg.likelihood.boundary_thickness, "config.likelihood");
        read_field(l, "splat_radius_px", &cfg.likelihood.splat_radius,
                   "config.likelihood");
    }
    if (doc.contains("diffusion")) {
        const json& f = doc.at("diffusion");
        require_known_keys(f, {"sigma_t_m", "sigma_r_rad"},
                           "config.diffusion");
        read_field(f, "sigma_t_m", &cfg.diffusion.sigma_t, "config.diffusion");
        read_field(f, "sigma_r_rad", &cfg.diffusion.sigma_r,
                   "config.diffusion");
    }
    if (doc.contains("termination")) {
        const json& t = doc.at("termination");
        require_known_keys(
            t, {"weight_threshold", "max_iterations", "num_particles"},
            "config.termination");
        read_field(t, "weight_threshold", &cfg.termination.weight_threshold,
                   "config.termination");
        read_field(t, "max_iterations", &cfg.termination.max_iterations,
                   "config.termination");
        read_field(t, "num_particles", &cfg.termination.num_particles,
                   "config.termination");
    }
    if (doc.contains("loss")) {
        const json& o = doc.at("loss");
        require_known_keys(o, {"alpha", "beta", "gamma", "tau"},
                           "config.loss");
        read_field(o, "alpha", &cfg.loss.alpha, "config.loss");
        read_field(o, "beta", &cfg.loss.beta, "config.loss");
        read_field(o, "gamma", &cfg.loss.gamma, "config.loss");
        read_field(o, "tau", &cfg.loss.tau, "config.loss");
    }
    cfg.validate();
    return cfg;
}

void store_config(const PipelineConfig& cfg,
                  const std::filesystem::path& path) {
    cfg.validate();
    std::ofstream out(path);
    out << config_to_json(cfg).dump(2) << "\n";
    if (!out)
        throw ParseError("store_config: failed to write " + path.string());
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_config: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("load_config: " + path.string() +
                          ": malformed JSON: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

std::string config_reference() {
    return
        "Config file keys (JSON; unknown keys are an error):\n"
        "  seed                            base RNG seed, required; every\n"
        "                                  random draw derives from it\n"
        "  dlv.depth_min_m                 nearest depth plane (default 0.3)\n"
        "  dlv.depth_max_m                 farthest depth plane (default 1.0)\n"
        "  dlv.num_planes                  planes, uniform in inverse depth\n"
        "                                  (default 64)\n"
        "  dlv.intensity_weight            color-difference cost weight\n"
        "                                  (default 1.0)\n"
        "  dlv.gradient_weight             gradient-magnitude cost weight\n"
        "                                  (default 0.5)\n"
        "  dlv.cost_scale                  cost-to-likelihood sigma\n"
        "                                  (default 0.1)\n"
        "  dlv.view_set                    [t, s] view pairs scored; default\n"
        "                                  all views except the center\n"
        "  likelihood.eta                  region-vs-boundary IoU mix\n"
        "                                  (default 0.8)\n"
        "  likelihood.boundary_thickness_px  boundary band half-width\n"
        "                                  (default 1)\n"
        "  likelihood.splat_radius_px      silhouette point splat radius\n"
        "                                  (default 2)\n"
        "  diffusion.sigma_t_m             translation noise std dev\n"
        "                                  (default 0.08)\n"
        "  diffusion.sigma_r_rad           rotation angle noise std dev\n"
        "                                  (default 0.4)\n"
        "  termination.weight_threshold    stop once a particle's raw weight\n"
        "                                  reaches this (default 0.7)\n"
        "  termination.max_iterations      iteration cap (default 30)\n"
        "  termination.num_particles       particle count (default 400)\n"
        "  loss.alpha                      segmentation loss weight\n"
        "                                  (default 1)\n"
        "  loss.beta                       center-offset loss weight\n"
        "                                  (default 8)\n"
        "  loss.gamma                      confidence loss weight\n"
        "                                  (default 2)\n"
        "  loss.tau                        confidence decay per residual\n"
        "                                  pixel (default 0.5)\n";
}

}  // namespace plenopose
