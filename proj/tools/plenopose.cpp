// Command-line entry point: synthesize scenes, build depth likelihood
// volumes, estimate 6D poses, evaluate against ground truth, and export
// plot-ready curve data.
//
// Exit codes: 0 success; 1 component failure (message names the offending
// file or input); 2 configuration or usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plenopose/config.hpp"
#include "plenopose/errors.hpp"
#include "plenopose/eval.hpp"
#include "plenopose/lightfield_io.hpp"
#include "plenopose/parallel.hpp"
#include "plenopose/pipeline.hpp"
#include "plenopose/votes.hpp"

namespace fs = std::filesystem;
using namespace plenopose;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

ConfidenceProfile parse_profile(const std::string& name) {
    if (name == "constant") return ConfidenceProfile::Constant;
    if (name == "center-decay") return ConfidenceProfile::CenterDecay;
    if (name == "residual-exp") return ConfidenceProfile::ResidualExp;
    throw ConfigError("unknown confidence profile '" + name +
                      "' (expected constant, center-decay, or residual-exp)");
}

Roi parse_roi(const std::string& text) {
    Roi roi;
    char comma;
    std::istringstream in(text);
    in >> roi.x >> comma >> roi.y >> comma >> roi.w >> comma >> roi.h;
    if (!in || comma != ',')
        throw ConfigError("--roi expects x,y,w,h");
    return roi;
}

void apply_thread_budget(int cli_threads) {
    int threads = cli_threads;
    if (const char* env = std::getenv("PLENOPOSE_THREADS")) {
        try {
            threads = std::stoi(env);
        } catch (const std::exception&) {
            throw ConfigError("PLENOPOSE_THREADS must be an integer");
        }
    }
    if (threads < 0) throw ConfigError("thread count must be >= 0");
    set_thread_budget(threads);
}

PipelineConfig config_or_default(const std::string& path) {
    if (path.empty()) {
        PipelineConfig cfg;
        cfg.validate();
        return cfg;
    }
    return load_config(path);
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              double vote_noise, const std::string& profile) {
    const SceneSpec spec = load_scene_spec(spec_path);
    synth_scene(spec, out_dir, vote_noise, parse_profile(profile));
    std::cout << "wrote scene to " << out_dir << "\n";
    return kExitOk;
}

int cmd_dlv(const std::string& input_dir, const std::string& out_dir,
            const std::string& roi_text, std::optional<int> planes,
            const std::string& range_text, const std::string& config_path) {
    PipelineConfig cfg = config_or_default(config_path);
    if (planes) cfg.dlv.num_planes = *planes;
    if (!range_text.empty()) {
        std::istringstream in(range_text);
        char comma;
        in >> cfg.dlv.depth_min >> comma >> cfg.dlv.depth_max;
        if (!in || comma != ',') throw ConfigError("--range expects dmin,dmax");
    }
    cfg.validate();
    const LightFieldContainer container = load_lightfield(input_dir);
    Roi roi{0, 0, container.field.spatial_w, container.field.spatial_h};
    if (!roi_text.empty()) roi = parse_roi(roi_text);
    const DepthLikelihoodVolume dlv =
        build_dlv(container.field, container.camera, roi, cfg.dlv);
    fs::create_directories(out_dir);
    store_dlv(dlv, out_dir);
    std::cout << "wrote depth likelihood volume to " << out_dir << "\n";
    return kExitOk;
}

int cmd_estimate(const std::string& lf_dir, const std::string& seg_path,
                 const std::string& votes_path, const std::string& model_path,
                 const std::string& config_path, std::uint64_t seed,
                 const std::string& out_path, const std::string& dlv_dir) {
    PipelineConfig cfg = config_or_default(config_path);
    const LightFieldContainer container = load_lightfield(lf_dir);
    const ClassMap seg = load_classmap_png(seg_path);
    const CenterVoteField votes = load_votes(votes_path);
    const ObjectModel model = load_object(model_path);
    DepthLikelihoodVolume dlv;
    if (dlv_dir.empty()) {
        const Roi full{0, 0, container.field.spatial_w,
                       container.field.spatial_h};
        dlv = build_dlv(container.field, container.camera, full, cfg.dlv);
    } else {
        dlv = load_dlv(dlv_dir);
    }
    const PoseEstimate est =
        estimate(seg_union_mask(seg), votes, dlv, model, container.camera,
                 cfg.likelihood, cfg.diffusion, cfg.termination, seed);
    store_pose_estimate(est, out_path);
    std::cout << "wrote pose to " << out_path << " (weight " << est.weight
              << ", " << est.iterations << " iterations)\n";
    return kExitOk;
}

int cmd_eval(const std::string& est_dir, const std::string& gt_dir,
             const std::string& out_path) {
    const MetricsReport report = eval_dirs(est_dir, gt_dir);
    store_report(report, out_path);
    std::cout << "wrote report to " << out_path << " (AUC " << report.auc
              << ")\n";
    return kExitOk;
}

int cmd_run(const std::string& input_dir, const std::string& config_path,
            const std::string& out_dir) {
    const PipelineConfig cfg = config_or_default(config_path);
    const PipelineResult result = run_pipeline(input_dir, cfg, out_dir);
    std::cout << "wrote results to " << out_dir << " (DLV "
              << result.dlv_seconds << " s, estimation "
              << result.estimate_seconds << " s)\n";
    return kExitOk;
}

int cmd_plot_data(const std::string& report_path,
                  const std::string& out_path) {
    const MetricsReport report = load_report(report_path);
    if (out_path.empty() || out_path == "-") {
        emit_plot_data(report, std::cout);
    } else {
        std::ofstream out(out_path);
        emit_plot_data(report, out);
        if (!out) throw ParseError("plot-data: failed to write " + out_path);
        std::cout << "wrote curve to " << out_path << "\n";
    }
    return kExitOk;
}

const char* kSceneKeysFooter =
    "Scene spec keys (scene.json): camera.{fx,fy,cx,cy,baseline_m,image_w,"
    "image_h}, angular_h, angular_w,\n"
    "background.{depth_m,texture_seed,contrast}, render.{noise_std,"
    "sparkle_rate,seed},\n"
    "objects[].{label,mesh,pose,alpha,tint} with mesh either\n"
    "{kind:cylinder,radius_m,height_m} or {kind:lathe,profile_zr_m}.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "plenopose: light-field perception toolkit for transparent-object "
        "6D pose estimation"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "Worker thread cap (0 = hardware); the PLENOPOSE_THREADS "
                   "environment variable overrides this flag");

    std::string spec_path, out_path, profile = "constant";
    double vote_noise = 0.5;
    auto* synth = app.add_subcommand("synth", "Render a synthetic scene");
    synth->add_option("--spec", spec_path, "Scene spec JSON")->required();
    synth->add_option("--out", out_path, "Output directory")->required();
    synth->add_option("--vote-noise", vote_noise,
                      "Center-vote offset noise std dev, pixels");
    synth->add_option("--profile", profile,
                      "Vote confidence profile: constant, center-decay, or "
                      "residual-exp");
    synth->footer(kSceneKeysFooter);

    std::string dlv_input, dlv_out, roi_text, range_text, config_path;
    std::optional<int> planes;
    auto* dlv = app.add_subcommand("dlv", "Build a depth likelihood volume");
    dlv->add_option("--input", dlv_input, "Light-field container directory")
        ->required();
    dlv->add_option("--out", dlv_out, "Output directory")->required();
    dlv->add_option("--roi", roi_text, "Region of interest x,y,w,h "
                                       "(default full frame)");
    dlv->add_option("--planes", planes, "Number of depth planes");
    dlv->add_option("--range", range_text, "Depth range dmin,dmax in meters");
    dlv->add_option("--config", config_path, "Pipeline config JSON");
    dlv->footer("Reads config keys dlv.* (flags override).\n\n" +
                std::string(config_reference()));

    std::string lf_dir, seg_path, votes_path, model_path, pose_out, dlv_dir,
        est_config;
    std::uint64_t seed = 1;
    auto* est = app.add_subcommand("estimate", "Estimate one object pose");
    est->add_option("--lf", lf_dir, "Light-field container directory")
        ->required();
    est->add_option("--seg", seg_path, "Segmentation class PNG")->required();
    est->add_option("--votes", votes_path, "Center votes JSON")->required();
    est->add_option("--model", model_path, "Object model JSON")->required();
    est->add_option("--config", est_config, "Pipeline config JSON");
    est->add_option("--seed", seed, "RNG seed");
    est->add_option("--out", pose_out, "Output pose JSON")->required();
    est->add_option("--dlv", dlv_dir,
                    "Prebuilt volume directory (default: build from config)");
    est->footer("Reads config keys dlv.*, likelihood.*, diffusion.*, and "
                "termination.*.\n\n" +
                std::string(config_reference()));

    std::string eval_est, eval_gt, report_out;
    auto* evalc = app.add_subcommand("eval", "Score poses against gt.json");
    evalc->add_option("--est", eval_est, "Directory with pose_<label>.json")
        ->required();
    evalc->add_option("--gt", eval_gt, "Directory with gt.json")->required();
    evalc->add_option("--out", report_out, "Output report JSON")->required();
    evalc->footer("Reads no config keys.");

    std::string run_input, run_config, run_out;
    auto* run = app.add_subcommand("run", "End-to-end pipeline");
    run->add_option("--input", run_input,
                    "Scene directory (container + seg.png + votes.json + "
                    "gt.json)")
        ->required();
    run->add_option("--config", run_config, "Pipeline config JSON");
    run->add_option("--out", run_out, "Results directory")->required();
    run->footer("Reads every config key.\n\n" +
                std::string(config_reference()));

    std::string plot_report, plot_out;
    auto* plot = app.add_subcommand("plot-data",
                                    "Export the accuracy curve as CSV");
    plot->add_option("--report", plot_report, "report.json path")->required();
    plot->add_option("--out", plot_out, "Output CSV ('-' for stdout)");
    plot->footer("Reads no config keys.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        apply_thread_budget(threads);
        if (*synth)
            return cmd_synth(spec_path, out_path, vote_noise, profile);
        if (*dlv)
            return cmd_dlv(dlv_input, dlv_out, roi_text, planes, range_text,
                           config_path);
        if (*est)
            return cmd_estimate(lf_dir, seg_path, votes_path, model_path,
                                est_config, seed, pose_out, dlv_dir);
        if (*evalc) return cmd_eval(eval_est, eval_gt, report_out);
        if (*run) return cmd_run(run_input, run_config, run_out);
        if (*plot) return cmd_plot_data(plot_report, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitConfig;
}
