#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "plenopose/config.hpp"
#include "plenopose/errors.hpp"
#include "plenopose/pipeline.hpp"

#include "helpers.hpp"

using namespace plenopose;

TEST_SUITE_BEGIN("pipeline");

namespace {

SceneSpec tiny_scene() {
    SceneSpec spec;
    spec.camera.fx = 200.0;
    spec.camera.fy = 200.0;
    spec.camera.cx = 47.5;
    spec.camera.cy = 47.5;
    spec.camera.baseline = 0.01;
    spec.camera.image_w = 96;
    spec.camera.image_h = 96;
    spec.angular_h = 3;
    spec.angular_w = 3;
    spec.background.depth = 1.0;
    spec.background.texture_seed = 3;
    SceneObject obj;
    obj.label = "cyl";
    obj.mesh = ParametricMesh::cylinder(0.03, 0.09);
    obj.pose.translation = {0.0, 0.0, 0.5};
    const double s = std::sqrt(0.5);
    obj.pose.rotation = Eigen::Quaterniond(s, 0.0, s, 0.0);
    obj.alpha = 0.85;
    spec.objects.push_back(obj);
    return spec;
}

PipelineConfig quick_config() {
    PipelineConfig cfg;
    cfg.seed = 11;
    cfg.dlv.num_planes = 12;
    cfg.termination.num_particles = 150;
    cfg.termination.max_iterations = 3;
    cfg.termination.weight_threshold = 1.01;
    return cfg;
}

// Recursive byte comparison of two directory trees.
bool trees_identical(const std::filesystem::path& a,
                     const std::filesystem::path& b) {
    std::vector<std::filesystem::path> rel;
    for (const auto& e : std::filesystem::recursive_directory_iterator(a))
        if (e.is_regular_file())
            rel.push_back(std::filesystem::relative(e.path(), a));
    std::size_t b_files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(b))
        b_files += e.is_regular_file();
    if (b_files != rel.size()) return false;
    for (const auto& r : rel) {
        if (!std::filesystem::exists(b / r)) return false;
        if (testutil::slurp(a / r) != testutil::slurp(b / r)) return false;
    }
    return true;
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(PLENOPOSE_TOOL_PATH) + " " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_tool_stdout(const std::string& args) {
    const std::string cmd =
        std::string(PLENOPOSE_TOOL_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    pclose(pipe);
    return out;
}

}  // namespace

TEST_CASE("full pipeline over a scene directory, repeated byte-identically") {
    testutil::TempDir tmp("pipe");
    const SceneSpec spec = tiny_scene();
    synth_scene(spec, tmp.path() / "scene");
    CHECK(std::filesystem::exists(tmp.path() / "scene" / "seg.png"));
    CHECK(std::filesystem::exists(tmp.path() / "scene" / "votes.json"));
    CHECK(std::filesystem::exists(tmp.path() / "scene" / "gt.json"));

    const PipelineConfig cfg = quick_config();
    const PipelineResult r1 =
        run_pipeline(tmp.path() / "scene", cfg, tmp.path() / "out1");
    REQUIRE(r1.poses.count("cyl") == 1);
    CHECK(r1.poses.at("cyl").iterations == 3);
    CHECK(r1.report.add_s_m.count("cyl") == 1);
    CHECK(std::filesystem::exists(tmp.path() / "out1" / "pose_cyl.json"));
    CHECK(std::filesystem::exists(tmp.path() / "out1" / "report.json"));
    CHECK(std::filesystem::exists(tmp.path() / "out1" / "dlv" / "dlv.f32"));

    const PipelineResult r2 =
        run_pipeline(tmp.path() / "scene", cfg, tmp.path() / "out2");
    CHECK((r1.poses.at("cyl").pose.translation -
           r2.poses.at("cyl").pose.translation)
              .norm() == 0.0);
    CHECK(trees_identical(tmp.path() / "out1", tmp.path() / "out2"));

    // Scoring the written estimates against the scene ground truth agrees
    // with the in-memory report.
    const MetricsReport rescored =
        eval_dirs(tmp.path() / "out1", tmp.path() / "scene");
    CHECK(rescored.add_s_m.at("cyl") ==
          doctest::Approx(r1.report.add_s_m.at("cyl")).epsilon(1e-12));
    CHECK(rescored.auc == doctest::Approx(r1.report.auc).epsilon(1e-12));
}

TEST_CASE("missing inputs fail with the file named") {
    testutil::TempDir tmp("pipe_missing");
    const SceneSpec spec = tiny_scene();
    synth_scene(spec, tmp.path() / "scene");
    std::filesystem::remove(tmp.path() / "scene" / "votes.json");
    try {
        run_pipeline(tmp.path() / "scene", quick_config(),
                     tmp.path() / "out");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("votes.json") != std::string::npos);
    }
}

TEST_CASE("command line: synth, run, eval, exit codes") {
    testutil::TempDir tmp("cli");
    const auto scene_dir = tmp.path() / "scene";
    const auto spec_path = tmp.path() / "spec.json";
    store_scene_spec(tiny_scene(), spec_path);
    CHECK(run_tool("synth --spec " + spec_path.string() + " --out " +
                   scene_dir.string()) == 0);
    CHECK(std::filesystem::exists(scene_dir / "gt.json"));

    const auto cfg_path = tmp.path() / "cfg.json";
    store_config(quick_config(), cfg_path);
    CHECK(run_tool("run --input " + scene_dir.string() + " --config " +
                   cfg_path.string() + " --out " +
                   (tmp.path() / "out1").string()) == 0);
    CHECK(run_tool("run --input " + scene_dir.string() + " --config " +
                   cfg_path.string() + " --out " +
                   (tmp.path() / "out2").string()) == 0);
    CHECK(trees_identical(tmp.path() / "out1", tmp.path() / "out2"));

    CHECK(run_tool("eval --est " + (tmp.path() / "out1").string() +
                   " --gt " + scene_dir.string() + " --out " +
                   (tmp.path() / "eval.json").string()) == 0);
    CHECK(std::filesystem::exists(tmp.path() / "eval.json"));

    // Plot data goes to stdout with a CSV header and monotone thresholds.
    const std::string csv = run_tool_stdout(
        "plot-data --report " + (tmp.path() / "out1" / "report.json").string() +
        " --out -");
    REQUIRE(csv.rfind("threshold_m,accuracy\n", 0) == 0);
    double prev = -1.0;
    std::size_t pos = csv.find('\n') + 1;
    while (pos < csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        REQUIRE(comma != std::string::npos);
        const double th = std::stod(csv.substr(pos, comma - pos));
        CHECK(th >= prev);
        prev = th;
        pos = csv.find('\n', comma);
        REQUIRE(pos != std::string::npos);
        ++pos;
    }

    // Config validation failures exit with the config code.
    std::ofstream(tmp.path() / "bad_eta.json")
        << "{\"seed\": 1, \"likelihood\": {\"eta\": 1.5}}";
    CHECK(run_tool("run --input " + scene_dir.string() + " --config " +
                   (tmp.path() / "bad_eta.json").string() + " --out " +
                   (tmp.path() / "out3").string()) == 2);
    std::ofstream(tmp.path() / "unknown.json")
        << "{\"seed\": 1, \"unknown_key\": true}";
    CHECK(run_tool("run --input " + scene_dir.string() + " --config " +
                   (tmp.path() / "unknown.json").string() + " --out " +
                   (tmp.path() / "out4").string()) == 2);

    // Unknown flags are CLI parse errors (config code as well).
    CHECK(run_tool("run --no-such-flag") == 2);

    // Missing scene inputs are component failures.
    CHECK(run_tool("run --input " + (tmp.path() / "nowhere").string() +
                   " --config " + cfg_path.string() + " --out " +
                   (tmp.path() / "out5").string()) == 1);
}

TEST_CASE("thread budget: env var overrides the flag, outputs unchanged") {
    testutil::TempDir tmp("cli_threads");
    const auto scene_dir = tmp.path() / "scene";
    const auto spec_path = tmp.path() / "spec.json";
    store_scene_spec(tiny_scene(), spec_path);
    REQUIRE(run_tool("synth --spec " + spec_path.string() + " --out " +
                     scene_dir.string()) == 0);

    const std::string base_args =
        "dlv --input " + scene_dir.string() + " --planes 10";
    CHECK(run_tool(base_args + " --threads 1 --out " +
                   (tmp.path() / "d1").string()) == 0);
    const std::string env_cmd =
        "PLENOPOSE_THREADS=4 " + std::string(PLENOPOSE_TOOL_PATH) + " " +
        base_args + " --threads 1 --out " + (tmp.path() / "d4").string() +
        " >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(env_cmd.c_str())) == 0);
    CHECK(testutil::slurp(tmp.path() / "d1" / "dlv.f32") ==
          testutil::slurp(tmp.path() / "d4" / "dlv.f32"));
}

TEST_SUITE_END();
