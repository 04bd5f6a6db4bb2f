// Micro benchmarks for depth likelihood volume construction.
#include <benchmark/benchmark.h>

#include <cmath>

#include <plenopose/dlv.hpp>
#include <plenopose/scene.hpp>

using namespace plenopose;

namespace {

SceneSpec small_spec() {
    SceneSpec spec;
    spec.camera.fx = 200.0;
    spec.camera.fy = 200.0;
    spec.camera.cx = 47.5;
    spec.camera.cy = 47.5;
    spec.camera.baseline = 0.01;
    spec.camera.image_w = 96;
    spec.camera.image_h = 96;
    spec.background.depth = 1.0;
    spec.background.texture_seed = 6;
    SceneObject obj;
    obj.label = "cylinder";
    obj.mesh = ParametricMesh::cylinder(0.03, 0.09);
    obj.pose.translation = {0.0, 0.0, 0.5};
    const double s = std::sqrt(0.5);
    obj.pose.rotation = Eigen::Quaterniond(s, 0.0, s, 0.0);
    obj.alpha = 0.85;
    spec.objects.push_back(obj);
    return spec;
}

const RenderOutputs& rendered() {
    static const RenderOutputs out = render_scene(small_spec());
    return out;
}

}  // namespace

static void BM_BuildDlv16(benchmark::State& state) {
    const SceneSpec spec = small_spec();
    DlvConfig cfg;
    cfg.num_planes = 16;
    const Roi roi{0, 0, 96, 96};
    for (auto _ : state) {
        DepthLikelihoodVolume dlv =
            build_dlv(rendered().lightfield, spec.camera, roi, cfg);
        benchmark::DoNotOptimize(dlv.values.data());
    }
}
BENCHMARK(BM_BuildDlv16)->Unit(benchmark::kMillisecond);

static void BM_BuildDlv64Roi(benchmark::State& state) {
    const SceneSpec spec = small_spec();
    DlvConfig cfg;
    cfg.num_planes = 64;
    const Roi roi{24, 24, 48, 48};
    for (auto _ : state) {
        DepthLikelihoodVolume dlv =
            build_dlv(rendered().lightfield, spec.camera, roi, cfg);
        benchmark::DoNotOptimize(dlv.values.data());
    }
}
BENCHMARK(BM_BuildDlv64Roi)->Unit(benchmark::kMillisecond);

static void BM_PlaneDepths(benchmark::State& state) {
    const DlvConfig cfg;
    for (auto _ : state) {
        std::vector<double> d = plane_depths(cfg);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_PlaneDepths);

BENCHMARK_MAIN();
