// Micro benchmarks for the particle pose estimator's hot paths.
#include <benchmark/benchmark.h>

#include <cmath>

#include <plenopose/dlv.hpp>
#include <plenopose/model.hpp>
#include <plenopose/pose.hpp>
#include <plenopose/rng.hpp>
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

struct World {
    SceneSpec spec = small_spec();
    RenderOutputs out = render_scene(spec);
    Mask seg = seg_union_mask(out.seg);
    DepthLikelihoodVolume dlv;
    ObjectModel model = make_object(spec.objects[0].mesh, 4000, "cyl");

    World() {
        DlvConfig cfg;
        cfg.num_planes = 16;
        dlv = build_dlv(out.lightfield, spec.camera, {0, 0, 96, 96}, cfg);
    }
};

const World& world() {
    static const World w;
    return w;
}

}  // namespace

static void BM_ProjectSilhouette(benchmark::State& state) {
    const ObjectModel model =
        make_object(ParametricMesh::cylinder(0.04, 0.12), 8000, "cyl");
    CameraModel cam;
    cam.fx = cam.fy = 500.0;
    cam.cx = cam.cy = 111.5;
    Pose pose;
    pose.translation = {0.0, 0.0, 0.5};
    const double s = std::sqrt(0.5);
    pose.rotation = Eigen::Quaterniond(s, 0.0, s, 0.0);
    for (auto _ : state) {
        Mask m = project_silhouette(model, pose, cam, 224, 224, 2);
        benchmark::DoNotOptimize(m.data.data());
    }
}
BENCHMARK(BM_ProjectSilhouette);

static void BM_LikelihoodWeight(benchmark::State& state) {
    const World& w = world();
    Pose pose = w.spec.objects[0].pose;
    pose.translation.z() += 0.01;
    const Mask silh =
        project_silhouette(w.model, pose, w.spec.camera, 96, 96, 2);
    const Mask b_silh = boundary(silh, 1);
    const Mask b_seg = boundary(w.seg, 1);
    const LikelihoodConfig cfg;
    for (auto _ : state) {
        double v = likelihood_weight(silh, w.seg, b_silh, b_seg, cfg);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_LikelihoodWeight);

static void BM_InitSamples(benchmark::State& state) {
    const World& w = world();
    for (auto _ : state) {
        ParticleSet ps =
            init_samples(w.out.votes, w.dlv, w.spec.camera, 400, 99);
        benchmark::DoNotOptimize(ps.particles.data());
    }
}
BENCHMARK(BM_InitSamples);

static void BM_ResampleDiffuse(benchmark::State& state) {
    const World& w = world();
    ParticleSet ps = init_samples(w.out.votes, w.dlv, w.spec.camera, 400, 99);
    const DiffusionConfig diff;
    for (auto _ : state) {
        auto rng = make_engine(7, "resample", 1);
        ParticleSet next = resample(ps, rng);
        auto drng = make_engine(7, "diffuse", 1);
        next = diffuse(next, diff, drng);
        benchmark::DoNotOptimize(next.particles.data());
    }
}
BENCHMARK(BM_ResampleDiffuse);

static void BM_EstimateOneIteration(benchmark::State& state) {
    const World& w = world();
    const LikelihoodConfig like;
    const DiffusionConfig diff;
    TerminationConfig term;
    term.weight_threshold = 1.01;
    term.max_iterations = 1;
    term.num_particles = 200;
    for (auto _ : state) {
        PoseEstimate est = estimate(w.seg, w.out.votes, w.dlv, w.model,
                                    w.spec.camera, like, diff, term, 42);
        benchmark::DoNotOptimize(est.weight);
    }
}
BENCHMARK(BM_EstimateOneIteration)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
