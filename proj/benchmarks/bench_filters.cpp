// Micro benchmarks for the light-field filter operators.
#include <benchmark/benchmark.h>

#include <random>

#include <plenopose/filters.hpp>
#include <plenopose/lightfield.hpp>

using namespace plenopose;

namespace {

LightField4D random_field(int sh, int sw, int ah, int aw, std::uint64_t seed) {
    LightField4D lf(sh, sw, ah, aw);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : lf.data) v = uni(rng);
    return lf;
}

const LightField4D& field() {
    static const LightField4D lf = random_field(64, 64, 5, 5, 17);
    return lf;
}

}  // namespace

static void BM_ApplyAngular(benchmark::State& state) {
    const auto bank = make_angular_bank(4, 5, 5, Activation::Relu, 3);
    for (auto _ : state) {
        FeatureMap out = apply_angular(field(), bank);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_ApplyAngular);

static void BM_ApplyEpiS(benchmark::State& state) {
    const auto bank =
        make_epi_bank(SliceOrientation::S, 3, 4, 5, 5, Activation::Relu, 5);
    for (auto _ : state) {
        FeatureMap out = apply_epi(field(), bank);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_ApplyEpiS);

static void BM_AngularVjp(benchmark::State& state) {
    const auto bank = make_angular_bank(4, 5, 5, Activation::Relu, 3);
    const FeatureMap upstream(64, 64, 4, 1.0);
    for (auto _ : state) {
        AngularVjp vjp = filter_vjp(field(), bank, upstream);
        benchmark::DoNotOptimize(vjp.grad_input.data.data());
    }
}
BENCHMARK(BM_AngularVjp);

static void BM_EpiVjpT(benchmark::State& state) {
    const auto bank =
        make_epi_bank(SliceOrientation::T, 3, 4, 5, 5, Activation::Relu, 7);
    const FeatureMap upstream(64, 64, 4, 1.0);
    for (auto _ : state) {
        EpiVjp vjp = filter_vjp(field(), bank, upstream);
        benchmark::DoNotOptimize(vjp.grad_input.data.data());
    }
}
BENCHMARK(BM_EpiVjpT);

static void BM_AngularVariance(benchmark::State& state) {
    for (auto _ : state) {
        FeatureMap out = angular_variance(field());
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_AngularVariance);

BENCHMARK_MAIN();
