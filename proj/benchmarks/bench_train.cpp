#include <benchmark/benchmark.h>

#include "pconv/trainer.hpp"

namespace {

pconv::TrainConfig gmm_config() {
    pconv::TrainConfig c;
    c.total_g_iters = 1'000'000;
    c.d_batch = 64;
    c.g_batch = 128;
    return c;
}

pconv::TrainConfig tiny_config(std::size_t resolution) {
    pconv::TrainConfig c;
    c.preset = "tiny32";
    c.latent_dim = 128;
    c.total_g_iters = 1'000'000;
    c.d_batch = 16;
    c.g_batch = 32;
    c.perturb = pconv::PerturbVariant::pconv(0.1);
    c.dataset.kind = pconv::DatasetKind::synthetic_images;
    c.dataset.resolution = resolution;
    c.dataset.n_train = 256;
    return c;
}

void BM_TrainStepGmm8(benchmark::State& state) {
    pconv::RunState s = pconv::init_run(gmm_config());
    for (auto _ : state) pconv::train_step(s);
}
BENCHMARK(BM_TrainStepGmm8)->Unit(benchmark::kMillisecond);

void BM_TrainStepTiny(benchmark::State& state) {
    pconv::RunState s = pconv::init_run(tiny_config(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) pconv::train_step(s);
}
BENCHMARK(BM_TrainStepTiny)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
