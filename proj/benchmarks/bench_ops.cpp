#include <benchmark/benchmark.h>

#include "pconv/ops.hpp"
#include "pconv/perturb.hpp"
#include "pconv/rng.hpp"

namespace {

pconv::Tensor randn(pconv::Shape s, std::uint64_t seed) {
    pconv::RngStream rng(seed, "bench");
    pconv::Tensor t(std::move(s));
    for (double& v : t.data()) v = rng.normal();
    return t;
}

// args: batch, channels, spatial
void BM_Conv2dForwardBackward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto c = static_cast<std::size_t>(state.range(1));
    const auto hw = static_cast<std::size_t>(state.range(2));
    const pconv::Tensor x = randn({n, c, hw, hw}, 1);
    pconv::Parameter w("w", randn({c, c, 3, 3}, 2));
    for (auto _ : state) {
        pconv::Tape tape;
        const auto y = pconv::ops::conv2d(tape.constant(x), tape.parameter(w), 1, 1);
        benchmark::DoNotOptimize(pconv::backward(tape, pconv::ops::sum(y)));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Conv2dForwardBackward)->Args({16, 32, 32})->Args({16, 32, 16})->Args({32, 64, 8})->Unit(benchmark::kMillisecond);

void BM_PConvForward(benchmark::State& state) {
    const pconv::Tensor x = randn({16, 32, 16, 16}, 1);
    const pconv::Tensor w = randn({32, 32, 3, 3}, 2);
    pconv::RngStream rng(3, "mask");
    for (auto _ : state) {
        pconv::Tape tape;
        benchmark::DoNotOptimize(
            pconv::pconv_forward(tape.constant(x), tape.constant(w), 0.1, rng, true, 1, 1).value().raw());
    }
}
BENCHMARK(BM_PConvForward)->Unit(benchmark::kMillisecond);

}  // namespace
