#include <benchmark/benchmark.h>

#include "anomorph/deformation.hpp"
#include "anomorph/graph.hpp"
#include "anomorph/losses.hpp"
#include "anomorph/networks.hpp"
#include "anomorph/ops.hpp"
#include "anomorph/rng.hpp"

using namespace anomorph;

namespace {

NdArray random_array(std::vector<int> shape, uint64_t seed, float lo = -1.0f,
                     float hi = 1.0f) {
    Rng rng(seed);
    NdArray a(std::move(shape));
    for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(lo, hi);
    return a;
}

void conv_forward(benchmark::State& state) {
    const int c = (int)state.range(0);
    Tensor x = Tensor::constant(random_array({1, c, 16, 16, 16}, 1));
    Tensor k = Tensor::constant(random_array({2 * c, c, 3, 3, 3}, 2));
    Tensor b = Tensor::constant(NdArray({2 * c}));
    NoGradGuard ng;
    for (auto _ : state) {
        Tensor y = conv3d(x, k, b, 2, 1);
        benchmark::DoNotOptimize(y.value().data());
    }
}
BENCHMARK(conv_forward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void conv_train_step(benchmark::State& state) {
    const int c = (int)state.range(0);
    Tensor x = Tensor::constant(random_array({1, 1, 16, 16, 16}, 3));
    Parameter k("k", random_array({c, 1, 3, 3, 3}, 4, -0.1f, 0.1f));
    Parameter b("b", NdArray({c}));
    for (auto _ : state) {
        Tensor y = conv3d(x, k.tensor(), b.tensor(), 1, 1);
        backward(mean(mul(y, y)));
        k.zero_grad();
        b.zero_grad();
    }
}
BENCHMARK(conv_train_step)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void warp_op(benchmark::State& state) {
    const int n = (int)state.range(0);
    Tensor src = Tensor::constant(random_array({1, 1, n, n, n}, 5, 0.0f, 1.0f));
    Tensor field = Tensor::constant(random_array({1, 3, n, n, n}, 6, -1.0f, 1.0f));
    NoGradGuard ng;
    for (auto _ : state) {
        Tensor y = warp(src, field);
        benchmark::DoNotOptimize(y.value().data());
    }
}
BENCHMARK(warp_op)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void window_mean(benchmark::State& state) {
    const int win = (int)state.range(0);
    Tensor x = Tensor::constant(random_array({1, 1, 32, 32, 32}, 7, 0.0f, 1.0f));
    NoGradGuard ng;
    for (auto _ : state) {
        Tensor y = mean_over_window(x, win);
        benchmark::DoNotOptimize(y.value().data());
    }
}
BENCHMARK(window_mean)->Arg(3)->Arg(9)->Unit(benchmark::kMillisecond);

void lncc_loss(benchmark::State& state) {
    Tensor x = Tensor::constant(random_array({1, 1, 32, 32, 32}, 8, 0.0f, 1.0f));
    Tensor y = Tensor::constant(random_array({1, 1, 32, 32, 32}, 9, 0.0f, 1.0f));
    NoGradGuard ng;
    for (auto _ : state) {
        Tensor l = lncc(x, y, 9, 1e-3f);
        benchmark::DoNotOptimize(l.scalar());
    }
}
BENCHMARK(lncc_loss)->Unit(benchmark::kMillisecond);

void jacobian(benchmark::State& state) {
    const int n = (int)state.range(0);
    DeformationField f(random_array({3, n, n, n}, 10, -1.0f, 1.0f));
    for (auto _ : state) {
        Volume det = jacobian_determinant(f);
        benchmark::DoNotOptimize(det.data.data());
    }
}
BENCHMARK(jacobian)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void full_reconstruction(benchmark::State& state) {
    ArchConfig cfg;
    cfg.levels = 4;
    cfg.base_channels = 8;
    cfg.latent_channels = 64;
    cfg.disc_levels = 3;
    cfg.disc_base = 8;
    cfg.deformer_hidden = 6;
    ModelSet m = build_models(cfg, 11, 10.0f, 0.01f);
    Tensor x = Tensor::constant(random_array({1, 1, 32, 32, 32}, 12, 0.0f, 1.0f));
    NoGradGuard ng;
    for (auto _ : state) {
        DecodeResult r = reconstruct(m.ae, x);
        benchmark::DoNotOptimize(r.recon.value().data());
    }
}
BENCHMARK(full_reconstruction)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
