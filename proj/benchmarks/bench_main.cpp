#include <benchmark/benchmark.h>

#include <random>

#include "rpca/conv.hpp"
#include "rpca/net.hpp"
#include "rpca/prox.hpp"
#include "rpca/svd.hpp"

using namespace rpca;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(r, c);
    for (double& v : m.flat()) v = normal(rng);
    return m;
}

// Tall n x m matrices as used for video: rows = pixels, cols = frames.
void BM_Svd(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = static_cast<std::size_t>(state.range(1));
    const Matrix x = random_matrix(n, m, 1);
    for (auto _ : state) benchmark::DoNotOptimize(svd(x));
}
BENCHMARK(BM_Svd)->Args({256, 20})->Args({1024, 20})->Args({64, 64})->Unit(benchmark::kMillisecond);

void BM_Conv(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const FrameShape shape{side, side};
    const Matrix video = random_matrix(shape.pixels(), 20, 2);
    const ConvKernel kernel(k, std::vector<double>(k * k, 0.1));
    for (auto _ : state) benchmark::DoNotOptimize(conv2d_same(video, shape, kernel));
}
BENCHMARK(BM_Conv)->Args({32, 3})->Args({32, 5})->Args({64, 5})->Unit(benchmark::kMicrosecond);

void BM_ReweightedProx(benchmark::State& state) {
    const Matrix x = random_matrix(1024, 20, 3);
    const Matrix ref = random_matrix(1024, 20, 4);
    const std::vector<double> q(1024, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(reweighted_l1l1_prox_matrix(x, 0.2, 0.1, q, ref));
}
BENCHMARK(BM_ReweightedProx)->Unit(benchmark::kMicrosecond);

struct LayerFixture {
    NetworkParams params;
    Matrix M;

    LayerFixture(Variant variant, std::size_t side) {
        params = init_params(1, NetworkGeometry{{side, side}, 20, 5}, variant, 7);
        M = random_matrix(side * side, 20, 5);
    }
};

void BM_LayerForward(benchmark::State& state) {
    const LayerFixture f(static_cast<Variant>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(network_forward(f.M, f.params));
}

void BM_LayerBackward(benchmark::State& state) {
    const LayerFixture f(static_cast<Variant>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    const ForwardResult fwd = network_forward(f.M, f.params);
    for (auto _ : state) benchmark::DoNotOptimize(network_backward(fwd.tape, f.params, fwd.L, fwd.S));
}

const int kRef = static_cast<int>(Variant::RefRPCA);
const int kCorona = static_cast<int>(Variant::Corona);
BENCHMARK(BM_LayerForward)->Args({kRef, 16})->Args({kRef, 32})->Args({kCorona, 32})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LayerBackward)->Args({kRef, 16})->Args({kRef, 32})->Args({kCorona, 32})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
