#include <benchmark/benchmark.h>

#include <numeric>

#include "iscs/discovery.hpp"
#include "iscs/grouping.hpp"
#include "iscs/importance.hpp"
#include "iscs/scheduler.hpp"
#include "iscs/synthetic.hpp"
#include "iscs/toy_codec.hpp"

using namespace iscs;

namespace {

// Encoder-projection sized kernels: 320 x 192 x 5 x 5.
ConvKernelSet projection_kernels() {
    Rng rng(1);
    ConvKernelSet k;
    k.out_channels = 320;
    k.in_channels = 192;
    k.kernel_size = 5;
    k.weights.resize(320 * 192 * 25);
    for (double& w : k.weights) w = rng.normal() * 0.05;
    k.bias = std::vector<double>(320);
    for (double& b : *k.bias) b = rng.uniform(-0.1, 0.1);
    return k;
}

void BM_VarianceScores(benchmark::State& state) {
    const auto k = projection_kernels();
    for (auto _ : state) benchmark::DoNotOptimize(variance_scores(k));
}
BENCHMARK(BM_VarianceScores)->Unit(benchmark::kMillisecond);

void BM_SimilarityMatrix(benchmark::State& state) {
    const auto k = projection_kernels();
    for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity_matrix(k));
}
BENCHMARK(BM_SimilarityMatrix)->Unit(benchmark::kMillisecond);

void BM_DiscoverFromScores(benchmark::State& state) {
    const auto scores = compute_scores(projection_kernels());
    DiscoveryParams p;
    for (auto _ : state) benchmark::DoNotOptimize(discover(scores, p));
}
BENCHMARK(BM_DiscoverFromScores)->Unit(benchmark::kMicrosecond);

void BM_BuildPlan(benchmark::State& state) {
    const auto scores = compute_scores(projection_kernels());
    const auto s = discover(scores, DiscoveryParams{});
    const auto strategy = static_cast<OrderingStrategy>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_plan(s, scores.similarity, 8, strategy));
    state.SetLabel(to_string(strategy));
}
BENCHMARK(BM_BuildPlan)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

struct CodecFixture {
    ToyCodecModel model;
    Image image;
    LatentBlock latents;
    CodecFixture() {
        Rng rng(2);
        std::vector<Image> train;
        for (int i = 0; i < 4; ++i) train.push_back(generate_pink_noise_image(128, 128, rng));
        model = fit(train, FitOptions{});
        image = generate_pink_noise_image(256, 256, rng);
        latents = encode_latents(model, image);
    }
};

const CodecFixture& codec() {
    static const CodecFixture f;
    return f;
}

void BM_EntropyEncode(benchmark::State& state) {
    const auto& f = codec();
    std::size_t bytes = 0;
    for (auto _ : state) {
        const auto s = entropy_encode(f.latents, f.model, 256, 256);
        bytes = s.size();
        benchmark::DoNotOptimize(s.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.latents.symbols.size()));
    state.counters["stream_bytes"] = static_cast<double>(bytes);
}
BENCHMARK(BM_EntropyEncode)->Unit(benchmark::kMillisecond);

void BM_EntropyDecode(benchmark::State& state) {
    const auto& f = codec();
    const auto stream = entropy_encode(f.latents, f.model, 256, 256);
    for (auto _ : state) benchmark::DoNotOptimize(entropy_decode(stream, f.model));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.latents.symbols.size()));
}
BENCHMARK(BM_EntropyDecode)->Unit(benchmark::kMillisecond);

void BM_SimulateGrouped(benchmark::State& state) {
    const CostModel cost;
    const auto plan = build_index_plan(320, 64, static_cast<std::size_t>(state.range(0)));
    const auto dag = build_grouped_dag(plan, cost);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(dag, cost, 5));
}
BENCHMARK(BM_SimulateGrouped)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

} // namespace
BENCHMARK_MAIN();
