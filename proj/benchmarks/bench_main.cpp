#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "fishdet/config.hpp"
#include "fishdet/detection.hpp"
#include "fishdet/layers.hpp"
#include "fishdet/metrics.hpp"
#include "fishdet/network.hpp"
#include "fishdet/pca.hpp"
#include "fishdet/weights.hpp"

using namespace fishdet;

namespace {

Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w) {
    std::uniform_real_distribution<float> d(0.f, 1.f);
    Tensor t(c, h, w);
    for (auto& v : t.data()) v = d(rng);
    return t;
}

ConvParams random_params(std::mt19937_64& rng, int filters, int in_channels, int size) {
    std::normal_distribution<float> d(0.f, 0.1f);
    ConvParams p;
    p.filters = filters;
    p.in_channels = in_channels;
    p.size = size;
    p.biases.resize(filters);
    p.weights.resize(static_cast<std::size_t>(filters) * in_channels * size * size);
    for (auto& v : p.weights) v = d(rng);
    return p;
}

void BM_Conv3x3(benchmark::State& state) {
    const int channels = static_cast<int>(state.range(0));
    const int side = static_cast<int>(state.range(1));
    std::mt19937_64 rng(1);
    const auto input = random_tensor(rng, channels, side, side);
    ConvolutionalDef def;
    def.filters = channels;
    def.size = 3;
    def.pad = true;
    def.activation = Activation::Leaky;
    const auto params = random_params(rng, channels, channels, 3);
    for (auto _ : state) benchmark::DoNotOptimize(conv_forward(input, def, params));
    state.SetItemsProcessed(state.iterations() * 2LL * channels * channels * 9 * side * side);
}
BENCHMARK(BM_Conv3x3)->Args({32, 52})->Args({128, 26})->Args({512, 13})->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state, const char* cfg) {
    const auto def = load_network_config(std::string(FISHDET_DATA_DIR) + "/" + cfg);
    const auto net = make_random_network(def, 1);
    std::mt19937_64 rng(2);
    const auto input = random_tensor(rng, def.net.channels, def.net.height, def.net.width);
    for (auto _ : state) benchmark::DoNotOptimize(forward(net, input));
}
BENCHMARK_CAPTURE(BM_Forward, tiny, "tiny-fixture.cfg")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Forward, yolov3_416, "yolov3-fish.cfg")->Unit(benchmark::kMillisecond)->Iterations(1);

std::vector<Detection> random_detections(std::size_t n) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(0, 416), size(8, 80);
    std::uniform_real_distribution<float> score(0.25f, 1.f);
    std::vector<Detection> out(n);
    for (auto& d : out) {
        d.box = {pos(rng), pos(rng), size(rng), size(rng)};
        d.score = score(rng);
        d.objectness = d.score;
        d.class_probs = {1.f};
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    return out;
}

void BM_Nms(benchmark::State& state) {
    const auto dets = random_detections(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nms(dets, kDefaultNmsThreshold));
}
BENCHMARK(BM_Nms)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_MatchAndAp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto dets = random_detections(n);
    std::vector<ScoredBox> scored;
    std::vector<GroundTruthBox> truths;
    for (std::size_t i = 0; i < n; ++i) {
        scored.push_back({0, dets[i].score, dets[i].box});
        if (i % 2 == 0) truths.push_back({0, dets[i].box});
    }
    for (auto _ : state) {
        const auto m = match_detections(scored, truths, 0.5);
        std::vector<FlaggedDetection> flagged(n);
        for (std::size_t i = 0; i < n; ++i) flagged[i] = {scored[i].score, m.true_positive[i]};
        benchmark::DoNotOptimize(average_precision(flagged, truths.size()));
    }
}
BENCHMARK(BM_MatchAndAp)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_Pca(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const int maps = static_cast<int>(state.range(0));
    const int side = static_cast<int>(state.range(1));
    const auto data = unpack(feature_maps_from(random_tensor(rng, maps, side, side), 0));
    for (auto _ : state) benchmark::DoNotOptimize(pca(data));
}
BENCHMARK(BM_Pca)->Args({32, 13})->Args({256, 26})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
