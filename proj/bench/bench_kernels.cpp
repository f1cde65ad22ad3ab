#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cvqa/dataset.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/pipeline.hpp"
#include "cvqa/serial_reference.hpp"

namespace {

std::vector<cvqa::Detection> random_detections(std::size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<cvqa::Detection> out;
    for (std::size_t i = 0; i < n; ++i) {
        double x1 = u(rng) * 0.8, y1 = u(rng) * 0.8;
        out.push_back({"obj", u(rng), {x1, y1, x1 + 0.05 + u(rng) * 0.15, y1 + 0.05 + u(rng) * 0.15}});
    }
    return out;
}

void BM_AttentionParallel(benchmark::State& state) {
    const auto dets = random_detections(64);
    const int side = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cvqa::attention_from_detections(dets, side, side));
}

void BM_AttentionSerial(benchmark::State& state) {
    const auto dets = random_detections(64);
    const int side = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(cvqa::serial::attention_from_detections(dets, side, side));
}

struct Suite {
    cvqa::Pipeline pipeline;
    std::vector<cvqa::EvalItem> items;
};

const Suite& suite() {
    static const Suite s = [] {
        cvqa::PipelineConfig config;
        config.kb_path = CVQA_DATA_DIR "/starter_kb.jsonl";
        config.detections_path = CVQA_DATA_DIR "/fixtures/detections.jsonl";
        cvqa::Pipeline pipeline(config);
        auto manifest = cvqa::dataset::load_manifest_file(CVQA_DATA_DIR "/manifests/sample.jsonl");
        return Suite{std::move(pipeline), cvqa::eval_items(manifest.records)};
    }();
    return s;
}

void BM_ScoringParallel(benchmark::State& state) {
    const auto& s = suite();
    for (auto _ : state)
        benchmark::DoNotOptimize(cvqa::run_ablation(s.pipeline, s.items, cvqa::evalkit::AblationConfig::full));
}

void BM_ScoringSerial(benchmark::State& state) {
    const auto& s = suite();
    for (auto _ : state)
        benchmark::DoNotOptimize(cvqa::serial::run_ablation(s.pipeline, s.items, cvqa::evalkit::AblationConfig::full));
}

}  // namespace

BENCHMARK(BM_AttentionParallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_AttentionSerial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_ScoringParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoringSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
