#include <benchmark/benchmark.h>

#include "csfbench/generators.hpp"
#include "csfbench/learners.hpp"
#include "csfbench/patterns.hpp"
#include "csfbench/smcsf.hpp"

using namespace csfbench;

namespace {

Dataset random_dataset(std::size_t n) {
    GenConfig config;
    config.n_windows = n;
    config.seed = 11;
    return generate_random(config);
}

} // namespace

static void BM_CountPatterns(benchmark::State& state) {
    const Dataset d = random_dataset(64);
    const PatternVocabulary vocab = enumerate_vocabulary({4, 5, 6, 7});
    std::size_t i = 0;
    for (auto _ : state) {
        auto fv = count_patterns(d.windows[i++ % d.size()].prices, vocab);
        benchmark::DoNotOptimize(fv.counts.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CountPatterns);

static void BM_GenerateCsf(benchmark::State& state) {
    const PatternVocabulary vocab = enumerate_vocabulary({4, 5, 6, 7});
    CsfRule rule = sample_csf_rule(vocab, 10, 1);
    GenConfig config;
    calibrate_threshold(rule, 0.8, 2000, 2, config.window_size, config.steps);
    config.n_windows = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        config.seed++;
        auto d = generate_csf(rule, config);
        benchmark::DoNotOptimize(d.windows.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateCsf)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_TrainSmCsf(benchmark::State& state) {
    const Dataset d = random_dataset(static_cast<std::size_t>(state.range(0)));
    const SmCsfConfig config;
    for (auto _ : state) {
        auto model = train_smcsf(d, config);
        benchmark::DoNotOptimize(model.weights.data());
    }
}
BENCHMARK(BM_TrainSmCsf)->Arg(2000)->Arg(14000)->Unit(benchmark::kMillisecond);

static void BM_MlpEpoch(benchmark::State& state) {
    const Dataset d = random_dataset(14000);
    const FeatureMatrix data = build_features(d.windows);
    MlpConfig config;
    config.epochs = 1;
    for (auto _ : state) {
        auto model = train_mlp(data, config);
        benchmark::DoNotOptimize(model.w2.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.rows()));
}
BENCHMARK(BM_MlpEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
