// Serial reference kernels against their OpenMP counterparts on a generated corpus.
#include <benchmark/benchmark.h>

#include "stormscope/kernels.hpp"
#include "stormscope/synth.hpp"

using namespace stormscope;

namespace {

struct Fixture {
  Corpus corpus;
  LexiconSet lexicons;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    auto cfg = load_synth_config(STORMSCOPE_REPO_DATA "/configs/classify_separable.cfg");
    x.corpus = generate(cfg).corpora.at(0);
    x.lexicons = LexiconSet::load_directory(STORMSCOPE_REPO_DATA "/lexicons");
    return x;
  }();
  return f;
}

void BM_features_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::extract_features(f.corpus, f.lexicons));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

void BM_features_omp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::extract_features(f.corpus, f.lexicons));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

void BM_toxic_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::toxic_flags(f.corpus, f.lexicons));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

void BM_toxic_omp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::toxic_flags(f.corpus, f.lexicons));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

void BM_tally_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::emoji_hashtag_tally(f.corpus));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

void BM_tally_omp(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::emoji_hashtag_tally(f.corpus));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * f.corpus.size()));
}

} // namespace

BENCHMARK(BM_features_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_features_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_toxic_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_toxic_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tally_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tally_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
