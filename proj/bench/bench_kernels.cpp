#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "autoform/kb/bm25.hpp"
#include "autoform/metrics/report.hpp"

namespace {

using namespace autoform;

std::vector<std::string> vocabulary(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

kb::Bm25Index synthetic_index(std::size_t docs) {
  std::mt19937_64 rng(7);
  auto vocab = vocabulary(2000);
  std::geometric_distribution<std::size_t> word(0.01);
  std::uniform_int_distribution<std::size_t> len(20, 120);
  std::vector<std::pair<std::int64_t, std::vector<std::string>>> corpus;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::string> tokens;
    for (std::size_t k = len(rng); k > 0; --k) tokens.push_back(vocab[std::min(word(rng), vocab.size() - 1)]);
    corpus.emplace_back(static_cast<std::int64_t>(d), std::move(tokens));
  }
  return kb::build_index_from_tokens(corpus);
}

std::vector<std::string> synthetic_query() {
  auto vocab = vocabulary(2000);
  return {vocab[0], vocab[3], vocab[17], vocab[42], vocab[150], vocab[900]};
}

void BM_Bm25Serial(benchmark::State& state) {
  auto index = synthetic_index(static_cast<std::size_t>(state.range(0)));
  auto q = synthetic_query();
  for (auto _ : state) benchmark::DoNotOptimize(kb::score_all_serial(index, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Bm25Parallel(benchmark::State& state) {
  auto index = synthetic_index(static_cast<std::size_t>(state.range(0)));
  auto q = synthetic_query();
  for (auto _ : state) benchmark::DoNotOptimize(kb::score_all_parallel(index, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct Corpus {
  std::vector<std::string> candidates;
  std::vector<std::string> references;
};

Corpus synthetic_corpus(std::size_t n) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces{"lemma", "fixes", "x", "::", "real", "shows", "\"", "\\<le>", "y", "+",
                                        "assumes", "n", "nat", "=", "(", ")", "0", "1", "\\<forall>", "."};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(15, 60), coin(0, 9);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    std::string ref, cand;
    for (std::size_t k = len(rng); k > 0; --k) {
      auto p = pieces[pick(rng)];
      ref += p + " ";
      cand += (coin(rng) == 0 ? pieces[pick(rng)] : p) + " ";
    }
    c.candidates.push_back(cand);
    c.references.push_back(ref);
  }
  return c;
}

void BM_CorpusSerial(benchmark::State& state) {
  auto c = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::score_corpus_serial(c.candidates, c.references));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CorpusParallel(benchmark::State& state) {
  auto c = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::score_corpus_parallel(c.candidates, c.references));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Bm25Serial)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Bm25Parallel)->Arg(1000)->Arg(20000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorpusSerial)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorpusParallel)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
