// Serial reference vs OpenMP kernels on synthetic data.
#include <benchmark/benchmark.h>

#include "scramble/ngram.h"
#include "scramble/parallel.h"
#include "scramble/synthetic.h"

using namespace scramble;

namespace {

struct Fixture {
  Treebank tb;
  std::vector<std::vector<std::string>> text;
  NGramModel lm;
  ParserModel parser;

  static ParserConfig small() {
    ParserConfig cfg;
    cfg.word_dim = 16;
    cfg.tag_dim = 8;
    cfg.char_dim = 8;
    cfg.char_hidden = 16;
    cfg.lstm_hidden = 32;
    cfg.mlp_hidden = 32;
    return cfg;
  }

  Fixture()
      : tb(gen_synthetic(uniform_grammar(), 400, 7)),
        text(synthetic_text(tb)),
        lm(NGramModel::train(text, 3)),
        parser(ParserModel::create(tb, small())) {}

  static SyntheticGrammar uniform_grammar() {
    SyntheticGrammar g = SyntheticGrammar::hindi_like();
    g.order_probs.fill(1.0 / 6.0);
    return g;
  }
};

const Fixture& data() {
  static const Fixture f;
  return f;
}

void BM_PerplexitySerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(perplexities_serial(data().lm, data().text));
}
void BM_PerplexityParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(perplexities(data().lm, data().text, s.range(0)));
}

void BM_PermuteSerial(benchmark::State& s) {
  AugmentOptions opt;
  for (auto _ : s) {
    benchmark::DoNotOptimize(
        permute_serial(data().tb, data().lm, DeprelMapping::universal(), opt, nullptr));
  }
}
void BM_PermuteParallel(benchmark::State& s) {
  AugmentOptions opt;
  for (auto _ : s) {
    benchmark::DoNotOptimize(permute_batch(data().tb, data().lm, DeprelMapping::universal(), opt,
                                           nullptr, s.range(0)));
  }
}

void BM_ParseSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(parse_serial(data().parser, data().tb));
}
void BM_ParseParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(parse_batch(data().parser, data().tb, s.range(0)));
}

}  // namespace

BENCHMARK(BM_PerplexitySerial)->UseRealTime();
BENCHMARK(BM_PerplexityParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_PermuteSerial)->UseRealTime();
BENCHMARK(BM_PermuteParallel)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_ParseSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ParseParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
