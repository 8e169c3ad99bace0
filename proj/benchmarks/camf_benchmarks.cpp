// Microbenchmarks for the hot offline paths. No network is touched.

#include <benchmark/benchmark.h>

#include <random>

#include "camf/agents.hpp"
#include "camf/datasets.hpp"
#include "camf/eval.hpp"
#include "camf/gateway.hpp"
#include "camf/pipeline.hpp"

namespace {

using namespace camf;

std::string filler(std::size_t n) {
  std::string s;
  s.reserve(n);
  while (s.size() < n) s += "the quick brown fox jumps over the lazy dog. ";
  s.resize(n);
  return s;
}

void BM_CacheKey(benchmark::State& state) {
  const ChatRequest request{"bench-model",
                            {{Role::System, agent_tag(AgentId::LS) + "\nAnalyze the style."},
                             {Role::User, filler(static_cast<std::size_t>(state.range(0)))}},
                            SamplingParams{}};
  for (auto _ : state) benchmark::DoNotOptimize(cache_key(request));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CacheKey)->Arg(1 << 10)->Arg(1 << 14);

void BM_ParseVerdict(benchmark::State& state) {
  const auto reply = filler(static_cast<std::size_t>(state.range(0))) +
                     "\nVERDICT: MACHINE\nCONFIDENCE: 0.83\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_verdict(reply));
}
BENCHMARK(BM_ParseVerdict)->Arg(256)->Arg(8192);

void BM_RenderPrompt(benchmark::State& state) {
  const auto spec = TemplateSet::defaults().spec(AgentId::LS, SamplingParams{});
  PromptContext ctx;
  ctx.text = filler(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_prompt(spec, ctx));
}
BENCHMARK(BM_RenderPrompt)->Arg(1 << 10)->Arg(1 << 14);

void BM_MacroF1(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<AuthorshipLabel> pred(static_cast<std::size_t>(state.range(0)));
  std::vector<AuthorshipLabel> gold(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = rng() & 1 ? AuthorshipLabel::Machine : AuthorshipLabel::Human;
    gold[i] = rng() & 1 ? AuthorshipLabel::Machine : AuthorshipLabel::Human;
  }
  for (auto _ : state) benchmark::DoNotOptimize(macro_f1(confusion(pred, gold)));
}
BENCHMARK(BM_MacroF1)->Arg(1000)->Arg(100000);

void BM_DetectCounting(benchmark::State& state) {
  const auto corpus = make_toy_corpus();
  PipelineConfig cfg;
  cfg.rounds = static_cast<int>(state.range(0));
  cfg.concurrent_profiling = false;
  CountingBackend backend;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect(corpus.samples[i++ % corpus.samples.size()], cfg, backend));
  }
}
BENCHMARK(BM_DetectCounting)->Arg(2)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
