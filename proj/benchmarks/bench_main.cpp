#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "vaxrag/embedding.hpp"
#include "vaxrag/retrieval.hpp"
#include "vaxrag/vector_index.hpp"

using namespace vaxrag;

namespace {

const std::vector<std::string> kWords{"shingrix", "dose", "arm", "sore", "fever", "chills", "cost", "clinic",
                                      "nurse", "rash", "tired", "second", "first", "price", "worry", "pain"};

std::string random_text(std::mt19937_64& rng, std::size_t sentences) {
    std::string s;
    for (std::size_t i = 0; i < sentences; ++i) {
        for (int w = 0; w < 6; ++w) s += kWords[rng() % kWords.size()] + " ";
        s += ". ";
    }
    return s;
}

VectorIndex make_index(const HashedEmbedder& e, std::size_t n) {
    std::mt19937_64 rng(7);
    VectorIndex idx(e.dim());
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = random_text(rng, 1 + rng() % 3);
        idx.upsert("c" + std::to_string(i), e.embed_one(t), t);
    }
    return idx;
}

void BM_Embed(benchmark::State& state) {
    const HashedEmbedder e(1536);
    std::mt19937_64 rng(1);
    const auto text = random_text(rng, 3);
    for (auto _ : state) benchmark::DoNotOptimize(e.embed_one(text));
}
BENCHMARK(BM_Embed);

void BM_SearchTopPercent(benchmark::State& state) {
    const HashedEmbedder e(1536);
    const auto idx = make_index(e, static_cast<std::size_t>(state.range(0)));
    const auto q = e.embed_one("sore arm after the second dose");
    for (auto _ : state) benchmark::DoNotOptimize(idx.search_top_percent(q, 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchTopPercent)->Arg(1000)->Arg(10000);

void BM_Pipeline(benchmark::State& state) {
    const HashedEmbedder e(1536);
    const LexicalOverlapReranker r;
    const EmbeddingCompressor c(e);
    const auto idx = make_index(e, static_cast<std::size_t>(state.range(0)));
    RetrievalConfig cfg;
    cfg.compression_threshold = 0.3;
    PipelineOptions opts;
    opts.record_timings = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline("sore arm second dose", idx, {e, r, r, c}, cfg, opts));
}
BENCHMARK(BM_Pipeline)->Arg(1000)->Arg(5000);

} // namespace

BENCHMARK_MAIN();
