#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vaxrag/embedding.hpp"
#include "vaxrag/parallel.hpp"
#include "vaxrag/vector_index.hpp"

namespace vaxrag {

struct RetrievalConfig {
    /// First-iteration breadth, percent of the index.
    double k_percent = 5.0;
    /// Rerank is skipped for fewer docs than this.
    std::size_t rerank_min_docs = 10;
    /// Sets up to this size go to the small-set scorer, larger ones to the large-set scorer.
    std::size_t rerank_routing_cutoff = 100;
    /// Minimum sentence/query similarity kept by compression.
    double compression_threshold = 0.80;
    /// Share of the iteration-1 ranking carried into iteration 2.
    double second_pass_fraction = 0.50;

    /// Throws ConfigError on an out-of-range field.
    void validate() const;
};

enum class Stage { retrieved, reordered, reranked, compressed };
std::string_view to_string(Stage s);

struct RankedDoc {
    std::string comment_id;
    std::string text;
    double retrieval_score = 0.0;
    std::optional<double> rerank_score;
    Stage stage = Stage::retrieved;
    /// True once the text went through contextual compression.
    bool compressed = false;

    /// rerank_score when present, else retrieval_score.
    double score() const { return rerank_score.value_or(retrieval_score); }
};

struct StageTrace {
    int iteration = 1;
    std::string stage;
    std::size_t input_count = 0;
    std::size_t output_count = 0;
    std::int64_t micros = 0;
    bool early_exit = false;
    /// "small" or "large" when a reranker was invoked.
    std::string scorer;
    bool degraded = false;
    std::vector<std::string> flagged_ids;
    std::string note;
};

struct RetrievalTrace {
    std::size_t index_size = 0;
    std::size_t requested_hits = 0;
    RetrievalConfig config;
    std::vector<StageTrace> stages;
};

struct RetrievalResult {
    std::string query;
    std::vector<RankedDoc> iteration1;
    std::vector<RankedDoc> iteration2;
    RetrievalTrace trace;
};

class Reranker {
public:
    virtual ~Reranker() = default;
    /// One relevance score per passage. Throws ProviderError.
    virtual std::vector<double> score(std::string_view query, std::span<const std::string> passages) const = 0;
    virtual std::string name() const = 0;
};

/// Scores a passage by the number of distinct query content tokens it contains.
class LexicalOverlapReranker final : public Reranker {
public:
    explicit LexicalOverlapReranker(std::string label = "lexical-overlap") : label_(std::move(label)) {}
    std::vector<double> score(std::string_view query, std::span<const std::string> passages) const override;
    std::string name() const override { return label_; }

    std::size_t calls() const { return calls_.load(); }

private:
    std::string label_;
    mutable std::atomic<std::size_t> calls_{0};
};

class Compressor {
public:
    virtual ~Compressor() = default;
    /// The sentences of `passage` relevant to `query` at `threshold`, in
    /// passage order. Throws ProviderError.
    virtual std::vector<std::string> compress(std::string_view query, std::string_view passage,
                                              double threshold) const = 0;
    virtual std::string name() const = 0;
};

/// Keeps sentences whose embedding has cosine >= threshold with the query embedding.
class EmbeddingCompressor final : public Compressor {
public:
    explicit EmbeddingCompressor(const Embedder& embedder) : embedder_(embedder) {}
    std::vector<std::string> compress(std::string_view query, std::string_view passage,
                                      double threshold) const override;
    std::string name() const override { return "embedding-cosine"; }

private:
    const Embedder& embedder_;
};

/// Long-context reordering: reverse the best-first list, then walk it
/// prepending even positions and appending odd ones. The two best documents
/// end up at the two ends, the weakest in the middle.
std::vector<RankedDoc> reorder_long_context(std::vector<RankedDoc> docs);

struct RerankerPair {
    const Reranker& small_set;
    const Reranker& large_set;
};

/// Early exit below cfg.rerank_min_docs (no provider call). Otherwise scores
/// with the size-routed scorer and sorts by rerank score descending, ties by
/// comment id. A provider failure returns the input order, flagged degraded.
std::vector<RankedDoc> rerank(std::string_view query, std::vector<RankedDoc> docs, const RerankerPair& rerankers,
                              const RetrievalConfig& cfg, StageTrace* trace = nullptr,
                              const RetryPolicy& retry = {});

/// Replaces each doc's text by its sentences that clear `threshold`; docs
/// with no surviving sentence are dropped. A failing (or contract-violating)
/// compressor call passes that doc through uncompressed and flags it.
std::vector<RankedDoc> compress_context(std::string_view query, std::span<const RankedDoc> docs,
                                        const Compressor& compressor, double threshold,
                                        StageTrace* trace = nullptr, const FanOutOptions& fan_out = {});

/// Top ceil(fraction * n) docs by score(), ties by comment id, returned in
/// their original relative order.
std::vector<RankedDoc> select_top_fraction(std::span<const RankedDoc> docs, double fraction);

struct PipelineProviders {
    const Embedder& embedder;
    const Reranker& small_reranker;
    const Reranker& large_reranker;
    const Compressor& compressor;
};

struct PipelineOptions {
    FanOutOptions fan_out{};
    /// When false every StageTrace::micros is 0, which makes results byte-stable.
    bool record_timings = true;
    /// Optional post-search filter on comment ids (e.g. a vaccine filter).
    std::function<bool(const std::string&)> allow;
};

/// Iteration 1: search_top_percent -> reorder -> rerank.
/// Iteration 2: select_top_fraction -> compress -> reorder -> rerank.
/// An empty index or empty retrieval yields an empty result that still
/// carries one trace entry per stage.
RetrievalResult run_pipeline(std::string_view query, const VectorIndex& index, const PipelineProviders& providers,
                             const RetrievalConfig& cfg, const PipelineOptions& opts = {});

} // namespace vaxrag
