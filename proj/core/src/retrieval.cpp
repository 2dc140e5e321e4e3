#include "vaxrag/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <unordered_set>

#include "vaxrag/error.hpp"
#include "vaxrag/text.hpp"

namespace vaxrag {
namespace {

class StageTimer {
public:
    explicit StageTimer(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}

    std::int64_t micros() const {
        if (!enabled_) {
            return 0;
        }
        return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

bool ranks_before(const RankedDoc& a, const RankedDoc& b) {
    if (a.score() != b.score()) {
        return a.score() > b.score();
    }
    return a.comment_id < b.comment_id;
}

// True if `kept` is a subsequence of `source`.
bool is_sentence_subsequence(const std::vector<std::string>& kept, const std::vector<std::string>& source) {
    std::size_t j = 0;
    for (const auto& s : kept) {
        while (j < source.size() && source[j] != s) {
            ++j;
        }
        if (j == source.size()) {
            return false;
        }
        ++j;
    }
    return true;
}

} // namespace

void RetrievalConfig::validate() const {
    if (!(k_percent > 0.0 && k_percent <= 100.0)) {
        throw ConfigError("k_percent must be in (0, 100]");
    }
    if (!(compression_threshold > 0.0 && compression_threshold <= 1.0)) {
        throw ConfigError("compression_threshold must be in (0, 1]");
    }
    if (!(second_pass_fraction > 0.0 && second_pass_fraction <= 1.0)) {
        throw ConfigError("second_pass_fraction must be in (0, 1]");
    }
    if (rerank_min_docs < 1) {
        throw ConfigError("rerank_min_docs must be >= 1");
    }
}

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::retrieved: return "retrieved";
    case Stage::reordered: return "reordered";
    case Stage::reranked: return "reranked";
    case Stage::compressed: return "compressed";
    }
    return "retrieved";
}

std::vector<double> LexicalOverlapReranker::score(std::string_view query,
                                                  std::span<const std::string> passages) const {
    ++calls_;
    const auto qtoks = text::content_tokens(query);
    const std::set<std::string> qset(qtoks.begin(), qtoks.end());
    std::vector<double> out;
    out.reserve(passages.size());
    for (const auto& p : passages) {
        const auto ptoks = text::content_tokens(p);
        const std::unordered_set<std::string> pset(ptoks.begin(), ptoks.end());
        out.push_back(static_cast<double>(
            std::count_if(qset.begin(), qset.end(), [&](const std::string& t) { return pset.contains(t); })));
    }
    return out;
}

std::vector<std::string> EmbeddingCompressor::compress(std::string_view query, std::string_view passage,
                                                       double threshold) const {
    auto sentences = text::split_sentences(passage);
    if (sentences.empty()) {
        return {};
    }
    std::vector<std::string> inputs;
    inputs.reserve(sentences.size() + 1);
    inputs.emplace_back(query);
    inputs.insert(inputs.end(), sentences.begin(), sentences.end());
    const auto vecs = embed_batch(inputs, embedder_);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (cosine(vecs[i + 1], vecs[0]) >= threshold) {
            kept.push_back(std::move(sentences[i]));
        }
    }
    return kept;
}

std::vector<RankedDoc> reorder_long_context(std::vector<RankedDoc> docs) {
    std::reverse(docs.begin(), docs.end());
    std::deque<RankedDoc> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].stage = Stage::reordered;
        if (i % 2 == 1) {
            out.push_back(std::move(docs[i]));
        } else {
            out.push_front(std::move(docs[i]));
        }
    }
    return {std::make_move_iterator(out.begin()), std::make_move_iterator(out.end())};
}

std::vector<RankedDoc> rerank(std::string_view query, std::vector<RankedDoc> docs, const RerankerPair& rerankers,
                              const RetrievalConfig& cfg, StageTrace* trace, const RetryPolicy& retry) {
    StageTrace local;
    StageTrace& t = trace ? *trace : local;
    t.stage = "rerank";
    t.input_count = docs.size();
    t.output_count = docs.size();

    if (docs.size() < cfg.rerank_min_docs) {
        t.early_exit = true;
        return docs;
    }

    const bool small = docs.size() <= cfg.rerank_routing_cutoff;
    const Reranker& scorer = small ? rerankers.small_set : rerankers.large_set;
    t.scorer = small ? "small" : "large";

    std::vector<std::string> passages;
    passages.reserve(docs.size());
    for (const auto& d : docs) {
        passages.push_back(d.text);
    }
    std::vector<double> scores;
    try {
        scores = with_retry(retry, [&] { return scorer.score(query, passages); });
        if (scores.size() != docs.size()) {
            throw ProviderError("reranker returned " + std::to_string(scores.size()) + " scores for " +
                                    std::to_string(docs.size()) + " passages",
                                false);
        }
        if (!std::all_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); })) {
            throw ProviderError("reranker returned a non-finite score", false);
        }
    } catch (const ProviderError& e) {
        t.degraded = true;
        t.note = e.what();
        return docs;
    }

    for (std::size_t i = 0; i < docs.size(); ++i) {
        docs[i].rerank_score = scores[i];
        docs[i].stage = Stage::reranked;
    }
    std::stable_sort(docs.begin(), docs.end(), ranks_before);
    return docs;
}

std::vector<RankedDoc> compress_context(std::string_view query, std::span<const RankedDoc> docs,
                                        const Compressor& compressor, double threshold, StageTrace* trace,
                                        const FanOutOptions& fan_out) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("compression threshold must be in (0, 1]");
    }
    StageTrace local;
    StageTrace& t = trace ? *trace : local;
    t.stage = "compress";
    t.input_count = docs.size();

    struct Outcome {
        std::vector<std::string> kept;
        bool failed = false;
        std::string error;
    };
    const auto outcomes = parallel_map(docs.size(), fan_out.max_in_flight, [&](std::size_t i) {
        Outcome o;
        try {
            o.kept = with_retry(fan_out.retry, [&] { return compressor.compress(query, docs[i].text, threshold); });
            if (!is_sentence_subsequence(o.kept, text::split_sentences(docs[i].text))) {
                throw ProviderError("compressor returned text that is not a sentence subset of the passage", false);
            }
        } catch (const ProviderError& e) {
            o.failed = true;
            o.error = e.what();
        }
        return o;
    });

    std::vector<RankedDoc> out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        RankedDoc d = docs[i];
        if (outcomes[i].failed) {
            t.flagged_ids.push_back(d.comment_id);
            t.degraded = true;
            if (t.note.empty()) {
                t.note = outcomes[i].error;
            }
            out.push_back(std::move(d));
            continue;
        }
        if (outcomes[i].kept.empty()) {
            continue;
        }
        d.text = text::join(outcomes[i].kept, " ");
        d.stage = Stage::compressed;
        d.compressed = true;
        out.push_back(std::move(d));
    }
    t.output_count = out.size();
    return out;
}

std::vector<RankedDoc> select_top_fraction(std::span<const RankedDoc> docs, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("fraction must be in (0, 1]");
    }
    if (docs.empty()) {
        return {};
    }
    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(docs.size()) - 1e-9)), 1, docs.size());
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ranks_before(docs[a], docs[b]); });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<RankedDoc> out;
    out.reserve(keep);
    for (auto i : order) {
        out.push_back(docs[i]);
    }
    return out;
}

RetrievalResult run_pipeline(std::string_view query, const VectorIndex& index, const PipelineProviders& providers,
                             const RetrievalConfig& cfg, const PipelineOptions& opts) {
    cfg.validate();
    RetrievalResult result;
    result.query = std::string(query);
    result.trace.config = cfg;
    result.trace.index_size = index.size();
    auto& stages = result.trace.stages;
    const RerankerPair rerankers{providers.small_reranker, providers.large_reranker};

    if (text::trim(query).empty()) {
        throw std::invalid_argument("run_pipeline: empty query");
    }

    {
        StageTimer timer(opts.record_timings);
        StageTrace st;
        st.iteration = 1;
        st.stage = "retrieve";
        std::vector<SearchHit> hits;
        if (result.trace.index_size == 0) {
            st.note = "empty index";
        } else {
            const std::vector<std::string> q{std::string(query)};
            const auto qvec = with_retry(opts.fan_out.retry, [&] { return embed_batch(q, providers.embedder); });
            hits = index.search_top_percent(qvec.front(), cfg.k_percent);
        }
        result.trace.requested_hits = hits.size();
        st.input_count = result.trace.index_size;
        for (auto& h : hits) {
            if (opts.allow && !opts.allow(h.comment_id)) {
                continue;
            }
            auto chunk = index.get(h.comment_id);
            RankedDoc d;
            d.comment_id = std::move(h.comment_id);
            d.text = chunk ? chunk->text : std::string{};
            d.retrieval_score = h.score;
            result.iteration1.push_back(std::move(d));
        }
        st.output_count = result.iteration1.size();
        if (opts.allow && st.output_count < hits.size()) {
            st.note = "filtered " + std::to_string(hits.size() - st.output_count) + " hits";
        }
        st.micros = timer.micros();
        stages.push_back(std::move(st));
    }

    auto reorder_stage = [&](int iteration, std::vector<RankedDoc> docs) {
        StageTimer timer(opts.record_timings);
        StageTrace st;
        st.iteration = iteration;
        st.stage = "reorder";
        st.input_count = docs.size();
        docs = reorder_long_context(std::move(docs));
        st.output_count = docs.size();
        st.micros = timer.micros();
        stages.push_back(std::move(st));
        return docs;
    };
    auto rerank_stage = [&](int iteration, std::vector<RankedDoc> docs) {
        StageTimer timer(opts.record_timings);
        StageTrace st;
        st.iteration = iteration;
        docs = rerank(query, std::move(docs), rerankers, cfg, &st, opts.fan_out.retry);
        st.micros = timer.micros();
        stages.push_back(std::move(st));
        return docs;
    };

    result.iteration1 = rerank_stage(1, reorder_stage(1, std::move(result.iteration1)));

    std::vector<RankedDoc> second;
    {
        StageTimer timer(opts.record_timings);
        StageTrace st;
        st.iteration = 2;
        st.stage = "select";
        st.input_count = result.iteration1.size();
        second = select_top_fraction(result.iteration1, cfg.second_pass_fraction);
        st.output_count = second.size();
        st.micros = timer.micros();
        stages.push_back(std::move(st));
    }
    {
        StageTimer timer(opts.record_timings);
        StageTrace st;
        st.iteration = 2;
        second = compress_context(query, second, providers.compressor, cfg.compression_threshold, &st, opts.fan_out);
        st.micros = timer.micros();
        stages.push_back(std::move(st));
    }
    result.iteration2 = rerank_stage(2, reorder_stage(2, std::move(second)));
    return result;
}

} // namespace vaxrag
