#include <doctest.h>

#include <algorithm>
#include <deque>
#include <random>
#include <set>

#include "helpers.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/retrieval.hpp"
#include "vaxrag/text.hpp"

using namespace vaxrag;
using namespace vaxrag::testing;

namespace {

std::vector<RankedDoc> ranked(std::size_t n) {
    std::vector<RankedDoc> out;
    for (std::size_t i = 1; i <= n; ++i) {
        out.push_back(doc("d" + std::to_string(i), {}, 1.0 - 0.01 * static_cast<double>(i)));
    }
    return out;
}

// Hand-trace of the rule: reverse, then prepend even positions and append odd ones.
std::vector<std::string> reorder_oracle(std::vector<std::string> ids) {
    std::reverse(ids.begin(), ids.end());
    std::deque<std::string> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i % 2 == 0) {
            out.push_front(ids[i]);
        } else {
            out.push_back(ids[i]);
        }
    }
    return {out.begin(), out.end()};
}

std::vector<std::string> names(std::initializer_list<int> ns) {
    std::vector<std::string> out;
    for (int n : ns) out.push_back("d" + std::to_string(n));
    return out;
}

} // namespace

TEST_SUITE("retrieval") {

TEST_CASE("reorder examples") {
    CHECK(reorder_long_context({}).empty());
    CHECK(ids_of(reorder_long_context(ranked(1))) == names({1}));
    CHECK(ids_of(reorder_long_context(ranked(5))) == names({1, 3, 5, 4, 2}));
    CHECK(ids_of(reorder_long_context(ranked(4))) == names({2, 4, 3, 1}));
}

TEST_CASE("reorder matches the hand-traced rule for n = 1..20") {
    for (std::size_t n = 1; n <= 20; ++n) {
        const auto docs = ranked(n);
        const auto got = reorder_long_context(docs);
        CHECK(ids_of(got) == reorder_oracle(ids_of(docs)));
        // Permutation, stage tag, and the two best at the two ends.
        auto a = ids_of(got), b = ids_of(docs);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(std::all_of(got.begin(), got.end(), [](const RankedDoc& d) { return d.stage == Stage::reordered; }));
        if (n >= 2) {
            const std::set<std::string> ends{got.front().comment_id, got.back().comment_id};
            CHECK(ends == std::set<std::string>{"d1", "d2"});
        }
    }
}

TEST_CASE("rerank early exit below the bound") {
    ScriptedReranker small([](const std::string&) { return 1.0; });
    ScriptedReranker large([](const std::string&) { return 1.0; });
    const RetrievalConfig cfg;
    StageTrace t;
    const auto nine = ranked(9);
    const auto out = rerank("q", nine, {small, large}, cfg, &t);
    CHECK(ids_of(out) == ids_of(nine));
    CHECK(small.calls == 0);
    CHECK(large.calls == 0);
    CHECK(t.early_exit);

    StageTrace t10;
    rerank("q", ranked(10), {small, large}, cfg, &t10);
    CHECK(small.calls == 1);
    CHECK_FALSE(t10.early_exit);
    CHECK(t10.scorer == "small");
}

TEST_CASE("rerank orders by lexical overlap") {
    // Three docs are below the default early-exit bound, so the bound is lowered here.
    RetrievalConfig cfg;
    cfg.rerank_min_docs = 1;
    const LexicalOverlapReranker stub;
    const std::vector<RankedDoc> in{doc("a", "my second dose was rough"), doc("b", "lovely weather today"),
                                    doc("c", "shingrix is pricey")};
    const std::vector<std::string> passages{in[0].text, in[1].text, in[2].text};
    CHECK(stub.score("second dose shingrix", passages) == std::vector<double>{2, 0, 1});
    const auto out = rerank("second dose shingrix", in, {stub, stub}, cfg);
    CHECK(ids_of(out) == std::vector<std::string>{"a", "c", "b"});
    CHECK(out[0].rerank_score == 2.0);
    CHECK(out[0].stage == Stage::reranked);
}

TEST_CASE("rerank routes large sets to the large scorer") {
    ScriptedReranker small([](const std::string&) { return 0.0; }, "small");
    ScriptedReranker large([](const std::string&) { return 0.0; }, "large");
    const RetrievalConfig cfg;
    StageTrace t;
    rerank("q", ranked(150), {small, large}, cfg, &t);
    CHECK(t.scorer == "large");
    CHECK(large.calls == 1);
    CHECK(small.calls == 0);
    StageTrace t100;
    rerank("q", ranked(100), {small, large}, cfg, &t100);
    CHECK(t100.scorer == "small");
}

TEST_CASE("rerank degrades to input order on provider failure") {
    ScriptedReranker broken([](const std::string&) { return 0.0; });
    broken.fail = true;
    broken.retryable = true;
    StageTrace t;
    const auto in = ranked(12);
    const auto out = rerank("q", in, {broken, broken}, RetrievalConfig{}, &t, no_backoff(3));
    CHECK(ids_of(out) == ids_of(in));
    CHECK(t.degraded);
    CHECK(broken.calls == 3);
    CHECK_FALSE(t.note.empty());
}

TEST_CASE("compression examples") {
    ScriptedCompressor c;
    SUBCASE("all sentences pass") {
        const std::vector<RankedDoc> in{doc("a", "One. Two.")};
        const auto out = compress_context("q", in, c, 0.8);
        REQUIRE(out.size() == 1);
        CHECK(out[0].text == "One. Two.");
        CHECK(out[0].stage == Stage::compressed);
    }
    SUBCASE("scores 0.9 and 0.3") {
        c.sentence_scores = {{"Keep me.", 0.9}, {"Drop me.", 0.3}};
        const std::vector<RankedDoc> in{doc("a", "Keep me. Drop me.")};
        const auto out = compress_context("q", in, c, 0.8);
        REQUIRE(out.size() == 1);
        CHECK(out[0].text == "Keep me.");
        CHECK(out[0].compressed);
    }
    SUBCASE("nothing passes") {
        c.sentence_scores = {{"Low.", 0.1}};
        const std::vector<RankedDoc> in{doc("a", "Low."), doc("b", "High.")};
        const auto out = compress_context("q", in, c, 0.8);
        CHECK(ids_of(out) == std::vector<std::string>{"b"});
    }
    SUBCASE("provider failure passes the doc through flagged") {
        c.failing_passages = {"Broken."};
        const std::vector<RankedDoc> in{doc("a", "Broken."), doc("b", "Fine.")};
        StageTrace t;
        const auto out = compress_context("q", in, c, 0.8, &t, FanOutOptions{2, no_backoff(1)});
        REQUIRE(out.size() == 2);
        CHECK(out[0].text == "Broken.");
        CHECK_FALSE(out[0].compressed);
        CHECK(t.flagged_ids == std::vector<std::string>{"a"});
        CHECK(t.degraded);
    }
}

TEST_CASE("embedding compressor keeps exactly the matching sentence") {
    const HashedEmbedder e(1536);
    const EmbeddingCompressor c(e);
    const auto kept = c.compress("sore arm two days", "My arm was sore for two days. The pharmacy wait was short.", 0.8);
    CHECK(kept == std::vector<std::string>{"My arm was sore for two days."});
}

TEST_CASE("raising the threshold never keeps more") {
    const HashedEmbedder e(256);
    const EmbeddingCompressor c(e);
    const std::vector<std::string> words{"arm", "sore", "dose", "two", "shingrix", "fever", "cost", "clinic"};
    std::mt19937_64 rng(17);
    for (int round = 0; round < 100; ++round) {
        std::string passage;
        for (int s = 0; s < 4; ++s) {
            for (int w = 0; w < 3; ++w) passage += words[rng() % words.size()] + " ";
            passage += ". ";
        }
        const std::string query = words[rng() % words.size()] + " " + words[rng() % words.size()];
        const std::vector<RankedDoc> in{doc("x", passage)};
        std::size_t prev = SIZE_MAX;
        for (double th = 0.05; th <= 1.0; th += 0.05) {
            const auto out = compress_context(query, in, c, th);
            const auto n = out.empty() ? 0 : text::split_sentences(out[0].text).size();
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("select_top_fraction examples") {
    CHECK(select_top_fraction(ranked(8), 0.5).size() == 4);
    CHECK(ids_of(select_top_fraction(ranked(5), 0.5)) == names({1, 2, 3}));
    CHECK(select_top_fraction(ranked(1), 0.01).size() == 1);
    CHECK(select_top_fraction({}, 0.5).empty());
    CHECK_THROWS_AS(select_top_fraction(ranked(3), 0.0), std::invalid_argument);
}

TEST_CASE("select_top_fraction keeps the input order of the chosen docs") {
    auto docs = reorder_long_context(ranked(6)); // d2 d4 d6 d5 d3 d1
    const auto top = select_top_fraction(docs, 0.5);
    CHECK(ids_of(top) == names({2, 3, 1}));
}

TEST_CASE("config validation") {
    RetrievalConfig c;
    CHECK_NOTHROW(c.validate());
    c.k_percent = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.compression_threshold = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.second_pass_fraction = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("pipeline on an empty index yields an empty result with a full trace") {
    const HashedEmbedder e(32);
    const LexicalOverlapReranker r;
    const EmbeddingCompressor c(e);
    const VectorIndex idx(32);
    const auto res = run_pipeline("anything", idx, {e, r, r, c}, RetrievalConfig{});
    CHECK(res.iteration1.empty());
    CHECK(res.iteration2.empty());
    CHECK(res.trace.stages.size() == 7);
    CHECK(res.trace.stages.front().note == "empty index");
}

TEST_CASE("pipeline stages, cap and trace") {
    const HashedEmbedder e(128);
    const LexicalOverlapReranker r;
    ScriptedCompressor c; // keeps everything
    VectorIndex idx(128);
    for (int i = 0; i < 40; ++i) {
        const auto t = "shingrix dose " + std::to_string(i) + ". arm sore.";
        idx.upsert("c" + std::to_string(100 + i), e.embed_one(t), t);
    }
    RetrievalConfig cfg;
    cfg.k_percent = 100;
    PipelineOptions opts;
    opts.record_timings = false;
    const auto res = run_pipeline("shingrix dose", idx, {e, r, r, c}, cfg, opts);
    CHECK(res.iteration1.size() == 40);
    CHECK(res.iteration2.size() <= 20);
    std::vector<std::string> stages;
    for (const auto& s : res.trace.stages) {
        stages.push_back(std::to_string(s.iteration) + ":" + s.stage);
        CHECK(s.micros == 0);
    }
    CHECK(stages == std::vector<std::string>{"1:retrieve", "1:reorder", "1:rerank", "2:select", "2:compress",
                                             "2:reorder", "2:rerank"});
    CHECK(res.trace.requested_hits == 40);
    CHECK(r.calls() == 2);
}

TEST_CASE("pipeline respects the allow filter") {
    const HashedEmbedder e(64);
    const LexicalOverlapReranker r;
    ScriptedCompressor c;
    VectorIndex idx(64);
    for (int i = 0; i < 20; ++i) idx.upsert("c" + std::to_string(i), e.embed_one("dose " + std::to_string(i)), "dose");
    PipelineOptions opts;
    opts.allow = [](const std::string& id) { return id.size() == 2; }; // c0..c9
    RetrievalConfig cfg;
    cfg.k_percent = 100;
    const auto res = run_pipeline("dose", idx, {e, r, r, c}, cfg, opts);
    CHECK(res.iteration1.size() == 10);
    for (const auto& d : res.iteration1) CHECK(d.comment_id.size() == 2);
}

}
