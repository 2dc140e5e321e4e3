#include <doctest.h>

#include <map>
#include <random>

#include "helpers.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/json.hpp"
#include "vaxrag/stub_chat.hpp"

using namespace vaxrag;
using namespace vaxrag::testing;

namespace {

/// Returns the same questions every time, as JSON.
class FixedQuestions final : public ChatProvider {
public:
    explicit FixedQuestions(std::vector<std::string> qs) : qs_(std::move(qs)) {}
    std::string complete(const ChatRequest&) const override { return nlohmann::json{{"questions", qs_}}.dump(); }
    std::string model_id() const override { return "fixed"; }

private:
    std::vector<std::string> qs_;
};

class BrokenJudge final : public RelevanceJudge {
public:
    bool relevant(std::string_view, std::string_view) const override { throw ProviderError("judge down", false); }
    bool attributable(std::string_view, std::span<const std::string>) const override {
        throw ProviderError("judge down", false);
    }
    std::vector<std::string> claims(std::string_view) const override { throw ProviderError("judge down", false); }
    std::string name() const override { return "broken"; }
};

std::vector<Comment> small_corpus(std::size_t n) {
    std::vector<Comment> out;
    const std::vector<std::string> sentences{"My arm was sore for two days.", "Shingrix clinic opens Monday.",
                                             "The second dose gave me chills.", "Cost is a barrier for pensioners.",
                                             "Fever lasted one night only."};
    for (std::size_t i = 0; i < n; ++i) {
        Comment c;
        c.id = "c" + std::to_string(i);
        c.text = sentences[i % sentences.size()] + " Shingrix number " + std::to_string(i) + ".";
        c.vaccine_tags = {"shingrix"};
        c.bucket = Bucket::vaccine;
        out.push_back(c);
    }
    return out;
}

} // namespace

TEST_SUITE("evalkit") {

TEST_CASE("rank weighted precision") {
    const std::vector<int> all{1, 1}, mixed{1, 0, 1}, none{0, 0};
    CHECK(rank_weighted_precision(all) == 1.0);
    CHECK(rank_weighted_precision(mixed) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
    CHECK(std::abs(rank_weighted_precision(mixed) - 0.8333333333) < 1e-9);
    CHECK(rank_weighted_precision(none) == 0.0);
    CHECK(rank_weighted_precision({}) == 0.0);
}

TEST_CASE("context precision through the substring judge") {
    const SubstringJudge judge;
    const std::vector<std::string> chunks{"Sore arm. Nothing else.", "Unrelated text.", "Then sore arm again."};
    const auto v = context_precision(chunks, "Sore arm.", judge);
    CHECK_FALSE(v.degenerate);
    CHECK(std::abs(v.value - 0.8333333333333334) < 1e-9);
    CHECK(context_precision({}, "x", judge).degenerate);
    CHECK(context_precision(chunks, "x", BrokenJudge{}).degenerate);
}

TEST_CASE("context recall") {
    const SubstringJudge judge;
    const std::string gt = "Arm was sore. Fever came. Chills too. Cost hurt.";
    const std::vector<std::string> all{"Arm was sore. Fever came.", "Chills too. Cost hurt."};
    const std::vector<std::string> three{"Arm was sore. Fever came.", "Chills too."};
    CHECK(context_recall(all, gt, judge).value == 1.0);
    CHECK(context_recall(three, gt, judge).value == 0.75);
    const auto empty = context_recall({}, gt, judge);
    CHECK(empty.value == 0.0);
    CHECK_FALSE(empty.degenerate);
    CHECK(context_recall(all, "   ", judge).degenerate);
}

TEST_CASE("faithfulness") {
    const SubstringJudge judge;
    const std::vector<std::string> ctx{"Arm was sore. Fever came. Chills too."};
    CHECK(faithfulness("Arm was sore. Fever came. Chills too.", ctx, judge).value == 1.0);
    CHECK(faithfulness("Arm was sore [comment:1]. Fever came. Chills too. Made up.", ctx, judge).value == 0.75);
    const auto none = faithfulness("", ctx, judge);
    CHECK(none.degenerate);
    CHECK(none.value == 0.0);
    CHECK(faithfulness("Arm was sore.", {}, judge).degenerate);
}

TEST_CASE("answer relevancy") {
    const HashedEmbedder e(512);
    const std::vector<double> cos{0.9, 0.7};
    CHECK(std::abs(mean_clamped(cos) - 0.8) < 1e-9);
    const std::vector<double> neg{-0.5, 0.5};
    CHECK(mean_clamped(neg) == 0.25);

    const FixedQuestions same({"sore arm shingrix", "sore arm shingrix", "sore arm shingrix"});
    CHECK(answer_relevancy("sore arm shingrix", "whatever", same, e).value == doctest::Approx(1.0));
    const FixedQuestions disjoint({"pizza", "pizza", "pizza"});
    const auto r = answer_relevancy("sore arm shingrix", "whatever", disjoint, e);
    CHECK(r.value >= 0.0);
    CHECK(r.value < 0.2);

    const ScriptedChat junk("not json");
    CHECK(answer_relevancy("q", "a", junk, e).degenerate);
}

TEST_CASE("apportion") {
    const std::vector<double> d{0.5, 0.25, 0.25};
    CHECK(apportion(100, d) == std::vector<std::size_t>{50, 25, 25});
    CHECK(apportion(4, d) == std::vector<std::size_t>{2, 1, 1});
    CHECK(apportion(5, d) == std::vector<std::size_t>{3, 1, 1});
    CHECK(apportion(0, d) == std::vector<std::size_t>{0, 0, 0});
    const std::vector<double> m{103.0 / 276, 72.0 / 276, 45.0 / 276, 56.0 / 276};
    CHECK(apportion(276, m) == std::vector<std::size_t>{103, 72, 45, 56});
    const std::vector<double> bad{0.5, 0.6};
    CHECK_THROWS_AS(apportion(10, bad), std::invalid_argument);
}

TEST_CASE("apportion always sums to n and stays within one of the quota") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> w(1 + rng() % 6);
        double total = 0;
        for (auto& x : w) total += (x = static_cast<double>(rng() % 100 + 1));
        for (auto& x : w) x /= total;
        const std::size_t n = rng() % 1000;
        const auto a = apportion(n, w);
        std::size_t sum = 0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            sum += a[k];
            CHECK(std::abs(static_cast<double>(a[k]) - w[k] * static_cast<double>(n)) < 1.0 + 1e-9);
        }
        CHECK(sum == n);
    }
}

TEST_CASE("test case generation mix") {
    const StubChatProvider stub;
    const auto corpus = small_corpus(30);
    TestGenOptions opts;
    const auto r = generate_testcases(corpus, opts, stub);
    REQUIRE(r.cases.size() == 100);
    std::map<Difficulty, int> by;
    for (const auto& c : r.cases) {
        ++by[c.difficulty];
        CHECK_FALSE(c.question.empty());
        CHECK_FALSE(c.ground_truth.empty());
        CHECK(c.source_ids.size() == (c.difficulty == Difficulty::multi_context ? 2u : 1u));
        CHECK(c.ground_truth_contexts.size() == c.source_ids.size());
    }
    CHECK(by[Difficulty::simple] == 50);
    CHECK(by[Difficulty::reasoning] == 25);
    CHECK(by[Difficulty::multi_context] == 25);

    opts.n_total = 4;
    const auto four = generate_testcases(corpus, opts, stub);
    std::map<Difficulty, int> by4;
    for (const auto& c : four.cases) ++by4[c.difficulty];
    CHECK(by4[Difficulty::simple] == 2);
    CHECK(by4[Difficulty::reasoning] == 1);
    CHECK(by4[Difficulty::multi_context] == 1);
}

TEST_CASE("test case generation is seeded") {
    const StubChatProvider stub;
    const auto corpus = small_corpus(20);
    TestGenOptions opts;
    opts.n_total = 30;
    const auto a = generate_testcases(corpus, opts, stub);
    const auto b = generate_testcases(corpus, opts, stub);
    CHECK(nlohmann::json(a.cases).dump() == nlohmann::json(b.cases).dump());
    opts.seed = 43;
    const auto c = generate_testcases(corpus, opts, stub);
    CHECK(nlohmann::json(a.cases).dump() != nlohmann::json(c.cases).dump());
}

TEST_CASE("generator failures are retried then skipped") {
    const ScriptedChat junk("no json here");
    TestGenOptions opts;
    opts.n_total = 3;
    opts.retry_budget = 2;
    const auto r = generate_testcases(small_corpus(5), opts, junk);
    CHECK(r.cases.empty());
    CHECK(r.skipped == 3);
    CHECK(junk.calls == 9);
}

TEST_CASE("testcase jsonl round trip") {
    TempDir dir("tc");
    const StubChatProvider stub;
    TestGenOptions opts;
    opts.n_total = 12;
    const auto r = generate_testcases(small_corpus(10), opts, stub);
    write_testcases_jsonl(dir / "tc.jsonl", r.cases);
    const auto back = read_testcases_jsonl(dir / "tc.jsonl");
    CHECK(nlohmann::json(back).dump() == nlohmann::json(r.cases).dump());
}

TEST_CASE("summaries skip degenerate values") {
    const std::vector<MetricValue> v{MetricValue::of(1.0), MetricValue::flagged("x"), MetricValue::of(0.5)};
    const auto s = summarize(v);
    CHECK(s.mean == 0.75);
    CHECK(s.max == 1.0);
    CHECK(s.scored == 2);
    CHECK(s.degenerate == 1);
    CHECK(s.fraction_at_ceiling == 0.5);
    const std::vector<MetricValue> none{MetricValue::flagged("x")};
    CHECK_FALSE(summarize(none).mean.has_value());
}

TEST_CASE("report tables have the expected rows") {
    EvalReport report;
    for (std::size_t i = 0; i < 4; ++i) report.modes[i].mode = kAllModes[i];
    const auto t = render_tables(report);
    for (const auto* row : {"First Iteration (average) |", "Second Iteration (average) |", "Highest Scores |",
                            "Answer the Question |", "Topics of Discussion |", "Summarise |", "Public Concerns |"}) {
        CHECK_MESSAGE(t.find(row) != std::string::npos, row);
    }
}

TEST_CASE("thresholds") {
    EvalReport report;
    for (std::size_t i = 0; i < 4; ++i) report.modes[i].mode = kAllModes[i];
    report.second_iteration.precision.mean = 0.5;
    report.modes[2].count = 3;
    report.modes[2].faithfulness.mean = 0.9;
    EvalThresholds t;
    CHECK(check_thresholds(report, t).empty());
    t.min_context_precision = 0.6;
    t.min_faithfulness = 0.95;
    const auto v = check_thresholds(report, t);
    CHECK(v.size() == 2);
}

TEST_CASE("chat judge parses structured replies") {
    const StubChatProvider stub;
    const ChatJudge judge(stub, no_backoff());
    const std::vector<std::string> ctx{"Arm was sore. Fever came."};
    CHECK(judge.attributable("Fever came.", ctx));
    CHECK_FALSE(judge.attributable("Made up.", ctx));
    CHECK(judge.relevant("Arm was sore.", "Arm was sore."));
    CHECK(judge.claims("One. Two.").size() == 2);
    const ScriptedChat junk("nope");
    const ChatJudge bad(junk, no_backoff(1));
    CHECK_THROWS_AS(bad.attributable("x", ctx), ProviderError);
}

TEST_CASE("metrics stay in [0, 1] on fuzzed inputs") {
    const SubstringJudge judge;
    std::mt19937_64 rng(5);
    const std::vector<std::string> pool{"Arm sore.", "Fever.", "Chills!", "Cost?", "", "x", "Arm sore. Fever."};
    auto pick = [&] { return pool[rng() % pool.size()]; };
    for (int i = 0; i < 300; ++i) {
        std::vector<std::string> ctx;
        for (std::size_t k = rng() % 4; k > 0; --k) ctx.push_back(pick());
        const auto gt = pick() + " " + pick();
        const auto answer = pick() + " " + pick();
        for (const auto& m : {context_precision(ctx, gt, judge), context_recall(ctx, gt, judge),
                              faithfulness(answer, ctx, judge)}) {
            CHECK(m.value >= 0.0);
            CHECK(m.value <= 1.0);
            if (m.degenerate) CHECK(m.value == 0.0);
        }
    }
}

}
