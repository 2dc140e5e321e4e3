#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "vaxrag/answer.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/stub_chat.hpp"
#include "vaxrag/text.hpp"

using namespace vaxrag;
using namespace vaxrag::testing;

namespace {

RetrievalResult with_context(std::vector<RankedDoc> docs) {
    RetrievalResult r;
    r.iteration2 = std::move(docs);
    return r;
}

std::vector<RankedDoc> four_docs() {
    return {doc("c1", "Shingrix made my arm sore. It passed in a day."),
            doc("c2", "The second dose gave me chills. I worry about the cost."),
            doc("c3", "Pharmacy wait was short."),
            doc("c4", "Friends are hesitant after hearing stories! Some are scared of the pain.")};
}

} // namespace

TEST_SUITE("prompt") {

TEST_CASE("every mode has exactly one shipped template") {
    for (const auto m : kAllModes) {
        const auto& t = shipped_template(to_string(m));
        CHECK_FALSE(t.system.empty());
        CHECK(t.user.find("{{query}}") != std::string::npos);
        CHECK(t.user.find("{{context}}") != std::string::npos);
    }
    const auto names = template_names();
    CHECK(std::count(names.begin(), names.end(), "summarise") == 1);
    CHECK_THROWS_AS(template_source("nope"), std::out_of_range);
}

TEST_CASE("template parsing and single-pass rendering") {
    const auto t = PromptTemplate::parse("t", "# comment\n[system]\nS {{a}}\n[user]\nU {{a}} {{b}}\n");
    CHECK(t.system == "S {{a}}");
    const auto r = t.render({{"a", "{{b}}"}, {"b", "x"}});
    CHECK(r.system == "S {{b}}");
    CHECK(r.user == "U {{b}} x");
    CHECK_THROWS_AS(t.render({{"a", "1"}}), std::invalid_argument);
    CHECK_THROWS(PromptTemplate::parse("bad", "no sections"));
}

}

TEST_SUITE("answer") {

TEST_CASE("modes parse and describe") {
    CHECK(parse_mode("summarise") == OutputMode::summarise);
    CHECK_FALSE(parse_mode("rant").has_value());
    CHECK(describe(OutputMode::public_concerns).label == "Public Concerns");
    for (const auto m : kAllModes) CHECK(parse_mode(to_string(m)) == m);
}

TEST_CASE("render_prompt") {
    const std::vector<RankedDoc> docs{doc("a1", "one"), doc("b2", "two"), doc("c3", "three")};
    const auto p = render_prompt(OutputMode::summarise, "what is said", docs);
    for (const auto* tag : {"[comment:a1]", "[comment:b2]", "[comment:c3]"}) {
        CHECK(p.user.find(tag) != std::string::npos);
    }
    CHECK(p.user.find("1. [comment:a1] one") != std::string::npos);
    CHECK(p.user.find("what is said") != std::string::npos);
    CHECK(p.user.find("ONLY") != std::string::npos);

    const auto q = render_prompt(OutputMode::answer_question, "x", docs);
    CHECK(q.system == shipped_template("answer_question").system);
    const auto src = std::string(template_source("answer_question"));
    CHECK(src.find(q.system) != std::string::npos);

    CHECK(render_prompt(OutputMode::summarise, "what is said", docs).text() == p.text());
    CHECK_THROWS_AS(render_prompt(OutputMode::summarise, "q", {}), std::invalid_argument);
}

TEST_CASE("parse_citations") {
    CHECK(parse_citations("a [comment:1] b [comment:x-2] [comment:1] [comment:]") ==
          std::vector<std::string>{"1", "x-2"});
}

TEST_CASE("empty context gives the notice without a provider call") {
    const ScriptedChat chat("never");
    QueryRequest req{"q", OutputMode::summarise, {}, {}};
    const auto a = formulate_answer(req, with_context({}), chat);
    CHECK(chat.calls == 0);
    CHECK(a.insufficient_data);
    CHECK(a.text == kInsufficientDataNotice);
    CHECK(a.supporting_ids.empty());
}

TEST_CASE("citations outside the context are dropped and recorded") {
    const ScriptedChat chat("Fine [comment:c1]. Invented [comment:42].");
    QueryRequest req{"q", OutputMode::answer_question, {}, {}};
    AnswerOptions opts;
    opts.clock = [] { return Timestamp{std::chrono::seconds(86400)}; };
    const auto a = formulate_answer(req, with_context({doc("c1", "Fine.")}), chat, opts);
    CHECK(a.supporting_ids == std::vector<std::string>{"c1"});
    CHECK(a.dropped_citations == std::vector<std::string>{"42"});
    CHECK(a.model_id == "scripted");
    CHECK(format_iso8601(a.created_at) == "1970-01-02T00:00:00Z");
}

TEST_CASE("provider failure is retried then surfaced") {
    const ScriptedChat flaky("ok [comment:c1]");
    flaky.fail_times = 2;
    QueryRequest req{"q", OutputMode::answer_question, {}, {}};
    AnswerOptions opts;
    opts.retry = no_backoff(3);
    const auto a = formulate_answer(req, with_context({doc("c1", "ok")}), flaky, opts);
    CHECK(a.text == "ok [comment:c1]");
    CHECK(flaky.calls == 3);

    const ScriptedChat down("x");
    down.fail_times = 5;
    CHECK_THROWS_AS(formulate_answer(req, with_context({doc("c1", "ok")}), down, opts), ProviderError);
}

TEST_CASE("extractive stub copies every answer sentence from the context") {
    const StubChatProvider stub;
    const SubstringJudge judge;
    const auto docs = four_docs();
    std::vector<std::string> contexts;
    for (const auto& d : docs) contexts.push_back(d.text);
    for (const auto m : kAllModes) {
        QueryRequest req{"what about the sore arm and cost", m, {}, {}};
        const auto a = formulate_answer(req, with_context(docs), stub);
        CAPTURE(to_string(m));
        REQUIRE_FALSE(a.text.empty());
        CHECK(a.dropped_citations.empty());
        CHECK_FALSE(a.supporting_ids.empty());
        for (const auto& claim : judge.claims(a.text)) {
            const bool found = std::any_of(contexts.begin(), contexts.end(), [&](const std::string& c) {
                return text::normalize_for_match(c).find(text::normalize_for_match(claim)) != std::string::npos;
            });
            CHECK_MESSAGE(found, claim);
        }
        const auto f = faithfulness(a.text, contexts, judge);
        CHECK_FALSE(f.degenerate);
        CHECK(f.value == 1.0);
    }
}

TEST_CASE("public concerns picks concern sentences") {
    const StubChatProvider stub;
    QueryRequest req{"what worries people", OutputMode::public_concerns, {}, {}};
    const auto a = formulate_answer(req, with_context(four_docs()), stub);
    CHECK(a.text.find("I worry about the cost.") != std::string::npos);
    CHECK(a.text.find("Pharmacy wait was short.") == std::string::npos);
    CHECK(a.text.rfind("- ", 0) == 0);
}

TEST_CASE("overrides apply on top of the base config") {
    RetrievalOverrides o;
    o.k_percent = 10;
    const auto c = o.apply(RetrievalConfig{});
    CHECK(c.k_percent == 10);
    CHECK(c.rerank_min_docs == 10);
    CHECK(c.second_pass_fraction == 0.5);
}

}
