#include "vaxrag/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vaxrag/error.hpp"
#include "vaxrag/json.hpp"
#include "vaxrag/text.hpp"

namespace vaxrag {

using nlohmann::json;

std::string_view to_string(Difficulty d) {
    switch (d) {
    case Difficulty::simple: return "simple";
    case Difficulty::reasoning: return "reasoning";
    case Difficulty::multi_context: return "multi_context";
    }
    return "simple";
}

std::optional<Difficulty> parse_difficulty(std::string_view s) {
    for (auto d : kAllDifficulties) {
        if (to_string(d) == s) {
            return d;
        }
    }
    return std::nullopt;
}

std::vector<TestCase> read_testcases_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open test case file: " + path.string());
    }
    std::vector<TestCase> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(json::parse(line).get<TestCase>());
        } catch (const std::exception& e) {
            throw Error("test cases " + path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_testcases_jsonl(const std::filesystem::path& path, std::span<const TestCase> cases) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write test case file: " + path.string());
    }
    for (const auto& c : cases) {
        out << json(c).dump() << '\n';
    }
}

// ---------------------------------------------------------------- judges

std::string strip_citations(std::string_view s) {
    constexpr std::string_view kOpen = "[comment:";
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto open = s.find(kOpen, pos);
        if (open == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        const auto close = s.find(']', open);
        if (close == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        out.append(s.substr(pos, open - pos));
        pos = close + 1;
    }
    return out;
}

namespace {

std::vector<std::string> normalized_sentences(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& sent : text::split_sentences(s)) {
        auto n = text::normalize_for_match(sent);
        if (!n.empty()) {
            out.push_back(std::move(n));
        }
    }
    return out;
}

std::string_view strip_list_marker(std::string_view line) {
    line = text::trim(line);
    if (!line.empty() && (line.front() == '-' || line.front() == '*')) {
        return text::trim(line.substr(1));
    }
    if (line.starts_with("\xE2\x80\xA2")) { // bullet
        return text::trim(line.substr(3));
    }
    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') {
        ++digits;
    }
    if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
        line[digits + 1] == ' ') {
        return text::trim(line.substr(digits + 2));
    }
    return line;
}

std::string passages_block(std::span<const std::string> contexts) {
    std::string out;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i > 0) {
            out.push_back('\n');
        }
        out += "[passage:" + std::to_string(i + 1) + "] " + text::collapse_whitespace(contexts[i]);
    }
    return out;
}

json parse_reply_object(const std::string& reply) {
    // Models sometimes wrap JSON in prose or fences; take the outermost object.
    const auto b = reply.find('{');
    const auto e = reply.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) {
        throw ProviderError("reply is not a JSON object", false);
    }
    try {
        auto j = json::parse(reply.substr(b, e - b + 1));
        if (!j.is_object()) {
            throw ProviderError("reply is not a JSON object", false);
        }
        return j;
    } catch (const json::parse_error& ex) {
        throw ProviderError(std::string("unparseable reply: ") + ex.what(), false);
    }
}

bool parse_verdict(const std::string& reply) {
    const auto j = parse_reply_object(reply);
    const auto it = j.find("verdict");
    if (it == j.end()) {
        throw ProviderError("reply lacks verdict", false);
    }
    if (it->is_boolean()) {
        return it->get<bool>();
    }
    if (it->is_number()) {
        return it->get<double>() >= 0.5;
    }
    throw ProviderError("verdict is neither boolean nor number", false);
}

} // namespace

bool SubstringJudge::relevant(std::string_view chunk, std::string_view ground_truth) const {
    const auto nchunk = text::normalize_for_match(chunk);
    const auto ngt = text::normalize_for_match(ground_truth);
    for (const auto& s : normalized_sentences(ground_truth)) {
        if (nchunk.find(s) != std::string::npos) {
            return true;
        }
    }
    for (const auto& s : normalized_sentences(chunk)) {
        if (ngt.find(s) != std::string::npos) {
            return true;
        }
    }
    return false;
}

bool SubstringJudge::attributable(std::string_view statement, std::span<const std::string> contexts) const {
    const auto needle = text::normalize_for_match(statement);
    if (needle.empty()) {
        return false;
    }
    return std::any_of(contexts.begin(), contexts.end(), [&](const std::string& c) {
        return text::normalize_for_match(c).find(needle) != std::string::npos;
    });
}

std::vector<std::string> SubstringJudge::claims(std::string_view answer) const {
    std::vector<std::string> out;
    std::istringstream lines{strip_citations(answer)};
    std::string line;
    while (std::getline(lines, line)) {
        for (auto& sent : text::split_sentences(strip_list_marker(line))) {
            if (!text::normalize_for_match(sent).empty()) {
                out.push_back(std::move(sent));
            }
        }
    }
    return out;
}

bool ChatJudge::relevant(std::string_view chunk, std::string_view ground_truth) const {
    const std::vector<std::string> one{std::string(chunk)};
    const auto req = shipped_template("judge_relevance")
                         .render({{"ground_truth", std::string(ground_truth)}, {"context", passages_block(one)}});
    return with_retry(retry_, [&] { return parse_verdict(chat_.complete(req)); });
}

bool ChatJudge::attributable(std::string_view statement, std::span<const std::string> contexts) const {
    const auto req = shipped_template("judge_attribution")
                         .render({{"statement", std::string(statement)}, {"context", passages_block(contexts)}});
    return with_retry(retry_, [&] { return parse_verdict(chat_.complete(req)); });
}

std::vector<std::string> ChatJudge::claims(std::string_view answer) const {
    const auto req = shipped_template("judge_claims").render({{"answer", strip_citations(answer)}});
    return with_retry(retry_, [&] {
        const auto j = parse_reply_object(chat_.complete(req));
        const auto it = j.find("claims");
        if (it == j.end() || !it->is_array()) {
            throw ProviderError("reply lacks claims array", false);
        }
        std::vector<std::string> out;
        for (const auto& c : *it) {
            if (c.is_string() && !text::trim(c.get_ref<const std::string&>()).empty()) {
                out.push_back(c.get<std::string>());
            }
        }
        return out;
    });
}

// ---------------------------------------------------------------- metrics

double rank_weighted_precision(std::span<const int> relevance_flags) {
    double acc = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < relevance_flags.size(); ++k) {
        if (relevance_flags[k] != 0) {
            ++hits;
            acc += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    return acc / static_cast<double>(std::max<std::size_t>(1, hits));
}

MetricValue context_precision(std::span<const std::string> retrieved, std::string_view ground_truth,
                              const RelevanceJudge& judge) {
    if (retrieved.empty()) {
        return MetricValue::flagged("empty_retrieval");
    }
    std::vector<int> flags;
    flags.reserve(retrieved.size());
    try {
        for (const auto& chunk : retrieved) {
            flags.push_back(judge.relevant(chunk, ground_truth) ? 1 : 0);
        }
    } catch (const ProviderError& e) {
        return MetricValue::flagged(std::string("judge_failure: ") + e.what());
    }
    return MetricValue::of(rank_weighted_precision(flags));
}

MetricValue context_recall(std::span<const std::string> retrieved, std::string_view ground_truth,
                           const RelevanceJudge& judge) {
    auto sentences = text::split_sentences(ground_truth);
    std::erase_if(sentences, [](const std::string& s) { return text::normalize_for_match(s).empty(); });
    if (sentences.empty()) {
        return MetricValue::flagged("no_ground_truth_sentences");
    }
    if (retrieved.empty()) {
        return MetricValue::of(0.0);
    }
    std::size_t hit = 0;
    try {
        for (const auto& s : sentences) {
            hit += judge.attributable(s, retrieved) ? 1 : 0;
        }
    } catch (const ProviderError& e) {
        return MetricValue::flagged(std::string("judge_failure: ") + e.what());
    }
    return MetricValue::of(static_cast<double>(hit) / static_cast<double>(sentences.size()));
}

MetricValue faithfulness(std::string_view answer, std::span<const std::string> contexts, const RelevanceJudge& judge) {
    if (contexts.empty()) {
        return MetricValue::flagged("no_context");
    }
    try {
        const auto claims = judge.claims(answer);
        if (claims.empty()) {
            return MetricValue::flagged("no_claims");
        }
        std::size_t supported = 0;
        for (const auto& c : claims) {
            supported += judge.attributable(c, contexts) ? 1 : 0;
        }
        return MetricValue::of(static_cast<double>(supported) / static_cast<double>(claims.size()));
    } catch (const ProviderError& e) {
        return MetricValue::flagged(std::string("judge_failure: ") + e.what());
    }
}

double mean_clamped(std::span<const double> cosines) {
    if (cosines.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (double c : cosines) {
        acc += std::clamp(c, 0.0, 1.0);
    }
    return acc / static_cast<double>(cosines.size());
}

MetricValue answer_relevancy(std::string_view question, std::string_view answer, const ChatProvider& generator,
                             const Embedder& embedder, std::size_t m, const RetryPolicy& retry) {
    if (text::trim(answer).empty()) {
        return MetricValue::flagged("empty_answer");
    }
    const auto req = shipped_template("regenerate_questions")
                         .render({{"count", std::to_string(m)}, {"answer", strip_citations(answer)}});
    std::vector<std::string> inputs{std::string(question)};
    try {
        const auto j = parse_reply_object(with_retry(retry, [&] { return generator.complete(req); }));
        const auto it = j.find("questions");
        if (it == j.end() || !it->is_array()) {
            return MetricValue::flagged("generator_failure: reply lacks questions array");
        }
        for (const auto& q : *it) {
            if (inputs.size() > m) {
                break;
            }
            if (q.is_string() && !text::trim(q.get_ref<const std::string&>()).empty()) {
                inputs.push_back(q.get<std::string>());
            }
        }
    } catch (const ProviderError& e) {
        return MetricValue::flagged(std::string("generator_failure: ") + e.what());
    }
    if (inputs.size() == 1) {
        return MetricValue::flagged("generator_failure: no questions");
    }
    std::vector<double> cosines;
    try {
        const auto vecs = embed_batch(inputs, embedder);
        for (std::size_t i = 1; i < vecs.size(); ++i) {
            cosines.push_back(cosine(vecs[i], vecs[0]));
        }
    } catch (const std::exception& e) {
        return MetricValue::flagged(std::string("embedding_failure: ") + e.what());
    }
    return MetricValue::of(mean_clamped(cosines));
}

// ---------------------------------------------------------------- test generation

std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights) {
    if (weights.empty()) {
        throw std::invalid_argument("apportion: no weights");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("apportion: negative weight");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("apportion: weights must sum to 1 (got " + std::to_string(sum) + ")");
    }
    std::vector<std::size_t> counts(weights.size());
    std::vector<double> remainders(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = static_cast<double>(n) * weights[i];
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        remainders[i] = quota - std::floor(quota);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (std::abs(remainders[a] - remainders[b]) > 1e-9) {
            return remainders[a] > remainders[b];
        }
        return a < b;
    });
    for (std::size_t k = 0; assigned < n; ++k) {
        ++counts[order[k % order.size()]];
        ++assigned;
    }
    return counts;
}

namespace {

std::string_view mode_guidance(OutputMode m) {
    switch (m) {
    case OutputMode::answer_question: return "Ask a direct question that the passages answer.";
    case OutputMode::topics_of_discussion:
        return "Ask which topics people discuss; the reference answer names the topics raised in the passages.";
    case OutputMode::summarise: return "Ask for a summary; the reference answer summarises the passages.";
    case OutputMode::public_concerns:
        return "Ask which concerns people raise; the reference answer lists the concerns in the passages.";
    }
    return "";
}

std::string_view difficulty_guidance(Difficulty d) {
    switch (d) {
    case Difficulty::simple: return "A single-fact question answerable from one passage.";
    case Difficulty::reasoning: return "A question that needs an inference step (why or how) over the passage.";
    case Difficulty::multi_context: return "A question that needs information from every passage.";
    }
    return "";
}

// Portable Fisher-Yates; std::shuffle's draw sequence is implementation-defined.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng() % i]);
    }
}

} // namespace

TestGenResult generate_testcases(std::span<const Comment> corpus, const TestGenOptions& opts,
                                 const ChatProvider& generator) {
    if (corpus.empty()) {
        throw std::invalid_argument("generate_testcases: empty corpus");
    }
    const auto diff_counts = apportion(opts.n_total, opts.difficulty_mix);
    const auto mode_counts = apportion(opts.n_total, opts.mode_mix);

    std::vector<OutputMode> modes;
    for (std::size_t m = 0; m < kAllModes.size(); ++m) {
        modes.insert(modes.end(), mode_counts[m], kAllModes[m]);
    }
    std::vector<Difficulty> diffs;
    for (std::size_t d = 0; d < kAllDifficulties.size(); ++d) {
        diffs.insert(diffs.end(), diff_counts[d], kAllDifficulties[d]);
    }
    std::mt19937_64 rng(opts.seed);
    seeded_shuffle(diffs, rng);

    std::vector<std::set<std::string>> token_sets;
    token_sets.reserve(corpus.size());
    for (const auto& c : corpus) {
        const auto toks = text::content_tokens(c.text);
        token_sets.emplace_back(toks.begin(), toks.end());
    }
    auto partner_of = [&](std::size_t i) {
        std::size_t best = i == 0 ? 1 : 0;
        std::size_t best_overlap = 0;
        bool found = false;
        for (std::size_t j = 0; j < corpus.size(); ++j) {
            if (j == i) {
                continue;
            }
            std::size_t overlap = 0;
            for (const auto& t : token_sets[i]) {
                overlap += token_sets[j].contains(t) ? 1 : 0;
            }
            if (!found || overlap > best_overlap) {
                best = j;
                best_overlap = overlap;
                found = true;
            }
        }
        return best;
    };

    TestGenResult out;
    const auto& tmpl = shipped_template("generate_testcase");
    for (std::size_t i = 0; i < opts.n_total; ++i) {
        const auto mode = modes[i];
        const auto difficulty = diffs[i];
        bool done = false;
        for (int attempt = 0; attempt <= opts.retry_budget && !done; ++attempt) {
            std::vector<std::size_t> sources{static_cast<std::size_t>(rng() % corpus.size())};
            if (difficulty == Difficulty::multi_context) {
                if (corpus.size() < 2) {
                    out.warnings.push_back("multi_context case needs at least two comments");
                    break;
                }
                sources.push_back(partner_of(sources.front()));
            }
            std::vector<std::string> passages;
            for (auto s : sources) {
                passages.push_back(corpus[s].text);
            }
            const auto req = tmpl.render({{"mode", std::string(to_string(mode))},
                                          {"difficulty", std::string(to_string(difficulty))},
                                          {"mode_guidance", std::string(mode_guidance(mode))},
                                          {"difficulty_guidance", std::string(difficulty_guidance(difficulty))},
                                          {"context", passages_block(passages)}});
            try {
                const auto j = parse_reply_object(generator.complete(req));
                const auto question = j.value("question", std::string{});
                const auto truth = j.value("ground_truth", std::string{});
                if (text::trim(question).empty() || text::trim(truth).empty()) {
                    throw ProviderError("generator reply lacks question or ground_truth", false);
                }
                TestCase tc;
                char id[32];
                std::snprintf(id, sizeof id, "tc-%04zu", i + 1);
                tc.id = id;
                tc.question = question;
                tc.ground_truth = truth;
                tc.ground_truth_contexts = passages;
                for (auto s : sources) {
                    tc.source_ids.push_back(corpus[s].id);
                }
                tc.mode = mode;
                tc.difficulty = difficulty;
                out.cases.push_back(std::move(tc));
                done = true;
            } catch (const std::exception& e) {
                out.warnings.push_back("case " + std::to_string(i + 1) + " attempt " + std::to_string(attempt + 1) +
                                       ": " + e.what());
            }
        }
        if (!done) {
            ++out.skipped;
        }
    }
    return out;
}

// ---------------------------------------------------------------- evaluation

ColumnSummary summarize(std::span<const MetricValue> values) {
    ColumnSummary s;
    double sum = 0.0;
    std::size_t ceiling = 0;
    for (const auto& v : values) {
        if (v.degenerate) {
            ++s.degenerate;
            continue;
        }
        ++s.scored;
        sum += v.value;
        s.max = s.max ? std::max(*s.max, v.value) : v.value;
        ceiling += v.value == 1.0 ? 1 : 0;
    }
    if (s.scored > 0) {
        s.mean = sum / static_cast<double>(s.scored);
        s.fraction_at_ceiling = static_cast<double>(ceiling) / static_cast<double>(s.scored);
    }
    return s;
}

void aggregate(EvalReport& report) {
    std::sort(report.cases.begin(), report.cases.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.test_case_id < b.test_case_id; });
    std::vector<MetricValue> p1, r1, p2, r2;
    report.failed_cases = 0;
    for (const auto& c : report.cases) {
        p1.push_back(c.iteration1.precision);
        r1.push_back(c.iteration1.recall);
        p2.push_back(c.scores.context_precision);
        r2.push_back(c.scores.context_recall);
        report.failed_cases += c.error ? 1 : 0;
    }
    report.first_iteration = {summarize(p1), summarize(r1)};
    report.second_iteration = {summarize(p2), summarize(r2)};
    std::vector<MetricValue> p_all = p1, r_all = r1;
    p_all.insert(p_all.end(), p2.begin(), p2.end());
    r_all.insert(r_all.end(), r2.begin(), r2.end());
    report.highest = {summarize(p_all), summarize(r_all)};

    for (std::size_t m = 0; m < kAllModes.size(); ++m) {
        std::vector<MetricValue> f, a;
        std::size_t count = 0;
        for (const auto& c : report.cases) {
            if (c.mode == kAllModes[m]) {
                ++count;
                f.push_back(c.scores.faithfulness);
                a.push_back(c.scores.answer_relevancy);
            }
        }
        report.modes[m] = ModeRow{kAllModes[m], count, summarize(f), summarize(a)};
    }
}

EvalReport run_eval(const EvalComponents& components, std::span<const TestCase> cases) {
    const auto& judge = components.judge;
    auto evaluate = [&](std::size_t i) {
        const auto& tc = cases[i];
        CaseResult r;
        r.test_case_id = tc.id;
        r.mode = tc.mode;
        r.difficulty = tc.difficulty;
        try {
            QueryRequest req;
            req.query_text = tc.question;
            req.mode = tc.mode;
            const auto outcome = answer_query(req, components.pipeline);
            auto texts = [](const std::vector<RankedDoc>& docs) {
                std::vector<std::string> out;
                for (const auto& d : docs) {
                    out.push_back(d.text);
                }
                return out;
            };
            const auto ctx1 = texts(outcome.retrieval.iteration1);
            const auto ctx2 = texts(outcome.retrieval.iteration2);
            r.iteration1.precision = context_precision(ctx1, tc.ground_truth, judge);
            r.iteration1.recall = context_recall(ctx1, tc.ground_truth, judge);
            r.scores.context_precision = context_precision(ctx2, tc.ground_truth, judge);
            r.scores.context_recall = context_recall(ctx2, tc.ground_truth, judge);
            r.answer_text = outcome.answer.text;
            r.supporting_ids = outcome.answer.supporting_ids;
            r.insufficient_data = outcome.answer.insufficient_data;
            r.scores.faithfulness = faithfulness(outcome.answer.text, ctx2, judge);
            r.scores.answer_relevancy =
                outcome.answer.insufficient_data
                    ? MetricValue::flagged("insufficient_data")
                    : answer_relevancy(tc.question, outcome.answer.text, components.question_generator,
                                       components.embedder, components.relevancy_questions);
        } catch (const std::exception& e) {
            r.error = e.what();
            const auto failed = MetricValue::flagged("case_failed");
            r.iteration1 = {failed, failed};
            r.scores = {failed, failed, failed, failed};
        }
        return r;
    };
    EvalReport report;
    report.cases = parallel_map(cases.size(), components.max_in_flight, evaluate);
    aggregate(report);
    return report;
}

namespace {

std::string fmt2(const std::optional<double>& v) {
    if (!v) {
        return "n/a";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f%%", v * 100.0);
    return buf;
}

} // namespace

std::string render_tables(const EvalReport& report) {
    std::ostringstream out;
    out << "Context retrieval evaluation\n";
    out << "Iteration | Context Precision | Context Recall\n";
    out << "First Iteration (average) | " << fmt2(report.first_iteration.precision.mean) << " | "
        << fmt2(report.first_iteration.recall.mean) << '\n';
    out << "Second Iteration (average) | " << fmt2(report.second_iteration.precision.mean) << " | "
        << fmt2(report.second_iteration.recall.mean) << '\n';
    out << "Highest Scores | " << fmt2(report.highest.precision.max) << " | " << fmt2(report.highest.recall.max)
        << '\n';
    out << '\n';
    out << "Answer generation evaluation\n";
    out << "Query Type | Faithfulness (Avg) | Answer Relevancy (Avg)\n";
    for (const auto& m : report.modes) {
        out << describe(m.mode).label << " | " << fmt2(m.faithfulness.mean) << " | "
            << fmt2(m.answer_relevancy.mean) << '\n';
    }
    out << '\n';
    out << "Cases: " << report.cases.size() << " (failed " << report.failed_cases << ")";
    out << "; perfect second-iteration scores: context precision "
        << pct(report.second_iteration.precision.fraction_at_ceiling) << ", context recall "
        << pct(report.second_iteration.recall.fraction_at_ceiling) << '\n';
    return out.str();
}

std::vector<std::string> check_thresholds(const EvalReport& report, const EvalThresholds& t) {
    std::vector<std::string> out;
    auto check = [&](const std::optional<double>& min, const std::optional<double>& got, const std::string& what) {
        if (!min) {
            return;
        }
        if (!got) {
            out.push_back(what + ": no scored cases (minimum " + fmt2(min) + ")");
        } else if (*got < *min) {
            out.push_back(what + ": " + fmt2(got) + " below minimum " + fmt2(min));
        }
    };
    check(t.min_context_precision, report.second_iteration.precision.mean, "context precision");
    check(t.min_context_recall, report.second_iteration.recall.mean, "context recall");
    for (const auto& m : report.modes) {
        if (m.count == 0) {
            continue;
        }
        const std::string label(describe(m.mode).label);
        check(t.min_faithfulness, m.faithfulness.mean, label + " faithfulness");
        check(t.min_answer_relevancy, m.answer_relevancy.mean, label + " answer relevancy");
    }
    return out;
}

} // namespace vaxrag
