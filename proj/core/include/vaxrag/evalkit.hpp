#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vaxrag/answer.hpp"
#include "vaxrag/corpus.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/prompt.hpp"

namespace vaxrag {

enum class Difficulty { simple, reasoning, multi_context };
inline constexpr std::array<Difficulty, 3> kAllDifficulties{Difficulty::simple, Difficulty::reasoning,
                                                            Difficulty::multi_context};
std::string_view to_string(Difficulty d);
std::optional<Difficulty> parse_difficulty(std::string_view s);

struct TestCase {
    std::string id;
    std::string question;
    std::string ground_truth;
    std::vector<std::string> ground_truth_contexts;
    std::vector<std::string> source_ids;
    OutputMode mode = OutputMode::answer_question;
    Difficulty difficulty = Difficulty::simple;
};

std::vector<TestCase> read_testcases_jsonl(const std::filesystem::path& path);
void write_testcases_jsonl(const std::filesystem::path& path, std::span<const TestCase> cases);

/// A metric score in [0, 1], or a degenerate flag (value 0) with the reason.
struct MetricValue {
    double value = 0.0;
    bool degenerate = false;
    std::string reason;

    static MetricValue of(double v) { return {v, false, {}}; }
    static MetricValue flagged(std::string why) { return {0.0, true, std::move(why)}; }
};

class RelevanceJudge {
public:
    virtual ~RelevanceJudge() = default;
    /// Is a retrieved chunk useful for the ground truth? (context precision)
    virtual bool relevant(std::string_view chunk, std::string_view ground_truth) const = 0;
    /// Can `statement` be attributed to the contexts? (context recall, faithfulness)
    virtual bool attributable(std::string_view statement, std::span<const std::string> contexts) const = 0;
    /// Atomic claims of an answer (faithfulness).
    virtual std::vector<std::string> claims(std::string_view answer) const = 0;
    virtual std::string name() const = 0;
};

/// Decidable offline judge. After normalisation (lowercase, collapsed
/// whitespace, edge punctuation stripped), a statement is supported iff it
/// is a substring of some context; a chunk is relevant iff it shares a
/// sentence with the ground truth in either direction. Claims are answer
/// sentences with citation tags and list bullets removed.
class SubstringJudge final : public RelevanceJudge {
public:
    bool relevant(std::string_view chunk, std::string_view ground_truth) const override;
    bool attributable(std::string_view statement, std::span<const std::string> contexts) const override;
    std::vector<std::string> claims(std::string_view answer) const override;
    std::string name() const override { return "substring"; }
};

/// Judge backed by a chat model using the shipped judge_* templates. Each
/// reply must be a JSON object; anything else raises ProviderError.
class ChatJudge final : public RelevanceJudge {
public:
    explicit ChatJudge(const ChatProvider& chat, RetryPolicy retry = {}) : chat_(chat), retry_(retry) {}
    bool relevant(std::string_view chunk, std::string_view ground_truth) const override;
    bool attributable(std::string_view statement, std::span<const std::string> contexts) const override;
    std::vector<std::string> claims(std::string_view answer) const override;
    std::string name() const override { return "chat:" + chat_.model_id(); }

private:
    const ChatProvider& chat_;
    RetryPolicy retry_;
};

/// Removes "[comment:...]" tags.
std::string strip_citations(std::string_view s);

/// sum_k (precision@k * v_k) / max(1, sum_k v_k) over binary flags.
double rank_weighted_precision(std::span<const int> relevance_flags);

/// Empty `retrieved` or a judge failure is degenerate.
MetricValue context_precision(std::span<const std::string> retrieved, std::string_view ground_truth,
                              const RelevanceJudge& judge);

/// Fraction of ground-truth sentences attributable to `retrieved`; an empty
/// retrieved set scores a real 0. A ground truth with no sentences or a judge
/// failure is degenerate.
MetricValue context_recall(std::span<const std::string> retrieved, std::string_view ground_truth,
                           const RelevanceJudge& judge);

/// Supported claims / total claims. Zero claims, no context, or a judge
/// failure is degenerate (never a silent 1).
MetricValue faithfulness(std::string_view answer, std::span<const std::string> contexts, const RelevanceJudge& judge);

/// Mean over `cosines` with negatives clamped to 0.
double mean_clamped(std::span<const double> cosines);

/// The generator writes `m` questions for `answer`; the score is the mean
/// clamped cosine between each and `question`. Generator failure or no
/// parseable question is degenerate.
MetricValue answer_relevancy(std::string_view question, std::string_view answer, const ChatProvider& generator,
                             const Embedder& embedder, std::size_t m = 3, const RetryPolicy& retry = {});

/// Largest-remainder apportionment of `n` over `weights` (which must sum to
/// 1 within 1e-9). Ties go to the lower index.
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights);

struct TestGenOptions {
    std::size_t n_total = 100;
    /// simple, reasoning, multi_context
    std::array<double, 3> difficulty_mix{0.50, 0.25, 0.25};
    /// answer_question, topics_of_discussion, summarise, public_concerns
    std::array<double, 4> mode_mix{103.0 / 276.0, 72.0 / 276.0, 45.0 / 276.0, 56.0 / 276.0};
    std::uint64_t seed = 42;
    /// Extra attempts per case after a generator failure or unusable reply.
    int retry_budget = 3;
};

struct TestGenResult {
    std::vector<TestCase> cases;
    std::size_t skipped = 0;
    std::vector<std::string> warnings;
};

/// Difficulty and mode counts follow their mixes by largest remainder.
/// Multi-context cases draw two distinct comments (the second is the
/// comment sharing the most content words with the first).
TestGenResult generate_testcases(std::span<const Comment> corpus, const TestGenOptions& opts,
                                 const ChatProvider& generator);

struct ContextScores {
    MetricValue precision;
    MetricValue recall;
};

struct EvalScores {
    MetricValue context_precision;
    MetricValue context_recall;
    MetricValue faithfulness;
    MetricValue answer_relevancy;
};

struct CaseResult {
    std::string test_case_id;
    OutputMode mode = OutputMode::answer_question;
    Difficulty difficulty = Difficulty::simple;
    ContextScores iteration1;
    /// Context metrics here are the second-iteration ones.
    EvalScores scores;
    std::string answer_text;
    std::vector<std::string> supporting_ids;
    bool insufficient_data = false;
    std::optional<std::string> error;
};

struct ColumnSummary {
    /// Arithmetic mean of the non-degenerate scores; nullopt if there are none.
    std::optional<double> mean;
    std::optional<double> max;
    std::size_t scored = 0;
    std::size_t degenerate = 0;
    /// Share of scored cases at exactly 1.0.
    double fraction_at_ceiling = 0.0;
};

ColumnSummary summarize(std::span<const MetricValue> values);

struct IterationRow {
    ColumnSummary precision;
    ColumnSummary recall;
};

struct ModeRow {
    OutputMode mode = OutputMode::answer_question;
    std::size_t count = 0;
    ColumnSummary faithfulness;
    ColumnSummary answer_relevancy;
};

struct EvalReport {
    std::vector<CaseResult> cases; // sorted by test_case_id
    IterationRow first_iteration;
    IterationRow second_iteration;
    /// Highest per-case score over both iterations.
    IterationRow highest;
    std::array<ModeRow, 4> modes{};
    std::size_t failed_cases = 0;
};

struct EvalComponents {
    const RagPipeline& pipeline;
    const RelevanceJudge& judge;
    /// Writes the questions used for answer relevancy.
    const ChatProvider& question_generator;
    const Embedder& embedder;
    std::size_t relevancy_questions = 3;
    std::size_t max_in_flight = 8;
};

/// Runs every case end to end. A failing case is recorded (all metrics
/// degenerate) and the run continues.
EvalReport run_eval(const EvalComponents& components, std::span<const TestCase> cases);

/// Recomputes per-iteration and per-mode summaries from `report.cases`.
void aggregate(EvalReport& report);

/// The context table (iteration x {precision, recall}) followed by the
/// answer table (mode x {faithfulness, relevancy}).
std::string render_tables(const EvalReport& report);

struct EvalThresholds {
    std::optional<double> min_context_precision;
    std::optional<double> min_context_recall;
    std::optional<double> min_faithfulness;
    std::optional<double> min_answer_relevancy;
};

/// Human-readable violations (second-iteration context averages and every
/// mode's answer averages are checked); empty means pass.
std::vector<std::string> check_thresholds(const EvalReport& report, const EvalThresholds& thresholds);

} // namespace vaxrag
