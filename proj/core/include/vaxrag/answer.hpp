#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vaxrag/parallel.hpp"
#include "vaxrag/prompt.hpp"
#include "vaxrag/retrieval.hpp"
#include "vaxrag/timestamp.hpp"

namespace vaxrag {

enum class OutputMode { answer_question, topics_of_discussion, summarise, public_concerns };

inline constexpr std::array<OutputMode, 4> kAllModes{OutputMode::answer_question, OutputMode::topics_of_discussion,
                                                     OutputMode::summarise, OutputMode::public_concerns};

std::string_view to_string(OutputMode m);
std::optional<OutputMode> parse_mode(std::string_view s);

struct ModeDescriptor {
    OutputMode mode;
    std::string_view id;
    std::string_view label;
    std::string_view description;
};
const ModeDescriptor& describe(OutputMode m);

/// Optional per-request changes to the service's RetrievalConfig.
struct RetrievalOverrides {
    std::optional<double> k_percent;
    std::optional<std::size_t> rerank_min_docs;
    std::optional<std::size_t> rerank_routing_cutoff;
    std::optional<double> compression_threshold;
    std::optional<double> second_pass_fraction;

    RetrievalConfig apply(RetrievalConfig base) const;
};

struct QueryRequest {
    std::string query_text;
    OutputMode mode = OutputMode::answer_question;
    std::optional<std::string> vaccine_filter;
    RetrievalOverrides overrides;
};

struct Answer {
    std::string text;
    OutputMode mode = OutputMode::answer_question;
    std::vector<std::string> supporting_ids;
    std::vector<RankedDoc> context_used;
    std::string model_id;
    Timestamp created_at{};
    bool insufficient_data = false;
    /// Citations the completion made to ids outside the context.
    std::vector<std::string> dropped_citations;
};

inline constexpr std::string_view kInsufficientDataNotice =
    "Insufficient data: no relevant comments were found for this query.";

/// Renders the mode's template with a numbered "[comment:{id}]" context
/// block. Throws std::invalid_argument for empty `docs`.
ChatRequest render_prompt(OutputMode mode, std::string_view query_text, std::span<const RankedDoc> docs);

/// All "[comment:{id}]" citations in order of first appearance, deduplicated.
std::vector<std::string> parse_citations(std::string_view completion);

struct AnswerOptions {
    RetryPolicy retry{};
    std::function<Timestamp()> clock;
};

/// Empty iteration 2 gives the insufficient-data notice without a provider
/// call. Otherwise one completion is requested; citations outside the
/// context are dropped and recorded. Provider failure after retries
/// propagates as ProviderError.
Answer formulate_answer(const QueryRequest& request, const RetrievalResult& result, const ChatProvider& llm,
                        const AnswerOptions& opts = {});

/// Retrieval plus answer formulation over one index; shared by the
/// service, the CLI and the evaluation harness.
struct RagPipeline {
    const VectorIndex& index;
    PipelineProviders providers;
    const ChatProvider& llm;
    RetrievalConfig config{};
    PipelineOptions pipeline_options{};
    AnswerOptions answer_options{};
    /// Resolves QueryRequest::vaccine_filter: true if comment `id` carries tag `vaccine`.
    std::function<bool(const std::string& id, const std::string& vaccine)> has_tag;
};

struct QueryOutcome {
    RetrievalResult retrieval;
    Answer answer;
};

/// Applies overrides and the vaccine filter, then run_pipeline + formulate_answer.
QueryOutcome answer_query(const QueryRequest& request, const RagPipeline& pipeline);

} // namespace vaxrag
