#include "vaxrag/answer.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <unordered_set>

#include "vaxrag/text.hpp"

namespace vaxrag {

std::string_view to_string(OutputMode m) {
    return describe(m).id;
}

std::optional<OutputMode> parse_mode(std::string_view s) {
    for (auto m : kAllModes) {
        if (describe(m).id == s) {
            return m;
        }
    }
    return std::nullopt;
}

const ModeDescriptor& describe(OutputMode m) {
    static const std::array<ModeDescriptor, 4> table{{
        {OutputMode::answer_question, "answer_question", "Answer the Question",
         "A direct answer to the query grounded in the retrieved comments."},
        {OutputMode::topics_of_discussion, "topics_of_discussion", "Topics of Discussion",
         "A bulleted list of the topics people discuss around the query."},
        {OutputMode::summarise, "summarise", "Summarise",
         "A short summary of what the retrieved comments say."},
        {OutputMode::public_concerns, "public_concerns", "Public Concerns",
         "A bulleted list of concerns the public raises (side effects, access, trust)."},
    }};
    return table[static_cast<std::size_t>(m)];
}

RetrievalConfig RetrievalOverrides::apply(RetrievalConfig base) const {
    if (k_percent) base.k_percent = *k_percent;
    if (rerank_min_docs) base.rerank_min_docs = *rerank_min_docs;
    if (rerank_routing_cutoff) base.rerank_routing_cutoff = *rerank_routing_cutoff;
    if (compression_threshold) base.compression_threshold = *compression_threshold;
    if (second_pass_fraction) base.second_pass_fraction = *second_pass_fraction;
    return base;
}

ChatRequest render_prompt(OutputMode mode, std::string_view query_text, std::span<const RankedDoc> docs) {
    if (docs.empty()) {
        throw std::invalid_argument("render_prompt: no context documents");
    }
    std::string context;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) {
            context.push_back('\n');
        }
        context += std::to_string(i + 1) + ". [comment:" + docs[i].comment_id + "] " +
                   text::collapse_whitespace(docs[i].text);
    }
    return shipped_template(to_string(mode))
        .render({{"query", text::collapse_whitespace(query_text)}, {"context", context}});
}

std::vector<std::string> parse_citations(std::string_view completion) {
    constexpr std::string_view kOpen = "[comment:";
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto pos = completion.find(kOpen); pos != std::string_view::npos; pos = completion.find(kOpen, pos + 1)) {
        const auto start = pos + kOpen.size();
        const auto close = completion.find(']', start);
        if (close == std::string_view::npos) {
            break;
        }
        std::string id(text::trim(completion.substr(start, close - start)));
        if (!id.empty() && seen.insert(id).second) {
            out.push_back(std::move(id));
        }
    }
    return out;
}

Answer formulate_answer(const QueryRequest& request, const RetrievalResult& result, const ChatProvider& llm,
                        const AnswerOptions& opts) {
    Answer answer;
    answer.mode = request.mode;
    answer.context_used = result.iteration2;
    answer.created_at = opts.clock ? opts.clock()
                                   : std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());

    if (result.iteration2.empty()) {
        answer.text = std::string(kInsufficientDataNotice);
        answer.insufficient_data = true;
        answer.model_id = "none";
        return answer;
    }

    const auto prompt = render_prompt(request.mode, request.query_text, result.iteration2);
    answer.text = with_retry(opts.retry, [&] { return llm.complete(prompt); });
    answer.model_id = llm.model_id();

    std::unordered_set<std::string> context_ids;
    for (const auto& d : result.iteration2) {
        context_ids.insert(d.comment_id);
    }
    for (auto& id : parse_citations(answer.text)) {
        if (context_ids.contains(id)) {
            answer.supporting_ids.push_back(std::move(id));
        } else {
            answer.dropped_citations.push_back(std::move(id));
        }
    }
    return answer;
}

QueryOutcome answer_query(const QueryRequest& request, const RagPipeline& pipeline) {
    if (text::trim(request.query_text).empty()) {
        throw std::invalid_argument("query_text must not be empty");
    }
    const auto cfg = request.overrides.apply(pipeline.config);
    auto popts = pipeline.pipeline_options;
    if (request.vaccine_filter && !request.vaccine_filter->empty()) {
        if (!pipeline.has_tag) {
            throw std::invalid_argument("vaccine_filter given but no comment metadata is loaded");
        }
        const auto vaccine = text::to_lower(*request.vaccine_filter);
        auto previous = popts.allow;
        popts.allow = [vaccine, previous, has_tag = pipeline.has_tag](const std::string& id) {
            return (!previous || previous(id)) && has_tag(id, vaccine);
        };
    }
    QueryOutcome out;
    out.retrieval = run_pipeline(request.query_text, pipeline.index, pipeline.providers, cfg, popts);
    out.answer = formulate_answer(request, out.retrieval, pipeline.llm, pipeline.answer_options);
    return out;
}

} // namespace vaxrag
