#include "vaxrag/json.hpp"

#include <stdexcept>

#include "vaxrag/timestamp.hpp"

namespace vaxrag {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

void to_json(json& j, const Comment& c) {
    j = json{{"id", c.id},
             {"platform", to_string(c.platform)},
             {"created_at", format_iso8601(c.created_at)},
             {"text", c.text},
             {"bucket", to_string(c.bucket)},
             {"vaccine_tags", c.vaccine_tags}};
    if (c.author_hash) {
        j["author_hash"] = *c.author_hash;
    }
    if (c.flagged) {
        j["flagged"] = true;
    }
}

void from_json(const json& j, Comment& c) {
    c.id = j.at("id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.platform = parse_platform(j.value("platform", "other"));
    const auto ts = parse_iso8601(j.at("created_at").get<std::string>());
    if (!ts) {
        throw std::invalid_argument("unparseable created_at for comment " + c.id);
    }
    c.created_at = *ts;
    const auto bucket = parse_bucket(j.at("bucket").get<std::string>());
    if (!bucket) {
        throw std::invalid_argument("unknown bucket for comment " + c.id);
    }
    c.bucket = *bucket;
    c.vaccine_tags = j.value("vaccine_tags", std::set<std::string>{});
    if (const auto it = j.find("author_hash"); it != j.end() && it->is_string()) {
        c.author_hash = it->get<std::string>();
    }
    c.flagged = j.value("flagged", false);
}

void to_json(json& j, const IngestReport& r) {
    json buckets = json::object();
    for (const auto& [b, n] : r.per_bucket_counts) {
        buckets[std::string(to_string(b))] = n;
    }
    j = json{{"total_loaded", r.total_loaded},
             {"total_after_preprocess", r.total_after_preprocess},
             {"per_bucket_counts", buckets},
             {"vaccine_specific_count", r.vaccine_specific_count},
             {"malformed_lines", r.malformed_lines},
             {"flagged_ids", r.flagged_ids},
             {"warnings", r.warnings}};
}

void to_json(json& j, const SearchHit& h) {
    j = json{{"comment_id", h.comment_id}, {"score", h.score}, {"rank", h.rank}};
}

void to_json(json& j, const RetrievalConfig& c) {
    j = json{{"k_percent", c.k_percent},
             {"rerank_min_docs", c.rerank_min_docs},
             {"rerank_routing_cutoff", c.rerank_routing_cutoff},
             {"compression_threshold", c.compression_threshold},
             {"second_pass_fraction", c.second_pass_fraction}};
}

void from_json(const json& j, RetrievalConfig& c) {
    RetrievalOverrides o;
    from_json(j, o);
    c = o.apply(c);
}

void from_json(const json& j, RetrievalOverrides& o) {
    if (!j.is_object()) {
        throw std::invalid_argument("retrieval overrides must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "k_percent") {
            o.k_percent = value.get<double>();
        } else if (key == "rerank_min_docs") {
            o.rerank_min_docs = value.get<std::size_t>();
        } else if (key == "rerank_routing_cutoff") {
            o.rerank_routing_cutoff = value.get<std::size_t>();
        } else if (key == "compression_threshold") {
            o.compression_threshold = value.get<double>();
        } else if (key == "second_pass_fraction") {
            o.second_pass_fraction = value.get<double>();
        } else {
            throw std::invalid_argument("unknown retrieval setting: " + key);
        }
    }
}

void to_json(json& j, const RankedDoc& d) {
    j = json{{"comment_id", d.comment_id},
             {"text", d.text},
             {"retrieval_score", d.retrieval_score},
             {"rerank_score", optional_number(d.rerank_score)},
             {"stage", to_string(d.stage)},
             {"compressed", d.compressed}};
}

void to_json(json& j, const StageTrace& s) {
    j = json{{"iteration", s.iteration},
             {"stage", s.stage},
             {"input_count", s.input_count},
             {"output_count", s.output_count},
             {"micros", s.micros},
             {"early_exit", s.early_exit},
             {"scorer", s.scorer},
             {"degraded", s.degraded},
             {"flagged_ids", s.flagged_ids},
             {"note", s.note}};
}

void to_json(json& j, const RetrievalTrace& t) {
    j = json{{"index_size", t.index_size},
             {"requested_hits", t.requested_hits},
             {"config", t.config},
             {"stages", t.stages}};
}

void to_json(json& j, const RetrievalResult& r) {
    j = json{{"query", r.query}, {"iteration1", r.iteration1}, {"iteration2", r.iteration2}, {"trace", r.trace}};
}

json trace_summary(const RetrievalResult& r) {
    json stages = json::array();
    for (const auto& s : r.trace.stages) {
        stages.push_back(s);
    }
    auto scores = [](const std::vector<RankedDoc>& docs) {
        json out = json::array();
        for (const auto& d : docs) {
            out.push_back(json{{"comment_id", d.comment_id},
                               {"retrieval_score", d.retrieval_score},
                               {"rerank_score", optional_number(d.rerank_score)}});
        }
        return out;
    };
    return json{{"index_size", r.trace.index_size},
                {"requested_hits", r.trace.requested_hits},
                {"config", r.trace.config},
                {"iteration1_count", r.iteration1.size()},
                {"iteration2_count", r.iteration2.size()},
                {"iteration1_scores", scores(r.iteration1)},
                {"iteration2_scores", scores(r.iteration2)},
                {"stages", stages}};
}

void to_json(json& j, const ModeDescriptor& m) {
    j = json{{"id", m.id}, {"label", m.label}, {"description", m.description}};
}

void to_json(json& j, const Answer& a) {
    j = json{{"text", a.text},
             {"mode", to_string(a.mode)},
             {"supporting_ids", a.supporting_ids},
             {"context_used", a.context_used},
             {"model_id", a.model_id},
             {"created_at", format_iso8601(a.created_at)},
             {"insufficient_data", a.insufficient_data},
             {"dropped_citations", a.dropped_citations}};
}

void to_json(json& j, const TestCase& t) {
    j = json{{"id", t.id},
             {"question", t.question},
             {"ground_truth", t.ground_truth},
             {"ground_truth_contexts", t.ground_truth_contexts},
             {"source_ids", t.source_ids},
             {"mode", to_string(t.mode)},
             {"difficulty", to_string(t.difficulty)}};
}

void from_json(const json& j, TestCase& t) {
    t.id = j.at("id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.ground_truth = j.at("ground_truth").get<std::string>();
    t.ground_truth_contexts = j.value("ground_truth_contexts", std::vector<std::string>{});
    t.source_ids = j.value("source_ids", std::vector<std::string>{});
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) {
        throw std::invalid_argument("unknown mode in test case " + t.id);
    }
    t.mode = *mode;
    const auto diff = parse_difficulty(j.value("difficulty", "simple"));
    if (!diff) {
        throw std::invalid_argument("unknown difficulty in test case " + t.id);
    }
    t.difficulty = *diff;
    if (t.ground_truth.empty()) {
        throw std::invalid_argument("empty ground_truth in test case " + t.id);
    }
}

void to_json(json& j, const MetricValue& m) {
    j = json{{"value", m.value}, {"degenerate", m.degenerate}};
    if (m.degenerate) {
        j["reason"] = m.reason;
    }
}

void to_json(json& j, const ColumnSummary& c) {
    j = json{{"mean", optional_number(c.mean)},
             {"max", optional_number(c.max)},
             {"scored", c.scored},
             {"degenerate", c.degenerate},
             {"fraction_at_ceiling", c.fraction_at_ceiling}};
}

void to_json(json& j, const CaseResult& c) {
    j = json{{"test_case_id", c.test_case_id},
             {"mode", to_string(c.mode)},
             {"difficulty", to_string(c.difficulty)},
             {"iteration1", {{"context_precision", c.iteration1.precision}, {"context_recall", c.iteration1.recall}}},
             {"iteration2",
              {{"context_precision", c.scores.context_precision}, {"context_recall", c.scores.context_recall}}},
             {"faithfulness", c.scores.faithfulness},
             {"answer_relevancy", c.scores.answer_relevancy},
             {"answer_text", c.answer_text},
             {"supporting_ids", c.supporting_ids},
             {"insufficient_data", c.insufficient_data},
             {"error", c.error ? json(*c.error) : json(nullptr)}};
}

void to_json(json& j, const EvalReport& r) {
    auto row = [](std::string_view label, const IterationRow& it) {
        return json{{"label", label}, {"context_precision", it.precision}, {"context_recall", it.recall}};
    };
    json modes = json::array();
    for (const auto& m : r.modes) {
        modes.push_back(json{{"mode", to_string(m.mode)},
                             {"label", describe(m.mode).label},
                             {"count", m.count},
                             {"faithfulness", m.faithfulness},
                             {"answer_relevancy", m.answer_relevancy}});
    }
    j = json{{"context_table",
              json::array({row("First Iteration (average)", r.first_iteration),
                           row("Second Iteration (average)", r.second_iteration), row("Highest Scores", r.highest)})},
             {"answer_table", modes},
             {"case_count", r.cases.size()},
             {"failed_cases", r.failed_cases},
             {"cases", r.cases}};
}

} // namespace vaxrag
