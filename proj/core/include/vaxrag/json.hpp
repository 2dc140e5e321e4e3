#pragma once

// nlohmann::json bindings for the public data types. Field names here are
// the wire format of the corpus/testcase JSONL files and the HTTP API.

#include <nlohmann/json.hpp>

#include "vaxrag/answer.hpp"
#include "vaxrag/corpus.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/retrieval.hpp"
#include "vaxrag/vector_index.hpp"

namespace vaxrag {

void to_json(nlohmann::json& j, const Comment& c);
void from_json(const nlohmann::json& j, Comment& c);
void to_json(nlohmann::json& j, const IngestReport& r);

void to_json(nlohmann::json& j, const SearchHit& h);

void to_json(nlohmann::json& j, const RetrievalConfig& c);
void from_json(const nlohmann::json& j, RetrievalConfig& c);
/// Accepts the RetrievalConfig keys, all optional; unknown keys are rejected.
void from_json(const nlohmann::json& j, RetrievalOverrides& o);
void to_json(nlohmann::json& j, const RankedDoc& d);
void to_json(nlohmann::json& j, const StageTrace& s);
void to_json(nlohmann::json& j, const RetrievalTrace& t);
void to_json(nlohmann::json& j, const RetrievalResult& r);

void to_json(nlohmann::json& j, const ModeDescriptor& m);
void to_json(nlohmann::json& j, const Answer& a);

void to_json(nlohmann::json& j, const TestCase& t);
void from_json(const nlohmann::json& j, TestCase& t);
void to_json(nlohmann::json& j, const MetricValue& m);
void to_json(nlohmann::json& j, const ColumnSummary& c);
void to_json(nlohmann::json& j, const CaseResult& c);
void to_json(nlohmann::json& j, const EvalReport& r);

/// Per-stage counts, flags and timings without the document texts.
nlohmann::json trace_summary(const RetrievalResult& r);

} // namespace vaxrag
