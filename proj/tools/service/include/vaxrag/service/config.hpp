#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vaxrag/embedding.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/parallel.hpp"
#include "vaxrag/retrieval.hpp"

namespace vaxrag::service {

enum class ProviderMode { stub, remote };

std::string_view to_string(ProviderMode m);
std::optional<ProviderMode> parse_provider_mode(std::string_view s);

/// One provider's settings. `mode` overrides the service-wide switch.
struct ProviderSettings {
    std::optional<ProviderMode> mode;
    std::string url;
    std::string model;
    /// Environment variable holding the bearer token; the value itself never
    /// appears in config files or logs.
    std::string api_key_env;
};

struct ProviderTable {
    ProviderSettings embedder;
    ProviderSettings reranker_small;
    ProviderSettings reranker_large;
    ProviderSettings compressor;
    ProviderSettings chat;
    ProviderSettings judge;
    ProviderSettings classifier;
    ProviderSettings extractor;
};

/// Config file keys (JSON; every key optional, unknown keys rejected):
///
///   listen_host, listen_port            HTTP bind address
///   index_path, corpus_path             persisted index / corpus JSONL
///   vaccine                             default vaccine for ingest
///   provider_mode                       "stub" | "remote"
///   providers.<kind>.{mode,url,model,api_key_env}
///       kinds: embedder reranker_small reranker_large compressor chat
///              judge classifier extractor
///   classifier_rules                    keyword table for the stub classifier
///   embedding.{dim,batch_size}
///   retrieval.{k_percent,rerank_min_docs,rerank_routing_cutoff,
///              compression_threshold,second_pass_fraction}
///   request_timeout_ms, max_concurrent_pipelines, max_in_flight_provider_calls
///   retry.{max_attempts,initial_backoff_ms,multiplier}
///   eval.{relevancy_questions,min_context_precision,min_context_recall,
///         min_faithfulness,min_answer_relevancy}
///   deterministic                       zero stage timings, fixed answer clock
///
/// Environment overrides: VAXRAG_PROVIDER_MODE, VAXRAG_LISTEN_HOST,
/// VAXRAG_LISTEN_PORT, VAXRAG_INDEX_PATH, VAXRAG_CORPUS_PATH,
/// VAXRAG_DETERMINISTIC and VAXRAG_API_TOKEN (static bearer token for the
/// HTTP API).
struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::filesystem::path index_path = "vaxrag.idx";
    std::filesystem::path corpus_path = "corpus.jsonl";
    std::string vaccine = "shingrix";

    ProviderMode provider_mode = ProviderMode::stub;
    ProviderTable providers;
    std::optional<std::filesystem::path> classifier_rules;

    std::size_t embedding_dim = 1536;
    std::size_t embedding_batch_size = 64;
    RetrievalConfig retrieval;

    std::chrono::milliseconds request_timeout{30000};
    std::size_t max_concurrent_pipelines = 4;
    std::size_t max_in_flight_provider_calls = 8;
    RetryPolicy retry;

    std::size_t relevancy_questions = 3;
    EvalThresholds thresholds;

    bool deterministic = false;
    /// From VAXRAG_API_TOKEN only; empty disables the check.
    std::string api_token;

    /// Effective mode of one provider.
    ProviderMode mode_of(const ProviderSettings& p) const { return p.mode.value_or(provider_mode); }
    /// "stub", "remote" or "mixed".
    std::string provider_mode_label() const;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Every setting, secrets redacted.
    nlohmann::json to_json() const;

    using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
    static EnvLookup process_env();

    /// Defaults, then the file (if given), then environment overrides. The
    /// result is validated.
    static ServiceConfig load(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env());
    static ServiceConfig from_json(const nlohmann::json& j);
};

} // namespace vaxrag::service
