#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "vaxrag/corpus.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/parallel.hpp"
#include "vaxrag/prompt.hpp"
#include "vaxrag/retrieval.hpp"

// JSON-over-HTTP adapters for hosted models. Wire formats:
//   embedder    POST {model, inputs:[string]}          -> {vectors:[[float]]}
//   reranker    POST {query, passages:[string]}        -> {scores:[float]}
//   compressor  POST {query, passage, threshold}       -> {kept_sentences:[string]}
//   chat        POST {model, system, user}             -> {text}
//   classifier  POST {text}                            -> {bucket}
//   extractor   POST {text, vaccine}                   -> {match: bool}
// When the named environment variable is set its value is sent as a
// bearer token.
namespace vaxrag {

struct HttpEndpoint {
    /// e.g. "http://127.0.0.1:9000/v1/embed"
    std::string url;
    std::string api_key_env;
    std::chrono::milliseconds timeout{30000};
};

/// Connection failures, 429 and 5xx raise retryable ProviderErrors; other
/// non-2xx statuses and malformed bodies raise non-retryable ones.
class JsonHttpClient {
public:
    explicit JsonHttpClient(HttpEndpoint endpoint);
    ~JsonHttpClient();
    JsonHttpClient(JsonHttpClient&&) noexcept;
    JsonHttpClient& operator=(JsonHttpClient&&) noexcept;

    nlohmann::json post(const nlohmann::json& body) const;
    const HttpEndpoint& endpoint() const { return endpoint_; }

private:
    struct Impl;
    HttpEndpoint endpoint_;
    std::unique_ptr<Impl> impl_;
};

/// Retries each batch internally with `retry`, then raises ProviderError.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(const EmbeddingConfig& cfg, RetryPolicy retry = {},
                   std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));
    std::vector<Vector> embed(std::span<const std::string> texts) const override;
    std::size_t dim() const override { return dim_; }
    std::string name() const override { return "remote:" + model_; }

private:
    JsonHttpClient client_;
    std::string model_;
    std::size_t dim_;
    std::size_t batch_size_;
    RetryPolicy retry_;
};

class RemoteReranker final : public Reranker {
public:
    RemoteReranker(HttpEndpoint endpoint, std::string label);
    std::vector<double> score(std::string_view query, std::span<const std::string> passages) const override;
    std::string name() const override { return label_; }

private:
    JsonHttpClient client_;
    std::string label_;
};

class RemoteCompressor final : public Compressor {
public:
    explicit RemoteCompressor(HttpEndpoint endpoint);
    std::vector<std::string> compress(std::string_view query, std::string_view passage,
                                      double threshold) const override;
    std::string name() const override { return "remote-compressor"; }

private:
    JsonHttpClient client_;
};

class RemoteChat final : public ChatProvider {
public:
    RemoteChat(HttpEndpoint endpoint, std::string model);
    std::string complete(const ChatRequest& request) const override;
    std::string model_id() const override { return model_; }

private:
    JsonHttpClient client_;
    std::string model_;
};

class RemoteBucketClassifier final : public BucketClassifier {
public:
    explicit RemoteBucketClassifier(HttpEndpoint endpoint);
    Bucket classify(std::string_view text) const override;
    std::string name() const override { return "remote-classifier"; }

private:
    JsonHttpClient client_;
};

class RemoteVaccineExtractor final : public VaccineExtractor {
public:
    explicit RemoteVaccineExtractor(HttpEndpoint endpoint);
    bool concerns(std::string_view text, std::string_view vaccine) const override;
    std::string name() const override { return "remote-extractor"; }

private:
    JsonHttpClient client_;
};

} // namespace vaxrag
