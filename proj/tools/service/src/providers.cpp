#include "vaxrag/service/providers.hpp"

#include "vaxrag/service/remote.hpp"
#include "vaxrag/stub_chat.hpp"

namespace vaxrag::service {
namespace {

HttpEndpoint endpoint(const ProviderSettings& p, const ServiceConfig& cfg) {
    return HttpEndpoint{p.url, p.api_key_env, cfg.request_timeout};
}

bool remote(const ProviderSettings& p, const ServiceConfig& cfg) { return cfg.mode_of(p) == ProviderMode::remote; }

} // namespace

ProviderSet make_providers(const ServiceConfig& cfg) {
    const auto& t = cfg.providers;
    ProviderSet s;

    if (remote(t.embedder, cfg)) {
        EmbeddingConfig ec;
        ec.provider = EmbeddingProviderKind::remote;
        ec.dim = cfg.embedding_dim;
        ec.endpoint = t.embedder.url;
        ec.batch_size = cfg.embedding_batch_size;
        if (!t.embedder.model.empty()) ec.model = t.embedder.model;
        if (!t.embedder.api_key_env.empty()) ec.api_key_env = t.embedder.api_key_env;
        s.embedder = std::make_unique<RemoteEmbedder>(ec, cfg.retry, cfg.request_timeout);
    } else {
        s.embedder = std::make_unique<HashedEmbedder>(cfg.embedding_dim);
    }

    auto reranker = [&](const ProviderSettings& p, const char* label) -> std::unique_ptr<Reranker> {
        if (remote(p, cfg)) {
            return std::make_unique<RemoteReranker>(endpoint(p, cfg), label);
        }
        return std::make_unique<LexicalOverlapReranker>(std::string("lexical-overlap-") + label);
    };
    s.reranker_small = reranker(t.reranker_small, "small");
    s.reranker_large = reranker(t.reranker_large, "large");

    if (remote(t.compressor, cfg)) {
        s.compressor = std::make_unique<RemoteCompressor>(endpoint(t.compressor, cfg));
    } else {
        s.compressor = std::make_unique<EmbeddingCompressor>(*s.embedder);
    }

    if (remote(t.chat, cfg)) {
        s.chat = std::make_unique<RemoteChat>(endpoint(t.chat, cfg), t.chat.model.empty() ? "gpt-4o" : t.chat.model);
    } else {
        s.chat = std::make_unique<StubChatProvider>();
    }

    if (remote(t.judge, cfg)) {
        s.judge_chat =
            std::make_unique<RemoteChat>(endpoint(t.judge, cfg), t.judge.model.empty() ? "gpt-4o" : t.judge.model);
        s.judge = std::make_unique<ChatJudge>(*s.judge_chat, cfg.retry);
    } else {
        s.judge = std::make_unique<SubstringJudge>();
    }

    if (remote(t.classifier, cfg)) {
        s.classifier = std::make_unique<RemoteBucketClassifier>(endpoint(t.classifier, cfg));
    } else {
        s.classifier = std::make_unique<KeywordBucketClassifier>(
            cfg.classifier_rules ? BucketRules::from_json_file(*cfg.classifier_rules) : BucketRules::defaults());
    }

    if (remote(t.extractor, cfg)) {
        s.extractor = std::make_unique<RemoteVaccineExtractor>(endpoint(t.extractor, cfg));
    } else {
        s.extractor = std::make_unique<AliasVaccineExtractor>();
    }
    return s;
}

} // namespace vaxrag::service
