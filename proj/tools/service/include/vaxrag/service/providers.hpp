#pragma once

#include <memory>

#include "vaxrag/corpus.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/prompt.hpp"
#include "vaxrag/retrieval.hpp"
#include "vaxrag/service/config.hpp"

namespace vaxrag::service {

/// Owns one instance of every provider the service needs, each stub or
/// remote according to the config.
struct ProviderSet {
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Reranker> reranker_small;
    std::unique_ptr<Reranker> reranker_large;
    std::unique_ptr<Compressor> compressor;
    std::unique_ptr<ChatProvider> chat;
    /// Backs the judge in remote mode; null with the substring judge.
    std::unique_ptr<ChatProvider> judge_chat;
    std::unique_ptr<RelevanceJudge> judge;
    std::unique_ptr<BucketClassifier> classifier;
    std::unique_ptr<VaccineExtractor> extractor;

    PipelineProviders pipeline() const {
        return {*embedder, *reranker_small, *reranker_large, *compressor};
    }
};

ProviderSet make_providers(const ServiceConfig& cfg);

} // namespace vaxrag::service
