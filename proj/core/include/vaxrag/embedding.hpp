#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vaxrag {

using Vector = std::vector<float>;

enum class EmbeddingProviderKind { remote, hashed_stub };

struct EmbeddingConfig {
    EmbeddingProviderKind provider = EmbeddingProviderKind::hashed_stub;
    std::size_t dim = 1536;
    std::string endpoint;
    std::string model = "text-embedding-ada-002";
    std::size_t batch_size = 64;
    /// Name of the environment variable holding the API key (remote only).
    std::string api_key_env = "VAXRAG_EMBEDDING_API_KEY";
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector of length dim() per input text. Throws ProviderError.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;
};

/// Feature-hashing bag of words: every content token adds 1.0 to the bucket
/// picked by its 64-bit FNV-1a hash, and the result is L2-normalised. Text
/// made only of stopwords/punctuation hashes as a single token, so non-empty
/// input never yields a zero vector.
class HashedEmbedder final : public Embedder {
public:
    explicit HashedEmbedder(std::size_t dim = 1536);
    std::vector<Vector> embed(std::span<const std::string> texts) const override;
    std::size_t dim() const override { return dim_; }
    std::string name() const override { return "hashed-stub"; }

    Vector embed_one(std::string_view text) const;

private:
    std::size_t dim_;
};

/// Validates inputs (non-empty texts) and the provider's output shape, then
/// batches according to `batch_size`.
std::vector<Vector> embed_batch(std::span<const std::string> texts, const Embedder& embedder,
                                std::size_t batch_size = 64);

double dot(std::span<const float> u, std::span<const float> v);
double l2_norm(std::span<const float> v);

/// dot(u,v) / (|u| |v|) clamped to [-1, 1]. Throws std::invalid_argument on
/// length mismatch or a zero-norm operand.
double cosine(std::span<const float> u, std::span<const float> v);

} // namespace vaxrag
