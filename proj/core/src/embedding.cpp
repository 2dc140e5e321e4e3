#include "vaxrag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "vaxrag/error.hpp"
#include "vaxrag/text.hpp"

namespace vaxrag {
namespace {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

HashedEmbedder::HashedEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw std::invalid_argument("embedding dim must be positive");
    }
}

Vector HashedEmbedder::embed_one(std::string_view body) const {
    auto tokens = text::content_tokens(body);
    if (tokens.empty()) {
        const auto trimmed = text::to_lower(text::trim(body));
        if (trimmed.empty()) {
            throw std::invalid_argument("cannot embed empty text");
        }
        tokens.push_back(trimmed);
    }
    Vector v(dim_, 0.0f);
    for (const auto& t : tokens) {
        v[fnv1a64(t) % dim_] += 1.0f;
    }
    const double n = l2_norm(v);
    for (auto& x : v) {
        x = static_cast<float>(x / n);
    }
    return v;
}

std::vector<Vector> HashedEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed_one(t));
    }
    return out;
}

std::vector<Vector> embed_batch(std::span<const std::string> texts, const Embedder& embedder, std::size_t batch_size) {
    for (const auto& t : texts) {
        if (text::trim(t).empty()) {
            throw std::invalid_argument("embed_batch: empty text");
        }
    }
    batch_size = std::max<std::size_t>(1, batch_size);
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size) {
        const auto chunk = texts.subspan(start, std::min(batch_size, texts.size() - start));
        auto vecs = embedder.embed(chunk);
        if (vecs.size() != chunk.size()) {
            throw ProviderError("embedder returned " + std::to_string(vecs.size()) + " vectors for " +
                                    std::to_string(chunk.size()) + " inputs",
                                false);
        }
        for (auto& v : vecs) {
            if (v.size() != embedder.dim()) {
                throw ProviderError("embedder returned vector of length " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(embedder.dim()),
                                    false);
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

double dot(std::span<const float> u, std::span<const float> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    }
    return acc;
}

double l2_norm(std::span<const float> v) {
    return std::sqrt(dot(v, v));
}

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine: length mismatch");
    }
    const double nu = l2_norm(u);
    const double nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0) {
        throw std::invalid_argument("cosine: zero-norm vector");
    }
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

} // namespace vaxrag
