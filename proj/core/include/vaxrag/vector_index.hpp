#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vaxrag/embedding.hpp"

namespace vaxrag {

struct IndexedChunk {
    std::string comment_id;
    Vector vector;
    double norm = 0.0;
    std::string text;
};

struct SearchHit {
    std::string comment_id;
    double score = 0.0;
    std::size_t rank = 0; // 1-based
};

/// Number of hits returned for `k_percent` of `n` chunks: ceil(n * k / 100),
/// at least 1 for non-empty indexes, never more than n. Throws
/// std::invalid_argument when k_percent is outside (0, 100].
std::size_t top_percent_count(std::size_t n, double k_percent);

/// Exhaustive cosine index keyed by comment id.
///
/// Thread-safety: any number of concurrent searches, or one writer
/// (upsert/clear); writers take the lock exclusively.
class VectorIndex {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    explicit VectorIndex(std::size_t dim);
    VectorIndex(const VectorIndex& other);
    VectorIndex& operator=(const VectorIndex& other);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    /// Inserts or replaces by comment id. Throws std::invalid_argument on a
    /// dimension mismatch or a zero vector.
    void upsert(std::string comment_id, Vector vector, std::string text);

    std::optional<IndexedChunk> get(const std::string& comment_id) const;

    /// Top ceil(N * k_percent / 100) chunks by cosine score, sorted by score
    /// descending then comment id ascending. Throws std::invalid_argument on
    /// an empty index, a dimension mismatch or k_percent outside (0, 100].
    std::vector<SearchHit> search_top_percent(std::span<const float> query, double k_percent) const;

    /// Top `k` by the same ordering.
    std::vector<SearchHit> search_top_k(std::span<const float> query, std::size_t k) const;

    /// Snapshot of all chunks in insertion order.
    std::vector<IndexedChunk> chunks() const;

    /// Binary layout (little-endian):
    ///   magic "VXRGIDX\0" | u32 version | u32 dim | u64 count
    ///   count x { u32 id_len, id bytes, u32 text_len, text bytes }
    ///   count x dim float32
    void persist(std::ostream& out) const;
    void persist(const std::filesystem::path& path) const;

    /// Throws IndexFormatError (with byte offset) on a corrupt or truncated
    /// file, and Error on a dimension mismatch with `expected_dim`.
    static VectorIndex restore(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt);
    static VectorIndex restore(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt);

private:
    std::size_t dim_;
    std::vector<IndexedChunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
    mutable std::shared_mutex mutex_;
};

} // namespace vaxrag
