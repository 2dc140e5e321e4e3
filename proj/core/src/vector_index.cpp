#include "vaxrag/vector_index.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "vaxrag/error.hpp"

namespace vaxrag {
namespace {

constexpr std::array<char, 8> kMagic{'V', 'X', 'R', 'G', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kMaxStringBytes = 64u << 20;

bool hit_before(const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.comment_id < b.comment_id;
}

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    }
    out.write(buf.data(), buf.size());
}

void put_string(std::ostream& out, const std::string& s) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint64_t offset() const { return offset_; }

    void bytes(char* dst, std::size_t n, const char* what) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw IndexFormatError(std::string("truncated index file while reading ") + what,
                                   offset_ + static_cast<std::uint64_t>(in_.gcount()));
        }
        offset_ += n;
    }

    template <typename T>
    T le(const char* what) {
        std::array<unsigned char, sizeof(T)> buf{};
        bytes(reinterpret_cast<char*>(buf.data()), buf.size(), what);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        }
        return static_cast<T>(v);
    }

    std::string str(const char* what) {
        const auto at = offset_;
        const auto len = le<std::uint32_t>(what);
        if (len > kMaxStringBytes) {
            throw IndexFormatError(std::string("implausible ") + what + " length", at);
        }
        std::string s(len, '\0');
        bytes(s.data(), len, what);
        return s;
    }

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

} // namespace

std::size_t top_percent_count(std::size_t n, double k_percent) {
    if (!(k_percent > 0.0 && k_percent <= 100.0)) {
        throw std::invalid_argument("k_percent must be in (0, 100]");
    }
    if (n == 0) {
        return 0;
    }
    // The epsilon absorbs representation error such as 1000 * 0.7 / 100 = 7.000000000000001.
    const double exact = static_cast<double>(n) * k_percent / 100.0;
    const auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::clamp<std::size_t>(count, 1, n);
}

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw std::invalid_argument("index dim must be positive");
    }
}

VectorIndex::VectorIndex(const VectorIndex& other) : dim_(other.dim_) {
    std::shared_lock lock(other.mutex_);
    chunks_ = other.chunks_;
    by_id_ = other.by_id_;
}

VectorIndex& VectorIndex::operator=(const VectorIndex& other) {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        dim_ = other.dim_;
        chunks_ = other.chunks_;
        by_id_ = other.by_id_;
    }
    return *this;
}

std::size_t VectorIndex::size() const {
    std::shared_lock lock(mutex_);
    return chunks_.size();
}

void VectorIndex::upsert(std::string comment_id, Vector vector, std::string text) {
    if (comment_id.empty()) {
        throw std::invalid_argument("upsert: empty comment id");
    }
    if (vector.size() != dim_) {
        throw std::invalid_argument("upsert: vector length " + std::to_string(vector.size()) +
                                    " does not match index dim " + std::to_string(dim_));
    }
    const double norm = l2_norm(vector);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::invalid_argument("upsert: vector norm must be positive and finite");
    }
    std::unique_lock lock(mutex_);
    if (const auto it = by_id_.find(comment_id); it != by_id_.end()) {
        auto& chunk = chunks_[it->second];
        chunk.vector = std::move(vector);
        chunk.norm = norm;
        chunk.text = std::move(text);
        return;
    }
    by_id_.emplace(comment_id, chunks_.size());
    chunks_.push_back(IndexedChunk{std::move(comment_id), std::move(vector), norm, std::move(text)});
}

std::optional<IndexedChunk> VectorIndex::get(const std::string& comment_id) const {
    std::shared_lock lock(mutex_);
    if (const auto it = by_id_.find(comment_id); it != by_id_.end()) {
        return chunks_[it->second];
    }
    return std::nullopt;
}

std::vector<SearchHit> VectorIndex::search_top_percent(std::span<const float> query, double k_percent) const {
    if (!(k_percent > 0.0 && k_percent <= 100.0)) {
        throw std::invalid_argument("k_percent must be in (0, 100]");
    }
    std::shared_lock lock(mutex_);
    if (chunks_.empty()) {
        throw std::invalid_argument("search on empty index");
    }
    const auto k = top_percent_count(chunks_.size(), k_percent);
    lock.unlock();
    return search_top_k(query, k);
}

std::vector<SearchHit> VectorIndex::search_top_k(std::span<const float> query, std::size_t k) const {
    if (query.size() != dim_) {
        throw std::invalid_argument("query dimension " + std::to_string(query.size()) + " does not match index dim " +
                                    std::to_string(dim_));
    }
    const double qnorm = l2_norm(query);
    if (!(qnorm > 0.0)) {
        throw std::invalid_argument("query vector has zero norm");
    }
    std::shared_lock lock(mutex_);
    if (chunks_.empty()) {
        throw std::invalid_argument("search on empty index");
    }
    std::vector<SearchHit> hits;
    hits.reserve(chunks_.size());
    for (const auto& c : chunks_) {
        const double s = std::clamp(dot(query, c.vector) / (qnorm * c.norm), -1.0, 1.0);
        hits.push_back(SearchHit{c.comment_id, s, 0});
    }
    lock.unlock();

    k = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_before);
    hits.resize(k);
    for (std::size_t i = 0; i < hits.size(); ++i) {
        hits[i].rank = i + 1;
    }
    return hits;
}

std::vector<IndexedChunk> VectorIndex::chunks() const {
    std::shared_lock lock(mutex_);
    return chunks_;
}

void VectorIndex::persist(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put_le<std::uint64_t>(out, chunks_.size());
    for (const auto& c : chunks_) {
        put_string(out, c.comment_id);
        put_string(out, c.text);
    }
    for (const auto& c : chunks_) {
        for (float x : c.vector) {
            put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
        }
    }
    if (!out) {
        throw Error("failed writing index");
    }
}

void VectorIndex::persist(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write index file: " + path.string());
    }
    persist(out);
}

VectorIndex VectorIndex::restore(std::istream& in, std::optional<std::size_t> expected_dim) {
    Reader r(in);
    std::array<char, 8> magic{};
    r.bytes(magic.data(), magic.size(), "magic");
    if (magic != kMagic) {
        throw IndexFormatError("bad magic bytes; not a vaxrag index file", 0);
    }
    const auto version_at = r.offset();
    const auto version = r.le<std::uint32_t>("version");
    if (version != kFormatVersion) {
        throw IndexFormatError("unsupported index format version " + std::to_string(version), version_at);
    }
    const auto dim_at = r.offset();
    const auto dim = r.le<std::uint32_t>("dim");
    if (dim == 0) {
        throw IndexFormatError("zero dimension", dim_at);
    }
    if (expected_dim && *expected_dim != dim) {
        throw Error("index dim " + std::to_string(dim) + " does not match configured dim " +
                    std::to_string(*expected_dim));
    }
    const auto count = r.le<std::uint64_t>("count");

    VectorIndex index(dim);
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto at = r.offset();
        auto id = r.str("id");
        auto body = r.str("text");
        if (id.empty()) {
            throw IndexFormatError("empty comment id", at);
        }
        if (index.by_id_.contains(id)) {
            throw IndexFormatError("duplicate comment id " + id, at);
        }
        index.by_id_.emplace(id, static_cast<std::size_t>(i));
        entries.emplace_back(std::move(id), std::move(body));
    }
    index.chunks_.reserve(entries.size());
    for (auto& [id, body] : entries) {
        const auto at = r.offset();
        Vector v(dim);
        for (auto& x : v) {
            x = std::bit_cast<float>(r.le<std::uint32_t>("vector"));
        }
        const double norm = l2_norm(v);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw IndexFormatError("invalid vector for " + id, at);
        }
        index.chunks_.push_back(IndexedChunk{std::move(id), std::move(v), norm, std::move(body)});
    }
    return index;
}

VectorIndex VectorIndex::restore(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open index file: " + path.string());
    }
    return restore(in, expected_dim);
}

} // namespace vaxrag
