#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <semaphore>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vaxrag/answer.hpp"
#include "vaxrag/corpus.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/service/config.hpp"
#include "vaxrag/service/providers.hpp"
#include "vaxrag/vector_index.hpp"

namespace vaxrag::service {

/// Raised when no pipeline slot frees up within the request timeout.
class Overloaded : public Error {
public:
    using Error::Error;
};

struct ConcurrencyStats {
    std::size_t in_flight = 0;
    std::size_t max_observed = 0;
    std::size_t completed = 0;
};

/// Corpus, index and providers behind one reader-writer lock. Queries and
/// evaluations are readers; ingest and index rebuilds are writers. At most
/// `max_concurrent_pipelines` queries/evaluations run at once.
class Engine {
public:
    explicit Engine(ServiceConfig cfg);
    Engine(ServiceConfig cfg, ProviderSet providers);

    const ServiceConfig& config() const { return cfg_; }
    const ProviderSet& providers() const { return providers_; }

    /// Loads the configured corpus and index. A missing or unreadable index
    /// is rebuilt from the corpus; a missing corpus leaves the engine empty.
    void boot();

    /// load -> preprocess -> classify -> segregate, without touching state.
    Corpus build_corpus(const std::filesystem::path& posts, const std::string& vaccine) const;

    /// build_corpus, then merges the comments into the state, indexes the
    /// vaccine-specific ones and persists corpus and index.
    IngestReport ingest(const std::filesystem::path& posts, std::optional<std::string> vaccine = std::nullopt);

    /// Replaces the state with `comments` and embeds the vaccine-specific ones.
    void load_comments(std::vector<Comment> comments);
    /// Writes the index and corpus to the configured paths.
    void persist() const;
    void persist_index() const;

    QueryOutcome query(const QueryRequest& request);
    EvalReport evaluate(std::span<const TestCase> cases);
    TestGenResult generate_testcases(const TestGenOptions& opts) const;

    std::size_t index_size() const;
    std::vector<Comment> comments() const;
    std::optional<Comment> comment(const std::string& id) const;
    ConcurrencyStats stats() const;

private:
    class Slot;
    RagPipeline pipeline() const;
    void index_locked(std::span<const Comment> comments);

    ServiceConfig cfg_;
    ProviderSet providers_;

    mutable std::shared_mutex state_mutex_;
    VectorIndex index_;
    std::vector<Comment> comments_;
    std::unordered_map<std::string, std::size_t> by_id_;

    std::counting_semaphore<1024> slots_;
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> max_observed_{0};
    std::atomic<std::size_t> completed_{0};
};

} // namespace vaxrag::service
