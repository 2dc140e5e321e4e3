#include "vaxrag/service/engine.hpp"

#include <mutex>

#include "vaxrag/error.hpp"
#include "vaxrag/service/log.hpp"

namespace vaxrag::service {

// RAII pipeline slot with a high-water mark for the load-test counter.
class Engine::Slot {
public:
    explicit Slot(Engine& e) : e_(e) {
        if (!e_.slots_.try_acquire_for(e_.cfg_.request_timeout)) {
            throw Overloaded("all " + std::to_string(e_.cfg_.max_concurrent_pipelines) +
                             " pipeline slots are busy");
        }
        const auto now = e_.in_flight_.fetch_add(1) + 1;
        auto seen = e_.max_observed_.load();
        while (now > seen && !e_.max_observed_.compare_exchange_weak(seen, now)) {
        }
    }
    ~Slot() {
        e_.in_flight_.fetch_sub(1);
        e_.completed_.fetch_add(1);
        e_.slots_.release();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Engine& e_;
};

Engine::Engine(ServiceConfig cfg) : Engine(cfg, make_providers(cfg)) {}

Engine::Engine(ServiceConfig cfg, ProviderSet providers)
    : cfg_(std::move(cfg)),
      providers_(std::move(providers)),
      index_(cfg_.embedding_dim),
      slots_(static_cast<std::ptrdiff_t>(cfg_.max_concurrent_pipelines)) {
    cfg_.validate();
    if (providers_.embedder->dim() != cfg_.embedding_dim) {
        throw ConfigError("embedder dimension does not match embedding.dim");
    }
}

void Engine::boot() {
    std::vector<Comment> comments;
    if (std::filesystem::exists(cfg_.corpus_path)) {
        comments = read_corpus_jsonl(cfg_.corpus_path);
    }
    std::optional<VectorIndex> restored;
    if (std::filesystem::exists(cfg_.index_path)) {
        try {
            restored = VectorIndex::restore(cfg_.index_path, cfg_.embedding_dim);
        } catch (const Error& e) {
            log_event(LogLevel::warn, "index_restore_failed",
                      {{"path", cfg_.index_path.string()}, {"error", e.what()}, {"action", "rebuild from corpus"}});
        }
    }
    std::unique_lock lock(state_mutex_);
    comments_ = std::move(comments);
    by_id_.clear();
    for (std::size_t i = 0; i < comments_.size(); ++i) {
        by_id_[comments_[i].id] = i;
    }
    if (restored) {
        index_ = std::move(*restored);
    } else {
        index_ = VectorIndex(cfg_.embedding_dim);
        index_locked(comments_);
    }
    log_event(LogLevel::info, "engine_ready",
              {{"comments", comments_.size()}, {"index_size", index_.size()}, {"index_restored", restored.has_value()}});
}

Corpus Engine::build_corpus(const std::filesystem::path& posts, const std::string& vaccine) const {
    const auto loaded = load_posts(posts);
    IngestOptions opts;
    opts.vaccine = vaccine;
    opts.fan_out = FanOutOptions{cfg_.max_in_flight_provider_calls, cfg_.retry};
    return vaxrag::build_corpus(loaded, *providers_.classifier, *providers_.extractor, opts);
}

void Engine::index_locked(std::span<const Comment> comments) {
    std::vector<const Comment*> todo;
    for (const auto& c : comments) {
        if (!c.vaccine_tags.empty()) {
            todo.push_back(&c);
        }
    }
    if (todo.empty()) {
        return;
    }
    std::vector<std::string> texts;
    texts.reserve(todo.size());
    for (const auto* c : todo) {
        texts.push_back(c->text);
    }
    auto vectors = embed_batch(texts, *providers_.embedder, cfg_.embedding_batch_size);
    for (std::size_t i = 0; i < todo.size(); ++i) {
        index_.upsert(todo[i]->id, std::move(vectors[i]), todo[i]->text);
    }
}

IngestReport Engine::ingest(const std::filesystem::path& posts, std::optional<std::string> vaccine) {
    auto corpus = build_corpus(posts, vaccine.value_or(cfg_.vaccine));
    {
        std::unique_lock lock(state_mutex_);
        for (auto& c : corpus.comments) {
            if (const auto it = by_id_.find(c.id); it != by_id_.end()) {
                auto& existing = comments_[it->second];
                c.vaccine_tags.insert(existing.vaccine_tags.begin(), existing.vaccine_tags.end());
                existing = c;
            } else {
                by_id_[c.id] = comments_.size();
                comments_.push_back(c);
            }
        }
        index_locked(corpus.comments);
    }
    persist();
    log_event(LogLevel::info, "ingest_done",
              {{"path", posts.string()},
               {"loaded", corpus.report.total_loaded},
               {"vaccine_specific", corpus.report.vaccine_specific_count},
               {"index_size", index_size()}});
    return corpus.report;
}

void Engine::load_comments(std::vector<Comment> comments) {
    std::unique_lock lock(state_mutex_);
    comments_ = std::move(comments);
    by_id_.clear();
    for (std::size_t i = 0; i < comments_.size(); ++i) {
        by_id_[comments_[i].id] = i;
    }
    index_ = VectorIndex(cfg_.embedding_dim);
    index_locked(comments_);
}

void Engine::persist() const {
    persist_index();
    std::shared_lock lock(state_mutex_);
    if (const auto dir = cfg_.corpus_path.parent_path(); !dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    write_corpus_jsonl(cfg_.corpus_path, comments_);
}

void Engine::persist_index() const {
    std::shared_lock lock(state_mutex_);
    if (const auto dir = cfg_.index_path.parent_path(); !dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    index_.persist(cfg_.index_path);
}

RagPipeline Engine::pipeline() const {
    PipelineOptions popts;
    popts.fan_out = FanOutOptions{cfg_.max_in_flight_provider_calls, cfg_.retry};
    popts.record_timings = !cfg_.deterministic;
    AnswerOptions aopts;
    aopts.retry = cfg_.retry;
    if (cfg_.deterministic) {
        aopts.clock = [] { return Timestamp{}; };
    }
    // Called with state_mutex_ held shared by the caller.
    auto has_tag = [this](const std::string& id, const std::string& vaccine) {
        const auto it = by_id_.find(id);
        return it != by_id_.end() && comments_[it->second].vaccine_tags.contains(vaccine);
    };
    return RagPipeline{index_, providers_.pipeline(), *providers_.chat, cfg_.retrieval, popts, aopts, has_tag};
}

QueryOutcome Engine::query(const QueryRequest& request) {
    Slot slot(*this);
    std::shared_lock lock(state_mutex_);
    return answer_query(request, pipeline());
}

EvalReport Engine::evaluate(std::span<const TestCase> cases) {
    Slot slot(*this);
    std::shared_lock lock(state_mutex_);
    const auto rag = pipeline();
    const EvalComponents components{rag,
                                    *providers_.judge,
                                    *providers_.chat,
                                    *providers_.embedder,
                                    cfg_.relevancy_questions,
                                    cfg_.max_in_flight_provider_calls};
    return run_eval(components, cases);
}

TestGenResult Engine::generate_testcases(const TestGenOptions& opts) const {
    std::shared_lock lock(state_mutex_);
    return vaxrag::generate_testcases(vaccine_specific(comments_), opts, *providers_.chat);
}

std::size_t Engine::index_size() const {
    std::shared_lock lock(state_mutex_);
    return index_.size();
}

std::vector<Comment> Engine::comments() const {
    std::shared_lock lock(state_mutex_);
    return comments_;
}

std::optional<Comment> Engine::comment(const std::string& id) const {
    std::shared_lock lock(state_mutex_);
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return comments_[it->second];
}

ConcurrencyStats Engine::stats() const {
    return {in_flight_.load(), max_observed_.load(), completed_.load()};
}

} // namespace vaxrag::service
