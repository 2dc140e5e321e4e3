#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>

#include <unistd.h>
#include <string>
#include <vector>

#include "vaxrag/corpus.hpp"
#include "vaxrag/error.hpp"
#include "vaxrag/prompt.hpp"
#include "vaxrag/retrieval.hpp"

namespace vaxrag::testing {

inline std::filesystem::path data_dir() { return VAXRAG_DATA_DIR; }

/// Fresh directory under the build tree, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::path(VAXRAG_TEST_TMP) /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline RankedDoc doc(std::string id, std::string text = {}, double score = 0.0) {
    RankedDoc d;
    d.comment_id = std::move(id);
    d.text = text.empty() ? d.comment_id : std::move(text);
    d.retrieval_score = score;
    return d;
}

inline std::vector<std::string> ids_of(const std::vector<RankedDoc>& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs) out.push_back(d.comment_id);
    return out;
}

/// Returns fixed scores (or a function of the passage) and counts calls.
class ScriptedReranker final : public Reranker {
public:
    using Fn = std::function<double(const std::string&)>;
    explicit ScriptedReranker(Fn fn, std::string label = "scripted") : fn_(std::move(fn)), label_(std::move(label)) {}
    std::vector<double> score(std::string_view, std::span<const std::string> passages) const override {
        ++calls;
        if (fail) throw ProviderError("scripted reranker outage", retryable);
        std::vector<double> out;
        for (const auto& p : passages) out.push_back(fn_(p));
        return out;
    }
    std::string name() const override { return label_; }

    mutable std::atomic<int> calls{0};
    bool fail = false;
    bool retryable = false;

private:
    Fn fn_;
    std::string label_;
};

/// Keeps sentences whose scripted score clears the threshold.
class ScriptedCompressor final : public Compressor {
public:
    std::map<std::string, double> sentence_scores;
    std::set<std::string> failing_passages;

    std::vector<std::string> compress(std::string_view, std::string_view passage, double threshold) const override;
    std::string name() const override { return "scripted-compressor"; }
};

/// Replies with a fixed completion and records the prompts it saw.
class ScriptedChat final : public ChatProvider {
public:
    explicit ScriptedChat(std::string reply) : reply_(std::move(reply)) {}
    std::string complete(const ChatRequest& r) const override {
        ++calls;
        last_user = r.user;
        if (fail_times > 0) {
            --fail_times;
            throw ProviderError("scripted chat outage", true);
        }
        return reply_;
    }
    std::string model_id() const override { return "scripted"; }

    mutable std::atomic<int> calls{0};
    mutable int fail_times = 0;
    mutable std::string last_user;

private:
    std::string reply_;
};

class ThrowingClassifier final : public BucketClassifier {
public:
    Bucket classify(std::string_view) const override {
        ++calls;
        throw ProviderError("classifier down", true);
    }
    std::string name() const override { return "throwing"; }
    mutable std::atomic<int> calls{0};
};

class SelectiveExtractor final : public VaccineExtractor {
public:
    std::string fail_on;
    bool concerns(std::string_view text, std::string_view vaccine) const override {
        if (!fail_on.empty() && text.find(fail_on) != std::string_view::npos) {
            throw ProviderError("extractor down", false);
        }
        return inner.concerns(text, vaccine);
    }
    std::string name() const override { return "selective"; }
    AliasVaccineExtractor inner;
};

inline RetryPolicy no_backoff(int attempts = 3) { return RetryPolicy{attempts, std::chrono::milliseconds(0), 2.0}; }

} // namespace vaxrag::testing
