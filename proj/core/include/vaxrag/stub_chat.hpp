#pragma once

#include <atomic>
#include <cstddef>
#include <string>

#include "vaxrag/prompt.hpp"

namespace vaxrag {

/// Deterministic offline chat model. It reads the shipped prompt formats the
/// way a remote model would (the "Task:" line selects the behaviour):
///
///  - answer tasks (one per output mode): extractive; every output line is a
///    context sentence copied verbatim plus its [comment:id] tag;
///  - generate_testcase: a question built from the first passage's content
///    words around fixed stopword scaffolding, and a reference answer made of
///    passage sentences;
///  - regenerate_questions: questions built from the answer's content words;
///  - judge_*: verdicts and claims computed with the substring judge.
///
/// An unrecognised task raises a non-retryable ProviderError.
class StubChatProvider final : public ChatProvider {
public:
    std::string complete(const ChatRequest& request) const override;
    std::string model_id() const override { return "extractive-stub"; }

    std::size_t calls() const { return calls_.load(); }

private:
    mutable std::atomic<std::size_t> calls_{0};
};

} // namespace vaxrag
