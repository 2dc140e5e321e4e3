#include "helpers.hpp"

#include "vaxrag/text.hpp"

namespace vaxrag::testing {

std::vector<std::string> ScriptedCompressor::compress(std::string_view, std::string_view passage,
                                                      double threshold) const {
    if (failing_passages.contains(std::string(passage))) {
        throw ProviderError("scripted compressor outage", false);
    }
    std::vector<std::string> kept;
    for (const auto& s : text::split_sentences(passage)) {
        const auto it = sentence_scores.find(s);
        const double score = it == sentence_scores.end() ? 1.0 : it->second;
        if (score >= threshold) kept.push_back(s);
    }
    return kept;
}

} // namespace vaxrag::testing
