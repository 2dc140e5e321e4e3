#pragma once

#include <string>
#include <string_view>
#include <vector>

// Text utilities shared by ingestion, the stub providers and the judges.
// All functions operate on UTF-8 bytes; non-ASCII bytes are treated as
// word characters so emoji and accented words survive tokenisation.
namespace vaxrag::text {

/// Cleans a raw post: decodes HTML entities, strips URLs and @-mentions,
/// collapses whitespace. Idempotent. May return an empty string.
std::string preprocess(std::string_view raw);

/// Decodes named (&amp; &lt; &gt; &quot; &apos; &nbsp;) and numeric
/// entities repeatedly until no entity remains decodable.
std::string decode_html_entities(std::string_view in);

std::string collapse_whitespace(std::string_view in);

/// Splits on runs of . ! ? followed by whitespace (or end of text) and on
/// newlines. Sentences are trimmed and keep their terminal punctuation.
std::vector<std::string> split_sentences(std::string_view in);

/// Lowercased word tokens. Apostrophes inside words are dropped ("don't" -> "dont").
std::vector<std::string> tokenize(std::string_view in);

/// tokenize() minus stopwords.
std::vector<std::string> content_tokens(std::string_view in);

bool is_stopword(std::string_view token);

std::string to_lower(std::string_view in);

/// Lowercase, collapse whitespace, strip leading/trailing punctuation.
/// Used by the substring judge for containment checks.
std::string normalize_for_match(std::string_view in);

/// True if `needle` occurs in `haystack` as a whole-word, case-insensitive match.
bool contains_word_ci(std::string_view haystack, std::string_view needle);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view in);

} // namespace vaxrag::text
