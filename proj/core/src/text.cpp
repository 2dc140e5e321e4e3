#include "vaxrag/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>

namespace vaxrag::text {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Non-ASCII bytes count as word characters.
bool is_word_byte(char c) {
    return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80;
}

bool is_mention_char(char c) {
    return is_ascii_alnum(c) || c == '_';
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Tries to decode one entity starting at in[pos] == '&'. Returns the number
// of input bytes consumed, or 0 if there is no decodable entity there.
std::size_t decode_entity_at(std::string_view in, std::size_t pos, std::string& out) {
    const auto semi = in.find(';', pos + 1);
    if (semi == std::string_view::npos || semi - pos > 12) {
        return 0;
    }
    const std::string_view body = in.substr(pos + 1, semi - pos - 1);
    const std::size_t consumed = semi - pos + 1;

    struct Named {
        std::string_view name;
        std::string_view value;
    };
    static constexpr std::array<Named, 6> named{{
        {"amp", "&"},
        {"lt", "<"},
        {"gt", ">"},
        {"quot", "\""},
        {"apos", "'"},
        {"nbsp", " "},
    }};
    for (const auto& n : named) {
        if (body == n.name) {
            out.append(n.value);
            return consumed;
        }
    }

    if (body.size() < 2 || body[0] != '#') {
        return 0;
    }
    const bool hex = body[1] == 'x' || body[1] == 'X';
    const std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) {
        return 0;
    }
    std::uint32_t cp = 0;
    for (char c : digits) {
        int d = -1;
        if (c >= '0' && c <= '9') {
            d = c - '0';
        } else if (hex && c >= 'a' && c <= 'f') {
            d = c - 'a' + 10;
        } else if (hex && c >= 'A' && c <= 'F') {
            d = c - 'A' + 10;
        }
        if (d < 0) {
            return 0;
        }
        cp = cp * (hex ? 16u : 10u) + static_cast<std::uint32_t>(d);
        if (cp > 0x10FFFF) {
            return 0;
        }
    }
    if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) {
        return 0;
    }
    append_utf8(out, cp);
    return consumed;
}

std::string decode_once(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    for (std::size_t i = 0; i < in.size();) {
        if (in[i] == '&') {
            if (const auto n = decode_entity_at(in, i, out); n > 0) {
                i += n;
                continue;
            }
        }
        out.push_back(in[i]);
        ++i;
    }
    return out;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (s.size() - pos < prefix.size()) {
        return false;
    }
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(s[pos + k])) != prefix[k]) {
            return false;
        }
    }
    return true;
}

// Replaces every URL (http://, https://, or a token starting with www.) up to
// the next whitespace, and every @-mention, with a single space.
std::string strip_urls_and_mentions(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const bool token_start = i == 0 || !is_ascii_alnum(in[i - 1]);
        const bool url = starts_with_ci(in, i, "http://") || starts_with_ci(in, i, "https://") ||
                         (token_start && starts_with_ci(in, i, "www."));
        if (url) {
            while (i < in.size() && !is_space(in[i])) {
                ++i;
            }
            out.push_back(' ');
            continue;
        }
        const bool mention_start = i == 0 || !is_mention_char(in[i - 1]);
        if (in[i] == '@' && mention_start && i + 1 < in.size() && is_mention_char(in[i + 1])) {
            ++i;
            while (i < in.size() && is_mention_char(in[i])) {
                ++i;
            }
            out.push_back(' ');
            continue;
        }
        out.push_back(in[i]);
        ++i;
    }
    return out;
}

constexpr std::array<std::string_view, 128> kStopwords{
    "a",      "about",   "above",  "after",   "again",  "against", "all",     "also",
    "am",     "an",      "and",    "any",     "are",    "as",      "at",      "be",
    "because", "been",   "before", "being",   "below",  "between", "both",    "but",
    "by",     "can",     "could",  "did",     "do",     "does",    "doing",   "down",
    "during", "each",    "few",    "for",     "from",   "further", "had",     "has",
    "have",   "having",  "he",     "her",     "here",   "hers",    "him",     "his",
    "how",    "i",       "if",     "in",      "into",   "is",      "it",      "its",
    "just",   "me",      "more",   "most",    "my",     "no",      "nor",     "not",
    "now",    "of",      "off",    "on",      "once",   "only",    "or",      "other",
    "our",    "out",     "over",   "own",     "same",   "she",     "should",  "so",
    "some",   "such",    "than",   "that",    "the",    "their",   "them",    "then",
    "there",  "these",   "they",   "this",    "those",  "through", "to",      "too",
    "under",  "until",   "up",     "very",    "was",    "we",      "were",    "what",
    "when",   "where",   "which",  "while",   "who",    "whom",    "why",     "will",
    "with",   "would",   "you",    "your",    "s",      "t",       "said",    "say",
    "says",   "people",  "tell",   "mention", "mentioned", "discussed", "regarding", "according",
};

} // namespace

std::string decode_html_entities(std::string_view in) {
    std::string cur(in);
    for (;;) {
        std::string next = decode_once(cur);
        // Every successful decode shortens the string, so this terminates.
        if (next == cur) {
            return cur;
        }
        cur = std::move(next);
    }
}

std::string collapse_whitespace(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    for (char c : in) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

std::string preprocess(std::string_view raw) {
    std::string cur = decode_html_entities(raw);
    // Removing a mention can expose a "www." token start, so iterate.
    for (;;) {
        std::string next = strip_urls_and_mentions(cur);
        if (next == cur) {
            break;
        }
        cur = std::move(next);
    }
    return collapse_whitespace(cur);
}

std::vector<std::string> split_sentences(std::string_view in) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        const auto s = trim(in.substr(start, end - start));
        if (!s.empty()) {
            out.push_back(collapse_whitespace(s));
        }
    };
    std::size_t i = 0;
    while (i < in.size()) {
        const char c = in[i];
        if (c == '\n') {
            emit(i);
            start = ++i;
            continue;
        }
        if (c == '.' || c == '!' || c == '?') {
            std::size_t j = i;
            while (j < in.size() && (in[j] == '.' || in[j] == '!' || in[j] == '?')) {
                ++j;
            }
            if (j == in.size() || is_space(in[j])) {
                emit(j);
                start = j;
            }
            i = j;
            continue;
        }
        ++i;
    }
    emit(in.size());
    return out;
}

std::vector<std::string> tokenize(std::string_view in) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const char c = in[i];
        if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if ((c == '\'' || c == '`') && !cur.empty() && i + 1 < in.size() && is_word_byte(in[i + 1])) {
            continue;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

bool is_stopword(std::string_view token) {
    return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view in) {
    auto toks = tokenize(in);
    std::erase_if(toks, [](const std::string& t) { return is_stopword(t); });
    return toks;
}

std::string to_lower(std::string_view in) {
    std::string out(in);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string normalize_for_match(std::string_view in) {
    std::string s = to_lower(collapse_whitespace(in));
    auto is_edge_punct = [](char c) {
        return std::ispunct(static_cast<unsigned char>(c)) != 0;
    };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_edge_punct(s[b])) {
        ++b;
    }
    while (e > b && is_edge_punct(s[e - 1])) {
        --e;
    }
    return std::string(trim(std::string_view(s).substr(b, e - b)));
}

bool contains_word_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) {
        return false;
    }
    const std::string h = to_lower(haystack);
    const std::string n = to_lower(needle);
    for (std::size_t pos = h.find(n); pos != std::string::npos; pos = h.find(n, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_byte(h[pos - 1]);
        const std::size_t end = pos + n.size();
        const bool right_ok = end == h.size() || !is_word_byte(h[end]);
        if (left_ok && right_ok) {
            return true;
        }
    }
    return false;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(sep);
        }
        out.append(parts[i]);
    }
    return out;
}

std::string_view trim(std::string_view in) {
    std::size_t b = 0;
    std::size_t e = in.size();
    while (b < e && is_space(in[b])) {
        ++b;
    }
    while (e > b && is_space(in[e - 1])) {
        --e;
    }
    return in.substr(b, e - b);
}

} // namespace vaxrag::text
