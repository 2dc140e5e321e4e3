#include "vaxrag/stub_chat.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaxrag/answer.hpp"
#include "vaxrag/error.hpp"
#include "vaxrag/evalkit.hpp"
#include "vaxrag/text.hpp"

namespace vaxrag {
namespace {

using nlohmann::json;

std::vector<std::string> lines_of(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

std::string field(const std::vector<std::string>& lines, std::string_view name) {
    const std::string prefix = std::string(name) + ": ";
    for (const auto& l : lines) {
        if (l.starts_with(prefix)) {
            return std::string(text::trim(std::string_view(l).substr(prefix.size())));
        }
    }
    return {};
}

// Lines strictly between the line equal to `header` and the line equal to
// `until` (or the end), joined with newlines and trimmed.
std::string section(const std::vector<std::string>& lines, std::string_view header, std::string_view until = {}) {
    std::string out;
    bool inside = false;
    for (const auto& l : lines) {
        if (!inside) {
            inside = l == header;
            continue;
        }
        if (!until.empty() && l == until) {
            break;
        }
        if (!out.empty()) {
            out.push_back('\n');
        }
        out += l;
    }
    return std::string(text::trim(out));
}

struct ContextDoc {
    std::string id;
    std::string text;
};

// "N. [comment:ID] text"
std::vector<ContextDoc> context_docs(const std::vector<std::string>& lines) {
    std::vector<ContextDoc> out;
    for (const auto& l : lines) {
        std::size_t digits = 0;
        while (digits < l.size() && l[digits] >= '0' && l[digits] <= '9') {
            ++digits;
        }
        constexpr std::string_view kTag = ". [comment:";
        if (digits == 0 || l.compare(digits, kTag.size(), kTag) != 0) {
            continue;
        }
        const auto id_start = digits + kTag.size();
        const auto close = l.find("] ", id_start);
        if (close == std::string::npos) {
            continue;
        }
        out.push_back({l.substr(id_start, close - id_start), l.substr(close + 2)});
    }
    return out;
}

// "[passage:N] text"
std::vector<std::string> passages(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (const auto& l : lines) {
        if (l.starts_with("[passage:")) {
            const auto close = l.find("] ");
            if (close != std::string::npos) {
                out.push_back(l.substr(close + 2));
            }
        }
    }
    return out;
}

std::vector<std::string> distinct_content_words(std::string_view s) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto& t : text::content_tokens(s)) {
        if (seen.insert(t).second) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

struct Sentence {
    std::string text;
    std::string id;
    std::size_t doc = 0;
    std::size_t pos = 0;
    std::size_t overlap = 0;
};

bool mentions_concern(std::string_view s) {
    static const std::vector<std::string> lexicon{
        "worried", "worry",    "worries", "concern",  "concerned", "concerns", "afraid",   "scared",
        "fear",    "pain",     "painful", "sore",     "side",      "reaction", "fever",    "risk",
        "hesitant", "expensive", "cost",  "unsure",   "nervous",   "chills",   "rash",     "sick"};
    const auto toks = text::tokenize(s);
    return std::any_of(toks.begin(), toks.end(), [](const std::string& t) {
        return std::find(lexicon.begin(), lexicon.end(), t) != lexicon.end();
    });
}

std::string extractive_answer(OutputMode mode, const std::vector<std::string>& lines) {
    const auto question = field(lines, "Question");
    const auto docs = context_docs(lines);
    if (docs.empty()) {
        throw ProviderError("stub: prompt carries no context comments", false);
    }
    const auto qwords = distinct_content_words(question);
    const std::set<std::string> qset(qwords.begin(), qwords.end());

    std::vector<std::vector<Sentence>> per_doc;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::vector<Sentence> sents;
        const auto split = text::split_sentences(docs[d].text);
        for (std::size_t p = 0; p < split.size(); ++p) {
            Sentence s{split[p], docs[d].id, d, p, 0};
            for (const auto& w : distinct_content_words(s.text)) {
                s.overlap += qset.contains(w) ? 1 : 0;
            }
            sents.push_back(std::move(s));
        }
        if (!sents.empty()) {
            per_doc.push_back(std::move(sents));
        }
    }
    auto better = [](const Sentence& a, const Sentence& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        if (a.doc != b.doc) return a.doc < b.doc;
        return a.pos < b.pos;
    };
    auto best_of_each_doc = [&](std::size_t limit) {
        std::vector<Sentence> out;
        std::set<std::string> seen;
        for (const auto& sents : per_doc) {
            if (out.size() >= limit) break;
            const auto best = *std::min_element(sents.begin(), sents.end(), better);
            if (seen.insert(text::normalize_for_match(best.text)).second) {
                out.push_back(best);
            }
        }
        return out;
    };

    std::vector<Sentence> picked;
    bool bullets = false;
    switch (mode) {
    case OutputMode::answer_question: {
        std::vector<Sentence> all;
        for (const auto& sents : per_doc) {
            all.insert(all.end(), sents.begin(), sents.end());
        }
        std::stable_sort(all.begin(), all.end(), better);
        for (const auto& s : all) {
            if (picked.size() >= 3 || s.overlap == 0) break;
            picked.push_back(s);
        }
        if (picked.empty()) {
            picked.push_back(per_doc.front().front());
        }
        break;
    }
    case OutputMode::summarise:
        for (const auto& sents : per_doc) {
            if (picked.size() >= 5) break;
            picked.push_back(sents.front());
        }
        break;
    case OutputMode::topics_of_discussion:
        picked = best_of_each_doc(5);
        bullets = true;
        break;
    case OutputMode::public_concerns:
        for (const auto& sents : per_doc) {
            for (const auto& s : sents) {
                if (picked.size() < 5 && mentions_concern(s.text)) {
                    picked.push_back(s);
                }
            }
        }
        if (picked.empty()) {
            picked = best_of_each_doc(5);
        }
        bullets = true;
        break;
    }

    std::string out;
    for (const auto& s : picked) {
        if (!out.empty()) {
            out.push_back('\n');
        }
        if (bullets) {
            out += "- ";
        }
        out += s.text + " [comment:" + s.id + "]";
    }
    return out;
}

std::string question_scaffold(std::string_view mode, std::string_view difficulty, const std::string& words) {
    if (difficulty == "reasoning") {
        return "Why do people mention " + words + "?";
    }
    if (mode == "topics_of_discussion") return "What is discussed regarding " + words + "?";
    if (mode == "summarise") return "What do people say about " + words + "?";
    if (mode == "public_concerns") return "What do people mention regarding " + words + "?";
    return "What is said about " + words + "?";
}

std::string first_content_sentence(std::string_view passage) {
    const auto sents = text::split_sentences(passage);
    for (const auto& s : sents) {
        if (!text::content_tokens(s).empty()) {
            return s;
        }
    }
    return sents.empty() ? std::string(text::trim(passage)) : sents.front();
}

std::string generate_testcase(const std::vector<std::string>& lines) {
    const auto mode = field(lines, "Mode");
    const auto difficulty = field(lines, "Difficulty");
    const auto ps = passages(lines);
    if (ps.empty()) {
        throw ProviderError("stub: no passages", false);
    }
    std::vector<std::string> truth{first_content_sentence(ps[0])};
    auto words = distinct_content_words(truth[0]);
    if (difficulty == "multi_context" && ps.size() > 1) {
        truth.push_back(first_content_sentence(ps[1]));
        words.resize(std::min<std::size_t>(words.size(), 3));
        for (auto& w : distinct_content_words(truth[1])) {
            if (std::find(words.begin(), words.end(), w) == words.end()) {
                words.push_back(std::move(w));
            }
        }
    }
    words.resize(std::min<std::size_t>(words.size(), 6));
    if (words.empty()) {
        words.push_back(text::to_lower(truth[0]));
    }
    return json{{"question", question_scaffold(mode, difficulty, text::join(words, " "))},
                {"ground_truth", text::join(truth, "\n")}}
        .dump();
}

std::string regenerate_questions(const std::vector<std::string>& lines) {
    std::size_t count = 3;
    try {
        count = std::stoul(field(lines, "Count"));
    } catch (const std::exception&) {
    }
    const auto answer = section(lines, "Answer:");
    const auto words = distinct_content_words(strip_citations(answer));
    json questions = json::array();
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::string> window;
        const std::size_t start = words.size() > 6 ? (2 * i) % (words.size() - 5) : 0;
        for (std::size_t k = start; k < words.size() && window.size() < 6; ++k) {
            window.push_back(words[k]);
        }
        questions.push_back(window.empty() ? std::string("What is said?")
                                           : "What is said about " + text::join(window, " ") + "?");
    }
    return json{{"questions", questions}}.dump();
}

} // namespace

std::string StubChatProvider::complete(const ChatRequest& request) const {
    ++calls_;
    const auto lines = lines_of(request.user);
    const auto task = field(lines, "Task");
    if (const auto mode = parse_mode(task)) {
        return extractive_answer(*mode, lines);
    }
    if (task == "generate_testcase") {
        return generate_testcase(lines);
    }
    if (task == "regenerate_questions") {
        return regenerate_questions(lines);
    }
    const SubstringJudge judge;
    if (task == "judge_relevance") {
        const auto truth = section(lines, "Reference answer:", "Passage:");
        const auto ps = passages(lines);
        const bool verdict = !ps.empty() && judge.relevant(ps.front(), truth);
        return json{{"verdict", verdict ? 1 : 0}}.dump();
    }
    if (task == "judge_attribution") {
        const auto statement = section(lines, "Statement:", "Passages:");
        const auto ps = passages(lines);
        return json{{"verdict", judge.attributable(statement, ps) ? 1 : 0}}.dump();
    }
    if (task == "judge_claims") {
        return json{{"claims", judge.claims(section(lines, "Answer:"))}}.dump();
    }
    throw ProviderError("stub chat: unsupported task '" + task + "'", false);
}

} // namespace vaxrag
