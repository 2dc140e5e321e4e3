#include "vaxrag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "vaxrag/error.hpp"
#include "vaxrag/json.hpp"
#include "vaxrag/text.hpp"

namespace vaxrag {

using nlohmann::json;

std::string_view to_string(Platform p) {
    switch (p) {
    case Platform::x: return "x";
    case Platform::reddit: return "reddit";
    case Platform::youtube: return "youtube";
    case Platform::facebook: return "facebook";
    case Platform::other: return "other";
    }
    return "other";
}

std::string_view to_string(Bucket b) {
    switch (b) {
    case Bucket::vaccine: return "vaccine";
    case Bucket::personal_health: return "personal_health";
    case Bucket::other: return "other";
    }
    return "other";
}

Platform parse_platform(std::string_view s) {
    const auto lower = text::to_lower(s);
    if (lower == "x" || lower == "twitter") return Platform::x;
    if (lower == "reddit") return Platform::reddit;
    if (lower == "youtube") return Platform::youtube;
    if (lower == "facebook") return Platform::facebook;
    return Platform::other;
}

std::optional<Bucket> parse_bucket(std::string_view s) {
    if (s == "vaccine") return Bucket::vaccine;
    if (s == "personal_health") return Bucket::personal_health;
    if (s == "other") return Bucket::other;
    return std::nullopt;
}

LoadResult parse_posts(std::istream& in) {
    LoadResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    auto warn = [&](std::string msg) { result.warnings.push_back({line_no, std::move(msg)}); };

    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            warn("not valid JSON");
            continue;
        }
        if (!obj.is_object()) {
            warn("not a JSON object");
            continue;
        }
        const auto id_it = obj.find("id");
        std::string id;
        if (id_it != obj.end() && id_it->is_string()) {
            id = id_it->get<std::string>();
        } else if (id_it != obj.end() && id_it->is_number_integer()) {
            id = id_it->dump();
        }
        if (id.empty()) {
            warn("missing or empty `id`");
            continue;
        }
        const auto text_it = obj.find("text");
        if (text_it == obj.end() || !text_it->is_string()) {
            warn("missing `text`");
            continue;
        }
        RawPost post;
        post.id = std::move(id);
        post.text = text_it->get<std::string>();
        if (const auto p = obj.find("platform"); p != obj.end() && p->is_string()) {
            post.platform = parse_platform(p->get_ref<const std::string&>());
        }
        const auto ts = obj.find("created_at");
        if (ts == obj.end() || !ts->is_string()) {
            warn("missing `created_at` for id " + post.id);
            continue;
        }
        const auto parsed = parse_iso8601(ts->get_ref<const std::string&>());
        if (!parsed) {
            warn("unparseable `created_at` for id " + post.id);
            continue;
        }
        post.created_at = *parsed;
        if (const auto a = obj.find("author_hash"); a != obj.end() && a->is_string()) {
            post.author_hash = a->get<std::string>();
        }
        if (!seen.insert(post.id).second) {
            warn("duplicate id " + post.id);
            continue;
        }
        result.posts.push_back(std::move(post));
    }
    return result;
}

LoadResult load_posts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open posts file: " + path.string());
    }
    return parse_posts(in);
}

BucketRules BucketRules::defaults() {
    BucketRules r;
    r.vaccine_terms = {"vaccine",   "vaccines",  "vaccinated", "vaccination", "vaccinations", "vax",
                       "jab",       "jabs",      "shot",       "shots",       "dose",         "doses",
                       "booster",   "immunisation", "immunization", "shingrix", "zostavax",    "shingles",
                       "zoster",    "flu shot",  "pharmacist", "pharmacy",    "clinic"};
    r.personal_markers = {"i", "me", "my", "mine", "myself", "im", "ive", "id", "ill"};
    r.health_terms = {"sore",  "pain",   "fever",  "rash",    "headache", "tired",    "fatigue",
                      "chills", "nausea", "swollen", "ache",   "aches",    "sick",     "hospital",
                      "doctor", "gp",     "blister", "itchy",  "reaction", "symptoms", "arm"};
    return r;
}

BucketRules BucketRules::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open bucket rules: " + path.string());
    }
    try {
        const json j = json::parse(in);
        BucketRules r;
        r.vaccine_terms = j.at("vaccine_terms").get<std::vector<std::string>>();
        r.personal_markers = j.at("personal_markers").get<std::vector<std::string>>();
        r.health_terms = j.value("health_terms", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw ConfigError("invalid bucket rules " + path.string() + ": " + e.what());
    }
}

KeywordBucketClassifier::KeywordBucketClassifier(BucketRules rules) : rules_(std::move(rules)) {}

Bucket KeywordBucketClassifier::classify(std::string_view body) const {
    auto any = [&](const std::vector<std::string>& terms) {
        return std::any_of(terms.begin(), terms.end(),
                           [&](const std::string& t) { return text::contains_word_ci(body, t); });
    };
    // Personal markers are matched on tokens so "I'm" and "I've" hit "im"/"ive".
    const auto toks = text::tokenize(body);
    const bool personal = std::any_of(toks.begin(), toks.end(), [&](const std::string& t) {
        return std::find(rules_.personal_markers.begin(), rules_.personal_markers.end(), t) !=
               rules_.personal_markers.end();
    });
    const bool vaccine = any(rules_.vaccine_terms);
    if (personal && (vaccine || any(rules_.health_terms))) {
        return Bucket::personal_health;
    }
    return vaccine ? Bucket::vaccine : Bucket::other;
}

AliasVaccineExtractor::AliasVaccineExtractor(AliasTable aliases) : aliases_(std::move(aliases)) {}

AliasVaccineExtractor::AliasTable AliasVaccineExtractor::default_aliases() {
    return {
        {"shingrix", {"recombinant zoster vaccine", "rzv"}},
        {"zostavax", {"zoster vaccine live", "zvl"}},
        {"gardasil", {"hpv vaccine"}},
        {"comirnaty", {"pfizer covid vaccine"}},
    };
}

bool AliasVaccineExtractor::concerns(std::string_view body, std::string_view vaccine) const {
    const auto name = text::to_lower(vaccine);
    if (text::contains_word_ci(body, name)) {
        return true;
    }
    if (const auto it = aliases_.find(name); it != aliases_.end()) {
        for (const auto& alias : it->second) {
            if (text::contains_word_ci(body, alias)) {
                return true;
            }
        }
    }
    return false;
}

Bucket classify_bucket(std::string_view comment_text, const BucketClassifier& classifier) {
    if (text::trim(comment_text).empty()) {
        throw std::invalid_argument("classify_bucket: empty comment text");
    }
    return classifier.classify(comment_text);
}

SegregationResult segregate_vaccine_specific(std::span<const Comment> comments, std::string_view vaccine_name,
                                             const VaccineExtractor& extractor, const FanOutOptions& opts) {
    const auto tag = text::to_lower(text::trim(vaccine_name));
    if (tag.empty()) {
        throw std::invalid_argument("segregate_vaccine_specific: empty vaccine name");
    }
    enum class Verdict { skip, keep, failed };
    const auto verdicts = parallel_map(comments.size(), opts.max_in_flight, [&](std::size_t i) {
        const auto& c = comments[i];
        if (c.bucket == Bucket::other) {
            return Verdict::skip;
        }
        try {
            const bool hit = with_retry(opts.retry, [&] { return extractor.concerns(c.text, tag); });
            return hit ? Verdict::keep : Verdict::skip;
        } catch (const ProviderError&) {
            return Verdict::failed;
        }
    });

    SegregationResult out;
    for (std::size_t i = 0; i < comments.size(); ++i) {
        if (verdicts[i] == Verdict::keep) {
            Comment c = comments[i];
            c.vaccine_tags.insert(tag);
            out.comments.push_back(std::move(c));
        } else if (verdicts[i] == Verdict::failed) {
            out.flagged_ids.push_back(comments[i].id);
        }
    }
    return out;
}

Corpus build_corpus(const LoadResult& loaded, const BucketClassifier& classifier,
                    const VaccineExtractor& extractor, const IngestOptions& opts) {
    Corpus corpus;
    auto& report = corpus.report;
    report.total_loaded = loaded.posts.size();
    report.malformed_lines = loaded.warnings.size();
    for (const auto& w : loaded.warnings) {
        report.warnings.push_back("line " + std::to_string(w.line) + ": " + w.message);
    }
    for (auto b : {Bucket::vaccine, Bucket::personal_health, Bucket::other}) {
        report.per_bucket_counts[b] = 0;
    }

    std::vector<Comment> cleaned;
    for (const auto& post : loaded.posts) {
        auto body = text::preprocess(post.text);
        if (body.empty()) {
            continue;
        }
        Comment c;
        c.id = post.id;
        c.text = std::move(body);
        c.platform = post.platform;
        c.created_at = post.created_at;
        c.author_hash = post.author_hash;
        cleaned.push_back(std::move(c));
    }
    report.total_after_preprocess = cleaned.size();

    struct Classified {
        Bucket bucket;
        bool failed;
    };
    const auto buckets = parallel_map(cleaned.size(), opts.fan_out.max_in_flight, [&](std::size_t i) {
        try {
            return Classified{with_retry(opts.fan_out.retry, [&] { return classify_bucket(cleaned[i].text, classifier); }),
                              false};
        } catch (const ProviderError&) {
            return Classified{Bucket::other, true};
        }
    });
    for (std::size_t i = 0; i < cleaned.size(); ++i) {
        cleaned[i].bucket = buckets[i].bucket;
        if (buckets[i].failed) {
            cleaned[i].flagged = true;
            report.flagged_ids.push_back(cleaned[i].id);
        }
        ++report.per_bucket_counts[cleaned[i].bucket];
    }

    auto seg = segregate_vaccine_specific(cleaned, opts.vaccine, extractor, opts.fan_out);
    // Merge tags back by walking both sequences; segregation output is a
    // subsequence of `cleaned`.
    std::size_t k = 0;
    for (auto& c : cleaned) {
        if (k < seg.comments.size() && seg.comments[k].id == c.id) {
            c.vaccine_tags = seg.comments[k].vaccine_tags;
            ++k;
        }
    }
    const std::unordered_set<std::string> seg_failed(seg.flagged_ids.begin(), seg.flagged_ids.end());
    for (auto& c : cleaned) {
        if (seg_failed.contains(c.id)) {
            c.flagged = true;
            report.flagged_ids.push_back(c.id);
        }
    }
    report.vaccine_specific_count = seg.comments.size();
    corpus.comments = std::move(cleaned);
    return corpus;
}

std::vector<Comment> vaccine_specific(std::span<const Comment> comments, std::string_view vaccine) {
    const auto tag = text::to_lower(vaccine);
    std::vector<Comment> out;
    for (const auto& c : comments) {
        if (tag.empty() ? !c.vaccine_tags.empty() : c.vaccine_tags.contains(tag)) {
            out.push_back(c);
        }
    }
    return out;
}

void write_corpus_jsonl(std::ostream& out, std::span<const Comment> comments) {
    for (const auto& c : comments) {
        out << json(c).dump() << '\n';
    }
}

void write_corpus_jsonl(const std::filesystem::path& path, std::span<const Comment> comments) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write corpus file: " + path.string());
    }
    write_corpus_jsonl(out, comments);
}

std::vector<Comment> read_corpus_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open corpus file: " + path.string());
    }
    std::vector<Comment> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(json::parse(line).get<Comment>());
        } catch (const std::exception& e) {
            throw Error("corpus " + path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace vaxrag
