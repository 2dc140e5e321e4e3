#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vaxrag/parallel.hpp"
#include "vaxrag/timestamp.hpp"

namespace vaxrag {

enum class Platform { x, reddit, youtube, facebook, other };
enum class Bucket { vaccine, personal_health, other };

std::string_view to_string(Platform p);
std::string_view to_string(Bucket b);
/// Unknown platform names map to Platform::other; "twitter" maps to x.
Platform parse_platform(std::string_view s);
std::optional<Bucket> parse_bucket(std::string_view s);

struct RawPost {
    std::string id;
    Platform platform = Platform::other;
    Timestamp created_at{};
    std::string text;
    std::optional<std::string> author_hash;
};

struct LoadWarning {
    std::size_t line = 0; // 1-based
    std::string message;
};

struct LoadResult {
    std::vector<RawPost> posts;
    std::vector<LoadWarning> warnings;
};

/// Reads a JSONL export. Lines that are not JSON objects, lack `id`/`text`,
/// carry an unparseable `created_at`, or repeat an id already seen are
/// skipped with a warning. Blank lines are ignored. Throws Error if the
/// file cannot be opened.
LoadResult load_posts(const std::filesystem::path& path);
LoadResult parse_posts(std::istream& in);

struct Comment {
    std::string id;
    std::string text;
    Platform platform = Platform::other;
    Timestamp created_at{};
    Bucket bucket = Bucket::other;
    std::set<std::string> vaccine_tags;
    std::optional<std::string> author_hash;
    /// Set when a provider failed for this comment and a fallback was applied.
    bool flagged = false;
};

class BucketClassifier {
public:
    virtual ~BucketClassifier() = default;
    /// Throws ProviderError on failure.
    virtual Bucket classify(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

/// Keyword table for the stub classifier. Terms are matched as whole words,
/// case-insensitively; multi-word terms are matched as phrases.
struct BucketRules {
    std::vector<std::string> vaccine_terms;
    std::vector<std::string> personal_markers;
    std::vector<std::string> health_terms;

    static BucketRules defaults();
    static BucketRules from_json_file(const std::filesystem::path& path);
};

/// vaccine term + personal marker            -> personal_health
/// personal marker + health term (no vaccine) -> personal_health
/// vaccine term only                          -> vaccine
/// otherwise                                  -> other
class KeywordBucketClassifier final : public BucketClassifier {
public:
    explicit KeywordBucketClassifier(BucketRules rules = BucketRules::defaults());
    Bucket classify(std::string_view text) const override;
    std::string name() const override { return "keyword-stub"; }

private:
    BucketRules rules_;
};

class VaccineExtractor {
public:
    virtual ~VaccineExtractor() = default;
    /// True if `text` is about `vaccine`. Throws ProviderError on failure.
    virtual bool concerns(std::string_view text, std::string_view vaccine) const = 0;
    virtual std::string name() const = 0;
};

/// Case-insensitive whole-word match on the vaccine name or any alias.
class AliasVaccineExtractor final : public VaccineExtractor {
public:
    using AliasTable = std::map<std::string, std::vector<std::string>>;

    explicit AliasVaccineExtractor(AliasTable aliases = default_aliases());
    bool concerns(std::string_view text, std::string_view vaccine) const override;
    std::string name() const override { return "alias-stub"; }

    static AliasTable default_aliases();

private:
    AliasTable aliases_;
};

/// Single classification; rejects empty text and propagates provider errors.
Bucket classify_bucket(std::string_view comment_text, const BucketClassifier& classifier);

struct SegregationResult {
    std::vector<Comment> comments;
    std::vector<std::string> flagged_ids;
};

/// Keeps vaccine/personal_health comments the extractor says concern
/// `vaccine_name`, tagging each with the lowercased name. Input order is
/// preserved. Comments whose extractor call fails are excluded and flagged.
SegregationResult segregate_vaccine_specific(std::span<const Comment> comments,
                                             std::string_view vaccine_name,
                                             const VaccineExtractor& extractor,
                                             const FanOutOptions& opts = {});

struct IngestReport {
    std::size_t total_loaded = 0;
    std::size_t total_after_preprocess = 0;
    std::map<Bucket, std::size_t> per_bucket_counts;
    std::size_t vaccine_specific_count = 0;
    std::size_t malformed_lines = 0;
    std::vector<std::string> flagged_ids;
    std::vector<std::string> warnings;
};

struct IngestOptions {
    std::string vaccine = "shingrix";
    FanOutOptions fan_out{};
};

struct Corpus {
    /// Every comment that survived preprocessing, classified; vaccine-specific
    /// ones carry a non-empty vaccine_tags set.
    std::vector<Comment> comments;
    IngestReport report;
};

/// preprocess -> drop empty -> classify (with retries; failures become
/// `other` and are flagged) -> segregate.
Corpus build_corpus(const LoadResult& loaded, const BucketClassifier& classifier,
                    const VaccineExtractor& extractor, const IngestOptions& opts);

/// Comments tagged with `vaccine` (or with any tag when `vaccine` is empty).
std::vector<Comment> vaccine_specific(std::span<const Comment> comments, std::string_view vaccine = {});

void write_corpus_jsonl(std::ostream& out, std::span<const Comment> comments);
void write_corpus_jsonl(const std::filesystem::path& path, std::span<const Comment> comments);
std::vector<Comment> read_corpus_jsonl(const std::filesystem::path& path);

} // namespace vaxrag
