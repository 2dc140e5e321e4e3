#include "vaxrag/service/config.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <set>

#include "vaxrag/error.hpp"
#include "vaxrag/json.hpp"

namespace vaxrag::service {

using nlohmann::json;

std::string_view to_string(ProviderMode m) { return m == ProviderMode::remote ? "remote" : "stub"; }

std::optional<ProviderMode> parse_provider_mode(std::string_view s) {
    if (s == "stub") return ProviderMode::stub;
    if (s == "remote") return ProviderMode::remote;
    return std::nullopt;
}

namespace {

struct Kind {
    std::string_view key;
    ProviderSettings ProviderTable::*member;
};

constexpr std::array<Kind, 8> kKinds{{
    {"embedder", &ProviderTable::embedder},
    {"reranker_small", &ProviderTable::reranker_small},
    {"reranker_large", &ProviderTable::reranker_large},
    {"compressor", &ProviderTable::compressor},
    {"chat", &ProviderTable::chat},
    {"judge", &ProviderTable::judge},
    {"classifier", &ProviderTable::classifier},
    {"extractor", &ProviderTable::extractor},
}};

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key: " + std::string(where) + (where.empty() ? "" : ".") + key);
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where = {}) {
    if (const auto it = obj.find(key); it != obj.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("wrong type for config key " + std::string(where) + (where.empty() ? "" : ".") + key);
        }
    }
}

ProviderMode mode_value(const std::string& s, const std::string& key) {
    const auto m = parse_provider_mode(s);
    if (!m) {
        throw ConfigError(key + " must be \"stub\" or \"remote\", got \"" + s + "\"");
    }
    return *m;
}

} // namespace

std::string ServiceConfig::provider_mode_label() const {
    std::set<ProviderMode> seen;
    for (const auto& k : kKinds) {
        seen.insert(mode_of(providers.*k.member));
    }
    if (seen.size() > 1) {
        return "mixed";
    }
    return std::string(to_string(*seen.begin()));
}

void ServiceConfig::validate() const {
    if (listen_host.empty()) throw ConfigError("listen_host must not be empty");
    if (listen_port < 0 || listen_port > 65535) throw ConfigError("listen_port must be in [0, 65535]");
    if (index_path.empty()) throw ConfigError("index_path must not be empty");
    if (corpus_path.empty()) throw ConfigError("corpus_path must not be empty");
    if (vaccine.empty()) throw ConfigError("vaccine must not be empty");
    if (embedding_dim == 0) throw ConfigError("embedding.dim must be positive");
    if (embedding_batch_size == 0) throw ConfigError("embedding.batch_size must be positive");
    if (request_timeout.count() <= 0) throw ConfigError("request_timeout_ms must be positive");
    if (max_concurrent_pipelines == 0 || max_concurrent_pipelines > 1024) {
        throw ConfigError("max_concurrent_pipelines must be in [1, 1024]");
    }
    if (max_in_flight_provider_calls == 0) throw ConfigError("max_in_flight_provider_calls must be positive");
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be at least 1");
    if (retry.initial_backoff.count() < 0) throw ConfigError("retry.initial_backoff_ms must not be negative");
    if (retry.multiplier < 1.0) throw ConfigError("retry.multiplier must be at least 1");
    if (relevancy_questions == 0) throw ConfigError("eval.relevancy_questions must be positive");
    for (const auto* t : {&thresholds.min_context_precision, &thresholds.min_context_recall,
                          &thresholds.min_faithfulness, &thresholds.min_answer_relevancy}) {
        if (*t && (**t < 0.0 || **t > 1.0)) throw ConfigError("eval thresholds must be in [0, 1]");
    }
    retrieval.validate();
    for (const auto& k : kKinds) {
        const auto& p = providers.*k.member;
        if (mode_of(p) == ProviderMode::remote) {
            if (p.url.empty()) {
                throw ConfigError("providers." + std::string(k.key) + ".url is required in remote mode");
            }
            if (p.url.rfind("http://", 0) != 0 && p.url.rfind("https://", 0) != 0) {
                throw ConfigError("providers." + std::string(k.key) + ".url must be an http(s) URL");
            }
        }
    }
}

json ServiceConfig::to_json() const {
    json provs = json::object();
    for (const auto& k : kKinds) {
        const auto& p = providers.*k.member;
        provs[std::string(k.key)] = json{{"mode", to_string(mode_of(p))},
                                         {"url", p.url},
                                         {"model", p.model},
                                         {"api_key_env", p.api_key_env}};
    }
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return json{
        {"listen_host", listen_host},
        {"listen_port", listen_port},
        {"index_path", index_path.string()},
        {"corpus_path", corpus_path.string()},
        {"vaccine", vaccine},
        {"provider_mode", to_string(provider_mode)},
        {"providers", provs},
        {"classifier_rules", classifier_rules ? json(classifier_rules->string()) : json(nullptr)},
        {"embedding", {{"dim", embedding_dim}, {"batch_size", embedding_batch_size}}},
        {"retrieval", retrieval},
        {"request_timeout_ms", request_timeout.count()},
        {"max_concurrent_pipelines", max_concurrent_pipelines},
        {"max_in_flight_provider_calls", max_in_flight_provider_calls},
        {"retry",
         {{"max_attempts", retry.max_attempts},
          {"initial_backoff_ms", retry.initial_backoff.count()},
          {"multiplier", retry.multiplier}}},
        {"eval",
         {{"relevancy_questions", relevancy_questions},
          {"min_context_precision", opt(thresholds.min_context_precision)},
          {"min_context_recall", opt(thresholds.min_context_recall)},
          {"min_faithfulness", opt(thresholds.min_faithfulness)},
          {"min_answer_relevancy", opt(thresholds.min_answer_relevancy)}}},
        {"deterministic", deterministic},
        {"api_token", api_token.empty() ? "unset" : "set"},
    };
}

ServiceConfig::EnvLookup ServiceConfig::process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) {
            return std::string(v);
        }
        return std::nullopt;
    };
}

ServiceConfig ServiceConfig::from_json(const json& j) {
    ServiceConfig c;
    reject_unknown(j, "",
                   {"listen_host", "listen_port", "index_path", "corpus_path", "vaccine", "provider_mode", "providers",
                    "classifier_rules", "embedding", "retrieval", "request_timeout_ms", "max_concurrent_pipelines",
                    "max_in_flight_provider_calls", "retry", "eval", "deterministic"});
    read(j, "listen_host", c.listen_host);
    read(j, "listen_port", c.listen_port);
    std::string s;
    if (j.contains("index_path")) {
        read(j, "index_path", s);
        c.index_path = s;
    }
    if (j.contains("corpus_path")) {
        read(j, "corpus_path", s);
        c.corpus_path = s;
    }
    read(j, "vaccine", c.vaccine);
    if (j.contains("provider_mode")) {
        read(j, "provider_mode", s);
        c.provider_mode = mode_value(s, "provider_mode");
    }
    if (const auto it = j.find("providers"); it != j.end()) {
        reject_unknown(*it, "providers",
                       {"embedder", "reranker_small", "reranker_large", "compressor", "chat", "judge", "classifier",
                        "extractor"});
        for (const auto& k : kKinds) {
            const auto p = it->find(std::string(k.key));
            if (p == it->end()) continue;
            const auto where = "providers." + std::string(k.key);
            reject_unknown(*p, where, {"mode", "url", "model", "api_key_env"});
            auto& dst = c.providers.*k.member;
            if (p->contains("mode")) {
                std::string m;
                read(*p, "mode", m, where);
                dst.mode = mode_value(m, where + ".mode");
            }
            read(*p, "url", dst.url, where);
            read(*p, "model", dst.model, where);
            read(*p, "api_key_env", dst.api_key_env, where);
        }
    }
    if (j.contains("classifier_rules")) {
        read(j, "classifier_rules", s);
        c.classifier_rules = s;
    }
    if (const auto it = j.find("embedding"); it != j.end()) {
        reject_unknown(*it, "embedding", {"dim", "batch_size"});
        read(*it, "dim", c.embedding_dim, "embedding");
        read(*it, "batch_size", c.embedding_batch_size, "embedding");
    }
    if (const auto it = j.find("retrieval"); it != j.end()) {
        try {
            RetrievalOverrides o = *it;
            c.retrieval = o.apply(c.retrieval);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("retrieval: ") + e.what());
        }
    }
    if (j.contains("request_timeout_ms")) {
        long long ms = 0;
        read(j, "request_timeout_ms", ms);
        c.request_timeout = std::chrono::milliseconds(ms);
    }
    read(j, "max_concurrent_pipelines", c.max_concurrent_pipelines);
    read(j, "max_in_flight_provider_calls", c.max_in_flight_provider_calls);
    if (const auto it = j.find("retry"); it != j.end()) {
        reject_unknown(*it, "retry", {"max_attempts", "initial_backoff_ms", "multiplier"});
        read(*it, "max_attempts", c.retry.max_attempts, "retry");
        if (it->contains("initial_backoff_ms")) {
            long long ms = 0;
            read(*it, "initial_backoff_ms", ms, "retry");
            c.retry.initial_backoff = std::chrono::milliseconds(ms);
        }
        read(*it, "multiplier", c.retry.multiplier, "retry");
    }
    if (const auto it = j.find("eval"); it != j.end()) {
        reject_unknown(*it, "eval",
                       {"relevancy_questions", "min_context_precision", "min_context_recall", "min_faithfulness",
                        "min_answer_relevancy"});
        read(*it, "relevancy_questions", c.relevancy_questions, "eval");
        auto threshold = [&](const char* key, std::optional<double>& dst) {
            if (it->contains(key) && !(*it)[key].is_null()) {
                double v = 0;
                read(*it, key, v, "eval");
                dst = v;
            }
        };
        threshold("min_context_precision", c.thresholds.min_context_precision);
        threshold("min_context_recall", c.thresholds.min_context_recall);
        threshold("min_faithfulness", c.thresholds.min_faithfulness);
        threshold("min_answer_relevancy", c.thresholds.min_answer_relevancy);
    }
    read(j, "deterministic", c.deterministic);
    return c;
}

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    ServiceConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) {
            throw ConfigError("cannot open config file " + file->string());
        }
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config file " + file->string() + " is not valid JSON: " + e.what());
        }
        c = from_json(j);
    }
    if (auto v = env("VAXRAG_PROVIDER_MODE")) c.provider_mode = mode_value(*v, "VAXRAG_PROVIDER_MODE");
    if (auto v = env("VAXRAG_LISTEN_HOST")) c.listen_host = *v;
    if (auto v = env("VAXRAG_LISTEN_PORT")) {
        try {
            c.listen_port = std::stoi(*v);
        } catch (const std::exception&) {
            throw ConfigError("VAXRAG_LISTEN_PORT is not a number: " + *v);
        }
    }
    if (auto v = env("VAXRAG_INDEX_PATH")) c.index_path = *v;
    if (auto v = env("VAXRAG_CORPUS_PATH")) c.corpus_path = *v;
    if (auto v = env("VAXRAG_DETERMINISTIC")) c.deterministic = (*v == "1" || *v == "true");
    if (auto v = env("VAXRAG_API_TOKEN")) c.api_token = *v;
    c.validate();
    return c;
}

} // namespace vaxrag::service
