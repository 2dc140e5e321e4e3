#include "vaxrag/service/remote.hpp"

#include <cstdlib>

#include <httplib.h>

#include "vaxrag/error.hpp"

namespace vaxrag {

using nlohmann::json;

struct JsonHttpClient::Impl {
    std::string base; // scheme://host[:port]
    std::string path;
};

JsonHttpClient::JsonHttpClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)), impl_(std::make_unique<Impl>()) {
    const auto& url = endpoint_.url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL lacks a scheme: " + url);
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("unsupported endpoint scheme: " + url);
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") {
        throw ConfigError("https endpoints need a build with OpenSSL: " + url);
    }
#endif
    const auto path_start = url.find('/', scheme_end + 3);
    impl_->base = url.substr(0, path_start);
    impl_->path = path_start == std::string::npos ? "/" : url.substr(path_start);
}

JsonHttpClient::~JsonHttpClient() = default;
JsonHttpClient::JsonHttpClient(JsonHttpClient&&) noexcept = default;
JsonHttpClient& JsonHttpClient::operator=(JsonHttpClient&&) noexcept = default;

json JsonHttpClient::post(const json& body) const {
    httplib::Client client(impl_->base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!endpoint_.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const auto res = client.Post(impl_->path, headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError(endpoint_.url + ": " + httplib::to_string(res.error()), true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw ProviderError(endpoint_.url + ": HTTP " + std::to_string(res->status), true);
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProviderError(endpoint_.url + ": HTTP " + std::to_string(res->status) + " " + res->body, false);
    }
    try {
        return json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw ProviderError(endpoint_.url + ": malformed JSON response: " + e.what(), false);
    }
}

namespace {

template <typename T>
T field_as(const json& j, const char* key, const std::string& who) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ProviderError(who + ": bad `" + key + "` in response: " + e.what(), false);
    }
}

} // namespace

RemoteEmbedder::RemoteEmbedder(const EmbeddingConfig& cfg, RetryPolicy retry, std::chrono::milliseconds timeout)
    : client_(HttpEndpoint{cfg.endpoint, cfg.api_key_env, timeout}),
      model_(cfg.model),
      dim_(cfg.dim),
      batch_size_(std::max<std::size_t>(1, cfg.batch_size)),
      retry_(retry) {}

std::vector<Vector> RemoteEmbedder::embed(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const auto chunk = texts.subspan(start, std::min(batch_size_, texts.size() - start));
        const json req{{"model", model_}, {"inputs", std::vector<std::string>(chunk.begin(), chunk.end())}};
        auto vecs = with_retry(retry_, [&] {
            return field_as<std::vector<Vector>>(client_.post(req), "vectors", client_.endpoint().url);
        });
        if (vecs.size() != chunk.size()) {
            throw ProviderError("embedding endpoint returned " + std::to_string(vecs.size()) + " vectors for " +
                                    std::to_string(chunk.size()) + " inputs",
                                false);
        }
        for (auto& v : vecs) {
            if (v.size() != dim_) {
                throw ProviderError("embedding endpoint returned dim " + std::to_string(v.size()) + ", expected " +
                                        std::to_string(dim_),
                                    false);
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

RemoteReranker::RemoteReranker(HttpEndpoint endpoint, std::string label)
    : client_(std::move(endpoint)), label_(std::move(label)) {}

std::vector<double> RemoteReranker::score(std::string_view query, std::span<const std::string> passages) const {
    const json req{{"query", query}, {"passages", std::vector<std::string>(passages.begin(), passages.end())}};
    return field_as<std::vector<double>>(client_.post(req), "scores", client_.endpoint().url);
}

RemoteCompressor::RemoteCompressor(HttpEndpoint endpoint) : client_(std::move(endpoint)) {}

std::vector<std::string> RemoteCompressor::compress(std::string_view query, std::string_view passage,
                                                    double threshold) const {
    const json req{{"query", query}, {"passage", passage}, {"threshold", threshold}};
    return field_as<std::vector<std::string>>(client_.post(req), "kept_sentences", client_.endpoint().url);
}

RemoteChat::RemoteChat(HttpEndpoint endpoint, std::string model)
    : client_(std::move(endpoint)), model_(std::move(model)) {}

std::string RemoteChat::complete(const ChatRequest& request) const {
    const json req{{"model", model_}, {"system", request.system}, {"user", request.user}};
    return field_as<std::string>(client_.post(req), "text", client_.endpoint().url);
}

RemoteBucketClassifier::RemoteBucketClassifier(HttpEndpoint endpoint) : client_(std::move(endpoint)) {}

Bucket RemoteBucketClassifier::classify(std::string_view text) const {
    const auto name = field_as<std::string>(client_.post(json{{"text", text}}), "bucket", client_.endpoint().url);
    const auto bucket = parse_bucket(name);
    if (!bucket) {
        throw ProviderError("classifier returned unknown bucket '" + name + "'", false);
    }
    return *bucket;
}

RemoteVaccineExtractor::RemoteVaccineExtractor(HttpEndpoint endpoint) : client_(std::move(endpoint)) {}

bool RemoteVaccineExtractor::concerns(std::string_view text, std::string_view vaccine) const {
    return field_as<bool>(client_.post(json{{"text", text}, {"vaccine", vaccine}}), "match", client_.endpoint().url);
}

} // namespace vaxrag
