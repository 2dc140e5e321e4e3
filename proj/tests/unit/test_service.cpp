#include <doctest.h>

#include <fstream>
#include <cstdlib>
#include <future>
#include <thread>

#include <httplib.h>

#include "helpers.hpp"
#include "vaxrag/service/engine.hpp"
#include "vaxrag/service/log.hpp"
#include "vaxrag/service/server.hpp"
#include "vaxrag/embedding.hpp"
#include "vaxrag/stub_chat.hpp"

using namespace vaxrag;
using namespace vaxrag::service;
using namespace vaxrag::testing;
using nlohmann::json;

namespace {

ServiceConfig::EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
        const auto it = vars.find(k);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

ServiceConfig test_config(const TempDir& dir) {
    ServiceConfig c;
    c.listen_port = 0;
    c.index_path = dir / "index.bin";
    c.corpus_path = dir / "corpus.jsonl";
    c.embedding_dim = 256;
    c.deterministic = true;
    c.retry = no_backoff(2);
    c.request_timeout = std::chrono::milliseconds(20000);
    return c;
}

class SlowChat final : public ChatProvider {
public:
    std::string complete(const ChatRequest& r) const override {
        std::this_thread::sleep_for(std::chrono::milliseconds(150));
        return inner.complete(r);
    }
    std::string model_id() const override { return "slow"; }
    StubChatProvider inner;
};

/// Server running on a background thread for the lifetime of the object.
class RunningServer {
public:
    explicit RunningServer(Engine& e) : server_(e) {
        port_ = server_.bind();
        thread_ = std::thread([this] { server_.run(); });
    }
    ~RunningServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        return c;
    }

private:
    Server server_;
    int port_ = 0;
    std::thread thread_;
};

const std::string kQuery = R"({"query_text":"what concerns exist about dose two","mode":"public_concerns"})";

struct QuietLogs {
    QuietLogs() { set_log_level(LogLevel::error); }
    ~QuietLogs() { set_log_level(LogLevel::info); }
};

} // namespace

TEST_SUITE("service") {

TEST_CASE("config defaults, file keys and environment overrides") {
    const auto d = ServiceConfig::load(std::nullopt, env_of({}));
    CHECK(d.listen_port == 8080);
    CHECK(d.provider_mode_label() == "stub");

    TempDir dir("cfg");
    {
        std::ofstream f(dir / "c.json");
        f << R"({"listen_port": 9000, "retrieval": {"k_percent": 10}, "eval": {"min_faithfulness": 0.9}})";
    }
    const auto c = ServiceConfig::load(dir / "c.json", env_of({{"VAXRAG_LISTEN_PORT", "9100"},
                                                              {"VAXRAG_API_TOKEN", "secret"},
                                                              {"VAXRAG_DETERMINISTIC", "1"}}));
    CHECK(c.listen_port == 9100);
    CHECK(c.retrieval.k_percent == 10);
    CHECK(c.thresholds.min_faithfulness == 0.9);
    CHECK(c.deterministic);
    CHECK(c.api_token == "secret");
    CHECK(c.to_json().dump().find("secret") == std::string::npos);
}

TEST_CASE("config rejects bad input") {
    CHECK_THROWS_AS(ServiceConfig::from_json(json{{"listen_prot", 1}}), ConfigError);
    CHECK_THROWS_AS(ServiceConfig::from_json(json{{"providers", {{"chat", {{"mode", "remote"}}}}}}).validate(),
                    ConfigError);
    CHECK_THROWS_AS(ServiceConfig::from_json(json{{"provider_mode", "cloud"}}), ConfigError);
    CHECK_THROWS_AS(ServiceConfig::load(std::nullopt, env_of({{"VAXRAG_LISTEN_PORT", "abc"}})), ConfigError);
    const auto mixed = ServiceConfig::from_json(
        json{{"providers", {{"chat", {{"mode", "remote"}, {"url", "http://127.0.0.1:1/v1/chat"}}}}}});
    CHECK_NOTHROW(mixed.validate());
    CHECK(mixed.provider_mode_label() == "mixed");
}

TEST_CASE("query request parsing") {
    const auto r = parse_query_request(json::parse(kQuery));
    CHECK(r.mode == OutputMode::public_concerns);
    try {
        parse_query_request(json{{"query_text", "x"}, {"mode", "rant"}});
        FAIL("expected RequestError");
    } catch (const RequestError& e) {
        CHECK(e.fields().contains("mode"));
    }
    CHECK_THROWS_AS(parse_query_request(json{{"mode", "summarise"}}), RequestError);
    CHECK_THROWS_AS(parse_query_request(json{{"query_text", "x"}, {"mode", "summarise"}, {"extra", 1}}),
                    RequestError);
    CHECK_THROWS_AS(
        parse_query_request(json{{"query_text", "x"}, {"mode", "summarise"}, {"overrides", {{"k_percent", 0}}}}),
        RequestError);
}

TEST_CASE("http api in stub mode") {
    QuietLogs quiet;
    TempDir dir("http");
    Engine engine(test_config(dir));
    engine.ingest(data_dir() / "synthetic_posts.jsonl");
    RunningServer srv(engine);
    auto cli = srv.client();

    const auto health = cli.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    const auto h = json::parse(health->body);
    CHECK(h["status"] == "ok");
    CHECK(h["provider_mode"] == "stub");
    CHECK(h["index_size"] == 150);

    const auto modes = cli.Get("/modes");
    REQUIRE(modes);
    CHECK(json::parse(modes->body).size() == 4);

    const auto ok = cli.Post("/query", kQuery, "application/json");
    REQUIRE(ok);
    CHECK(ok->status == 200);
    const auto body = json::parse(ok->body);
    CHECK(body.contains("answer"));
    CHECK(body.contains("retrieval_trace"));
    CHECK(body["timings"].size() == 7);
    CHECK_FALSE(body["answer"]["supporting_ids"].empty());
    const auto first_id = body["answer"]["supporting_ids"][0].get<std::string>();
    const auto comment = cli.Get("/comments/" + first_id);
    REQUIRE(comment);
    CHECK(comment->status == 200);
    CHECK(cli.Get("/comments/nope")->status == 404);

    const auto rant = cli.Post("/query", R"({"query_text":"x","mode":"rant"})", "application/json");
    REQUIRE(rant);
    CHECK(rant->status == 400);
    CHECK(json::parse(rant->body)["fields"].contains("mode"));

    const auto malformed = cli.Post("/query", "{not json", "application/json");
    REQUIRE(malformed);
    CHECK(malformed->status == 400);

    const auto missing = cli.Post("/ingest", R"({"path":"/definitely/not/here.jsonl"})", "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 400);

    const auto options = cli.Options("/query");
    REQUIRE(options);
    CHECK(options->status == 204);
    CHECK(options->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("deterministic responses survive an engine restart") {
    QuietLogs quiet;
    TempDir dir("det");
    const auto cfg = test_config(dir);
    std::string first;
    {
        Engine engine(cfg);
        engine.ingest(data_dir() / "synthetic_posts.jsonl");
        RunningServer srv(engine);
        first = srv.client().Post("/query", kQuery, "application/json")->body;
    }
    std::string second;
    {
        Engine engine(cfg);
        engine.boot();
        RunningServer srv(engine);
        second = srv.client().Post("/query", kQuery, "application/json")->body;
    }
    CHECK_FALSE(first.empty());
    CHECK(first == second);
}

TEST_CASE("an unreachable remote provider gives 503 with a hint") {
    QuietLogs quiet;
    TempDir dir("remote");
    auto cfg = test_config(dir);
    cfg.providers.chat.mode = ProviderMode::remote;
    cfg.providers.chat.url = "http://127.0.0.1:1/v1/chat";
    cfg.request_timeout = std::chrono::milliseconds(2000);
    Engine engine(cfg);
    engine.ingest(data_dir() / "synthetic_posts.jsonl");
    RunningServer srv(engine);
    auto cli = srv.client();
    const auto res = cli.Post("/query", kQuery, "application/json");
    REQUIRE(res);
    CHECK(res->status == 503);
    CHECK(json::parse(res->body)["hint"].get<std::string>().find("stub") != std::string::npos);
    CHECK(json::parse(cli.Get("/health")->body)["provider_mode"] == "mixed");
}

TEST_CASE("remote providers speak the JSON wire format") {
    QuietLogs quiet;
    const HashedEmbedder embed(256);
    const LexicalOverlapReranker rerank;
    const EmbeddingCompressor compress(embed);
    const StubChatProvider chat;
    const KeywordBucketClassifier classify;
    const AliasVaccineExtractor extract;
    std::atomic<int> hits{0};
    std::string seen_auth;

    httplib::Server fake;
    auto reply = [](httplib::Response& res, const json& j) { res.set_content(j.dump(), "application/json"); };
    fake.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        seen_auth = req.get_header_value("Authorization");
        reply(res, json{{"vectors", embed.embed(json::parse(req.body).at("inputs").get<std::vector<std::string>>())}});
    });
    fake.Post("/rerank", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto b = json::parse(req.body);
        const auto passages = b.at("passages").get<std::vector<std::string>>();
        reply(res, json{{"scores", rerank.score(b.at("query").get<std::string>(), passages)}});
    });
    fake.Post("/compress", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto b = json::parse(req.body);
        reply(res, json{{"kept_sentences", compress.compress(b.at("query").get<std::string>(),
                                                             b.at("passage").get<std::string>(),
                                                             b.at("threshold").get<double>())}});
    });
    fake.Post("/chat", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto b = json::parse(req.body);
        reply(res, json{{"text", chat.complete({b.at("system").get<std::string>(), b.at("user").get<std::string>()})}});
    });
    fake.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        reply(res, json{{"bucket", to_string(classify.classify(json::parse(req.body).at("text").get<std::string>()))}});
    });
    fake.Post("/extract", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto b = json::parse(req.body);
        reply(res, json{{"match", extract.concerns(b.at("text").get<std::string>(), b.at("vaccine").get<std::string>())}});
    });
    const int port = fake.bind_to_any_port("127.0.0.1");
    std::thread fake_thread([&] { fake.listen_after_bind(); });
    const auto base = "http://127.0.0.1:" + std::to_string(port);

    ::setenv("VAXRAG_TEST_EMBED_KEY", "k-123", 1);
    TempDir dir("remote-ok");
    auto cfg = test_config(dir);
    cfg.provider_mode = ProviderMode::remote;
    cfg.providers.embedder = {std::nullopt, base + "/embed", "fake-embed", "VAXRAG_TEST_EMBED_KEY"};
    cfg.providers.reranker_small = {std::nullopt, base + "/rerank", "", ""};
    cfg.providers.reranker_large = {std::nullopt, base + "/rerank", "", ""};
    cfg.providers.compressor = {std::nullopt, base + "/compress", "", ""};
    cfg.providers.chat = {std::nullopt, base + "/chat", "fake-chat", ""};
    cfg.providers.judge = {std::nullopt, base + "/chat", "fake-judge", ""};
    cfg.providers.classifier = {std::nullopt, base + "/classify", "", ""};
    cfg.providers.extractor = {std::nullopt, base + "/extract", "", ""};
    {
        Engine remote(cfg);
        const auto report = remote.ingest(data_dir() / "synthetic_posts.jsonl");
        CHECK(report.vaccine_specific_count == 150);
        const auto out = remote.query(parse_query_request(json::parse(kQuery)));
        CHECK_FALSE(out.answer.supporting_ids.empty());

        // Same answer as the in-process stubs.
        TempDir stub_dir("remote-ok-stub");
        Engine local(test_config(stub_dir));
        local.ingest(data_dir() / "synthetic_posts.jsonl");
        const auto expected = local.query(parse_query_request(json::parse(kQuery)));
        CHECK(out.answer.text == expected.answer.text);

        TestGenOptions opts;
        opts.n_total = 4;
        const auto report_eval = remote.evaluate(remote.generate_testcases(opts).cases);
        CHECK(report_eval.failed_cases == 0);
    }
    CHECK(hits.load() > 0);
    CHECK(seen_auth == "Bearer k-123");
    ::unsetenv("VAXRAG_TEST_EMBED_KEY");
    fake.stop();
    fake_thread.join();
}

TEST_CASE("concurrent queries never exceed the pipeline limit") {
    QuietLogs quiet;
    TempDir dir("load");
    auto cfg = test_config(dir);
    cfg.max_concurrent_pipelines = 2;
    auto providers = make_providers(cfg);
    providers.chat = std::make_unique<SlowChat>();
    Engine engine(cfg, std::move(providers));
    engine.ingest(data_dir() / "synthetic_posts.jsonl");
    RunningServer srv(engine);

    std::vector<std::future<int>> replies;
    for (int i = 0; i < 6; ++i) {
        replies.push_back(std::async(std::launch::async, [&srv] {
            auto cli = srv.client();
            const auto r = cli.Post("/query", kQuery, "application/json");
            return r ? r->status : -1;
        }));
    }
    for (auto& r : replies) CHECK(r.get() == 200);
    const auto stats = json::parse(srv.client().Get("/stats")->body);
    CHECK(stats["max_in_flight_observed"].get<int>() <= 2);
    CHECK(stats["max_in_flight_observed"].get<int>() >= 1);
    CHECK(stats["completed"] == 6);
    CHECK(stats["in_flight"] == 0);
}

TEST_CASE("a slot that never frees up gives 503") {
    QuietLogs quiet;
    TempDir dir("overload");
    auto cfg = test_config(dir);
    cfg.max_concurrent_pipelines = 1;
    cfg.request_timeout = std::chrono::milliseconds(50);
    auto providers = make_providers(cfg);
    providers.chat = std::make_unique<SlowChat>();
    Engine engine(cfg, std::move(providers));
    engine.ingest(data_dir() / "synthetic_posts.jsonl");
    auto slow = std::async(std::launch::async, [&] { return engine.query(parse_query_request(json::parse(kQuery))); });
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    CHECK_THROWS_AS(engine.query(parse_query_request(json::parse(kQuery))), Overloaded);
    CHECK_NOTHROW(slow.get());
}

TEST_CASE("bearer token guards everything except health") {
    QuietLogs quiet;
    TempDir dir("auth");
    auto cfg = test_config(dir);
    cfg.api_token = "letmein";
    Engine engine(cfg);
    RunningServer srv(engine);
    auto cli = srv.client();
    CHECK(cli.Get("/health")->status == 200);
    CHECK(cli.Get("/modes")->status == 401);
    cli.set_bearer_token_auth("wrong");
    CHECK(cli.Get("/modes")->status == 401);
    cli.set_bearer_token_auth("letmein");
    CHECK(cli.Get("/modes")->status == 200);
}

TEST_CASE("eval endpoint returns the report with tables") {
    QuietLogs quiet;
    TempDir dir("evalrun");
    Engine engine(test_config(dir));
    engine.ingest(data_dir() / "synthetic_posts.jsonl");
    TestGenOptions opts;
    opts.n_total = 8;
    write_testcases_jsonl(dir / "tc.jsonl", engine.generate_testcases(opts).cases);
    RunningServer srv(engine);
    const auto res = srv.client().Post("/eval/run", json{{"testcase_path", (dir / "tc.jsonl").string()}}.dump(),
                                       "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["cases"].size() == 8);
    CHECK(body["tables"].get<std::string>().find("Highest Scores") != std::string::npos);
}

}
