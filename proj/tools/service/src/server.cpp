#include "vaxrag/service/server.hpp"

#include <algorithm>
#include <atomic>

#include <httplib.h>

#include "vaxrag/json.hpp"
#include "vaxrag/text.hpp"
#include "vaxrag/service/log.hpp"

namespace vaxrag::service {

using nlohmann::json;

QueryRequest parse_query_request(const json& body) {
    if (!body.is_object()) {
        throw RequestError("request body must be a JSON object", json::object());
    }
    json errors = json::object();
    QueryRequest req;
    for (const auto& [key, _] : body.items()) {
        if (key != "query_text" && key != "mode" && key != "vaccine_filter" && key != "overrides") {
            errors[key] = "unknown field";
        }
    }
    if (const auto it = body.find("query_text"); it == body.end()) {
        errors["query_text"] = "required";
    } else if (!it->is_string()) {
        errors["query_text"] = "must be a string";
    } else if (it->get<std::string>().find_first_not_of(" \t\r\n") == std::string::npos) {
        errors["query_text"] = "must not be empty";
    } else {
        req.query_text = it->get<std::string>();
    }
    if (const auto it = body.find("mode"); it != body.end()) {
        const auto mode = it->is_string() ? parse_mode(it->get<std::string>()) : std::nullopt;
        if (!mode) {
            errors["mode"] = "must be one of answer_question, topics_of_discussion, summarise, public_concerns";
        } else {
            req.mode = *mode;
        }
    }
    if (const auto it = body.find("vaccine_filter"); it != body.end() && !it->is_null()) {
        if (!it->is_string() || it->get<std::string>().empty()) {
            errors["vaccine_filter"] = "must be a non-empty string";
        } else {
            req.vaccine_filter = text::to_lower(it->get<std::string>());
        }
    }
    if (const auto it = body.find("overrides"); it != body.end() && !it->is_null()) {
        try {
            req.overrides = it->get<RetrievalOverrides>();
            req.overrides.apply(RetrievalConfig{}).validate();
        } catch (const std::exception& e) {
            errors["overrides"] = e.what();
        }
    }
    if (!errors.empty()) {
        throw RequestError("invalid query request", errors);
    }
    return req;
}

json query_response(const QueryOutcome& outcome) {
    json timings = json::array();
    for (const auto& s : outcome.retrieval.trace.stages) {
        timings.push_back(json{{"iteration", s.iteration}, {"stage", s.stage}, {"micros", s.micros}});
    }
    return json{{"answer", outcome.answer},
                {"retrieval_trace", trace_summary(outcome.retrieval)},
                {"timings", timings}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message, json extra = json::object()) {
    json body{{"error", message}};
    body.update(extra);
    send_json(res, status, body);
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw RequestError("malformed JSON body", json{{"body", e.what()}});
    }
}

std::string required_string(const json& body, const char* key) {
    if (!body.is_object()) {
        throw RequestError("request body must be a JSON object", json::object());
    }
    const auto it = body.find(key);
    if (it == body.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw RequestError("invalid request", json{{key, "required non-empty string"}});
    }
    return it->get<std::string>();
}

constexpr std::string_view kDegradedHint =
    "a remote provider is unavailable; retry later or switch the affected provider to stub mode";

} // namespace

struct Server::Impl {
    Engine& engine;
    httplib::Server http;
    std::atomic<std::uint64_t> request_seq{0};

    explicit Impl(Engine& e) : engine(e) {
        const auto& cfg = engine.config();
        const auto workers = std::max<std::size_t>(8, cfg.max_concurrent_pipelines * 2);
        http.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
        const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(cfg.request_timeout).count() + 1;
        http.set_read_timeout(timeout, 0);
        http.set_write_timeout(timeout, 0);
        http.set_payload_max_length(16 * 1024 * 1024);

        http.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            if (req.method == "OPTIONS") {
                res.status = 204;
                return httplib::Server::HandlerResponse::Handled;
            }
            const auto& token = engine.config().api_token;
            if (!token.empty() && req.path != "/health" &&
                req.get_header_value("Authorization") != "Bearer " + token) {
                send_error(res, 401, "missing or invalid API token");
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });
        http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            log_event(LogLevel::info, "http_request",
                      {{"seq", ++request_seq}, {"method", req.method}, {"path", req.path}, {"status", res.status}});
        });
        http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const RequestError& e) {
                send_error(res, 400, e.what(), json{{"fields", e.fields()}});
            } catch (const Overloaded& e) {
                send_error(res, 503, e.what(), json{{"hint", "retry later"}});
            } catch (const ProviderError& e) {
                log_event(LogLevel::error, "provider_error", {{"error", e.what()}});
                send_error(res, 503, e.what(), json{{"hint", kDegradedHint}});
            } catch (const std::exception& e) {
                log_event(LogLevel::error, "request_failed", {{"error", e.what()}});
                send_error(res, 500, e.what());
            }
        });

        http.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200,
                      json{{"status", "ok"},
                           {"index_size", engine.index_size()},
                           {"provider_mode", engine.config().provider_mode_label()}});
        });
        http.Get("/modes", [](const httplib::Request&, httplib::Response& res) {
            json modes = json::array();
            for (const auto m : kAllModes) {
                modes.push_back(describe(m));
            }
            send_json(res, 200, modes);
        });
        http.Get(R"(/comments/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto c = engine.comment(req.matches[1]);
            if (!c) {
                send_error(res, 404, "unknown comment id");
                return;
            }
            send_json(res, 200, *c);
        });
        http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
            const auto s = engine.stats();
            send_json(res, 200,
                      json{{"in_flight", s.in_flight},
                           {"max_in_flight_observed", s.max_observed},
                           {"completed", s.completed},
                           {"max_concurrent_pipelines", engine.config().max_concurrent_pipelines}});
        });
        http.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
            const auto request = parse_query_request(parse_body(req));
            send_json(res, 200, query_response(engine.query(request)));
        });
        http.Post("/ingest", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const auto path = required_string(body, "path");
            std::optional<std::string> vaccine;
            if (body.contains("vaccine")) {
                vaccine = required_string(body, "vaccine");
            }
            if (!std::filesystem::exists(path)) {
                throw RequestError("invalid request", json{{"path", "file not found"}});
            }
            send_json(res, 200, engine.ingest(path, vaccine));
        });
        http.Post("/eval/run", [this](const httplib::Request& req, httplib::Response& res) {
            const auto path = required_string(parse_body(req), "testcase_path");
            if (!std::filesystem::exists(path)) {
                throw RequestError("invalid request", json{{"testcase_path", "file not found"}});
            }
            const auto cases = read_testcases_jsonl(path);
            const auto report = engine.evaluate(cases);
            json body = report;
            body["tables"] = render_tables(report);
            send_json(res, 200, body);
        });
    }
};

Server::Server(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}
Server::~Server() { stop(); }

int Server::bind() {
    const auto& cfg = impl_->engine.config();
    int port = cfg.listen_port;
    if (port == 0) {
        port = impl_->http.bind_to_any_port(cfg.listen_host);
        if (port < 0) port = 0;
    } else if (!impl_->http.bind_to_port(cfg.listen_host, port)) {
        port = 0;
    }
    if (port == 0) {
        throw Error("cannot bind " + cfg.listen_host + ":" + std::to_string(cfg.listen_port));
    }
    log_event(LogLevel::info, "listening", {{"host", cfg.listen_host}, {"port", port}});
    return port;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_ && impl_->http.is_running()) {
        impl_->http.stop();
    }
}

} // namespace vaxrag::service
