#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "vaxrag/service/engine.hpp"

namespace vaxrag::service {

/// Parses a POST /query body. Throws RequestError listing field errors.
QueryRequest parse_query_request(const nlohmann::json& body);

class RequestError : public Error {
public:
    RequestError(std::string what, nlohmann::json fields) : Error(std::move(what)), fields_(std::move(fields)) {}
    const nlohmann::json& fields() const { return fields_; }

private:
    nlohmann::json fields_;
};

/// QueryResponse: {answer, retrieval_trace, timings}.
nlohmann::json query_response(const QueryOutcome& outcome);

/// HTTP front end:
///   POST /query      {query_text, mode, vaccine_filter?, overrides?}
///   POST /ingest     {path, vaccine?}
///   POST /eval/run   {testcase_path}
///   GET  /health     {status, index_size, provider_mode}
///   GET  /modes      the four output modes
///   GET  /comments/{id}
/// With a configured API token every route except /health requires
/// "Authorization: Bearer <token>".
class Server {
public:
    explicit Server(Engine& engine);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the configured address (port 0 picks a free port) and returns
    /// the bound port. Throws Error if binding fails.
    int bind();
    /// Serves until stop(). Call after bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace vaxrag::service
