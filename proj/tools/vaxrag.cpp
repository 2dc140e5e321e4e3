// vaxrag command line: ingest, index, query, serve, gen-testcases, eval.
//
// Exit codes: 0 ok, 1 operational failure, 2 usage error, 3 eval thresholds
// violated.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "vaxrag/error.hpp"
#include "vaxrag/json.hpp"
#include "vaxrag/service/config.hpp"
#include "vaxrag/service/engine.hpp"
#include "vaxrag/service/log.hpp"
#include "vaxrag/service/server.hpp"
#include "vaxrag/text.hpp"

namespace {

using nlohmann::json;
using namespace vaxrag;
using namespace vaxrag::service;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitThresholds = 3;

Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) {
        g_server->stop();
    }
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << content;
}

// "103,72,45,56" -> weights normalised to sum 1.
template <std::size_t N>
std::array<double, N> parse_mix(const std::string& spec, const char* what) {
    std::array<double, N> out{};
    std::stringstream ss(spec);
    std::string part;
    std::size_t i = 0;
    while (std::getline(ss, part, ',')) {
        if (i >= N) break;
        try {
            out[i++] = std::stod(part);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": not a number: " + part);
        }
    }
    if (i != N || std::getline(ss, part, ',')) {
        throw ConfigError(std::string(what) + " needs exactly " + std::to_string(N) + " comma-separated values");
    }
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total <= 0 || std::any_of(out.begin(), out.end(), [](double v) { return v < 0; })) {
        throw ConfigError(std::string(what) + " must be non-negative with a positive sum");
    }
    for (auto& v : out) v /= total;
    return out;
}

std::string render_answer(const QueryOutcome& outcome) {
    std::ostringstream out;
    out << outcome.answer.text << "\n\n";
    out << "Cited comments:";
    if (outcome.answer.supporting_ids.empty()) {
        out << " (none)";
    }
    out << "\n";
    for (const auto& id : outcome.answer.supporting_ids) {
        out << "  [comment:" << id << "]\n";
    }
    if (!outcome.answer.dropped_citations.empty()) {
        out << "Dropped citations: " << text::join(outcome.answer.dropped_citations, ", ") << "\n";
    }
    out << "\nStages:\n";
    for (const auto& s : outcome.retrieval.trace.stages) {
        out << "  it" << s.iteration << " " << s.stage << ": " << s.input_count << " -> " << s.output_count;
        if (s.early_exit) out << " (early exit)";
        if (!s.scorer.empty()) out << " [" << s.scorer << "]";
        if (s.degraded) out << " (degraded)";
        out << "\n";
    }
    return out.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vaxrag: retrieval-augmented analysis of vaccine discussions"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    bool deterministic = false;
    std::string log_level = "info";
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_flag("--deterministic", deterministic, "Zero stage timings and fix the answer clock");
    app.add_option("--log-level", log_level, "debug|info|warn|error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Preprocess, classify and segregate a JSONL post export");
    std::string ingest_in, ingest_out, ingest_report, ingest_vaccine;
    ingest->add_option("--in", ingest_in, "Posts JSONL")->required()->check(CLI::ExistingFile);
    ingest->add_option("--vaccine", ingest_vaccine, "Vaccine to segregate (default from config)");
    ingest->add_option("--out", ingest_out, "Corpus JSONL to write (default corpus_path)");
    ingest->add_option("--report", ingest_report, "Write the IngestReport JSON here instead of stdout");

    // index
    auto* index = app.add_subcommand("index", "Embed the vaccine-specific comments of a corpus into an index");
    std::string index_corpus, index_out;
    index->add_option("--corpus", index_corpus, "Corpus JSONL (default corpus_path)");
    index->add_option("--out", index_out, "Index file (default index_path)");

    // query
    auto* query = app.add_subcommand("query", "Answer one query against the index");
    std::string query_text, query_mode = "answer_question", query_vaccine, query_index, query_corpus;
    std::optional<double> query_k;
    bool query_json = false;
    query->add_option("text", query_text, "Query text")->required();
    query->add_option("--mode", query_mode, "answer_question|topics_of_discussion|summarise|public_concerns");
    query->add_option("--k-percent", query_k, "First-iteration breadth in percent of the index");
    query->add_option("--vaccine-filter", query_vaccine, "Only use comments tagged with this vaccine");
    query->add_option("--index", query_index, "Index file (default index_path)");
    query->add_option("--corpus", query_corpus, "Corpus JSONL (default corpus_path)");
    query->add_flag("--json", query_json, "Print the full QueryResponse JSON");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::optional<std::string> serve_host;
    std::optional<int> serve_port;
    serve->add_option("--host", serve_host, "Listen host");
    serve->add_option("--port", serve_port, "Listen port (0 picks a free port)");

    // gen-testcases
    auto* gen = app.add_subcommand("gen-testcases", "Generate synthetic evaluation test cases");
    std::string gen_corpus, gen_out, gen_mode_mix, gen_difficulty_mix;
    std::size_t gen_n = 100;
    std::uint64_t gen_seed = 42;
    gen->add_option("--corpus", gen_corpus, "Corpus JSONL (default corpus_path)");
    gen->add_option("--out", gen_out, "Test case JSONL to write")->required();
    gen->add_option("-n,--count", gen_n, "Number of test cases")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Shuffle seed");
    gen->add_option("--mode-mix", gen_mode_mix,
                    "Weights for answer_question,topics_of_discussion,summarise,public_concerns");
    gen->add_option("--difficulty-mix", gen_difficulty_mix, "Weights for simple,reasoning,multi_context");

    // eval
    auto* eval = app.add_subcommand("eval", "Score the pipeline on a test case file");
    std::string eval_cases, eval_format = "table", eval_out, eval_index, eval_corpus;
    std::optional<double> min_cp, min_cr, min_f, min_ar;
    eval->add_option("--testcases", eval_cases, "Test case JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--format", eval_format, "table|json")->check(CLI::IsMember({"table", "json"}));
    eval->add_option("--out", eval_out, "Write the report here instead of stdout");
    eval->add_option("--index", eval_index, "Index file (default index_path)");
    eval->add_option("--corpus", eval_corpus, "Corpus JSONL (default corpus_path)");
    eval->add_option("--min-context-precision", min_cp, "Fail if the second-iteration average is lower");
    eval->add_option("--min-context-recall", min_cr, "Fail if the second-iteration average is lower");
    eval->add_option("--min-faithfulness", min_f, "Fail if any mode's average is lower");
    eval->add_option("--min-answer-relevancy", min_ar, "Fail if any mode's average is lower");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        set_log_level(log_level == "debug"  ? LogLevel::debug
                      : log_level == "warn" ? LogLevel::warn
                      : log_level == "error" ? LogLevel::error
                                             : LogLevel::info);
        auto cfg = ServiceConfig::load(config_path);
        if (deterministic) cfg.deterministic = true;

        if (*ingest) {
            if (!ingest_out.empty()) cfg.corpus_path = ingest_out;
            Engine engine(cfg);
            const auto corpus = engine.build_corpus(ingest_in, ingest_vaccine.empty() ? cfg.vaccine : ingest_vaccine);
            write_corpus_jsonl(cfg.corpus_path, corpus.comments);
            write_text(ingest_report, json(corpus.report).dump(2) + "\n");
            log_event(LogLevel::info, "corpus_written",
                      {{"path", cfg.corpus_path.string()}, {"comments", corpus.comments.size()}});
            return 0;
        }
        if (*index) {
            if (!index_corpus.empty()) cfg.corpus_path = index_corpus;
            if (!index_out.empty()) cfg.index_path = index_out;
            Engine engine(cfg);
            engine.load_comments(read_corpus_jsonl(cfg.corpus_path));
            engine.persist_index();
            std::cout << json{{"index_path", cfg.index_path.string()}, {"index_size", engine.index_size()}}.dump()
                      << "\n";
            return 0;
        }

        auto boot = [&](const std::string& idx, const std::string& corpus) {
            if (!idx.empty()) cfg.index_path = idx;
            if (!corpus.empty()) cfg.corpus_path = corpus;
            log_event(LogLevel::info, "config", cfg.to_json());
            auto engine = std::make_unique<Engine>(cfg);
            engine->boot();
            return engine;
        };

        if (*query) {
            const auto mode = parse_mode(query_mode);
            if (!mode) {
                std::cerr << "error: unknown mode '" << query_mode
                          << "' (expected answer_question, topics_of_discussion, summarise or public_concerns)\n";
                return kExitUsage;
            }
            auto engine = boot(query_index, query_corpus);
            QueryRequest req;
            req.query_text = query_text;
            req.mode = *mode;
            req.overrides.k_percent = query_k;
            if (!query_vaccine.empty()) req.vaccine_filter = text::to_lower(query_vaccine);
            const auto outcome = engine->query(req);
            std::cout << (query_json ? query_response(outcome).dump(2) + "\n" : render_answer(outcome));
            return 0;
        }
        if (*serve) {
            if (serve_host) cfg.listen_host = *serve_host;
            if (serve_port) cfg.listen_port = *serve_port;
            cfg.validate();
            auto engine = boot({}, {});
            Server server(*engine);
            const int port = server.bind();
            std::cout << "listening on http://" << cfg.listen_host << ":" << port << std::endl;
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.run();
            g_server = nullptr;
            return 0;
        }
        if (*gen) {
            auto engine = boot({}, gen_corpus);
            TestGenOptions opts;
            opts.n_total = gen_n;
            opts.seed = gen_seed;
            if (!gen_mode_mix.empty()) opts.mode_mix = parse_mix<4>(gen_mode_mix, "--mode-mix");
            if (!gen_difficulty_mix.empty()) opts.difficulty_mix = parse_mix<3>(gen_difficulty_mix, "--difficulty-mix");
            const auto result = engine->generate_testcases(opts);
            write_testcases_jsonl(gen_out, result.cases);
            std::map<std::string, std::size_t> by_mode, by_difficulty;
            for (const auto& c : result.cases) {
                ++by_mode[std::string(to_string(c.mode))];
                ++by_difficulty[std::string(to_string(c.difficulty))];
            }
            const json counts{{"mode", by_mode}, {"difficulty", by_difficulty}};
            std::cout << json{{"written", result.cases.size()},
                              {"skipped", result.skipped},
                              {"warnings", result.warnings},
                              {"counts", counts}}
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (*eval) {
            auto engine = boot(eval_index, eval_corpus);
            const auto cases = read_testcases_jsonl(eval_cases);
            const auto report = engine->evaluate(cases);
            write_text(eval_out, eval_format == "json" ? json(report).dump(2) + "\n" : render_tables(report));
            auto thresholds = cfg.thresholds;
            if (min_cp) thresholds.min_context_precision = min_cp;
            if (min_cr) thresholds.min_context_recall = min_cr;
            if (min_f) thresholds.min_faithfulness = min_f;
            if (min_ar) thresholds.min_answer_relevancy = min_ar;
            const auto violations = check_thresholds(report, thresholds);
            for (const auto& v : violations) {
                std::cerr << "threshold violated: " << v << "\n";
            }
            return violations.empty() ? 0 : kExitThresholds;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
