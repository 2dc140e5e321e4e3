#include "vaxrag/service/log.hpp"

#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>

#include "vaxrag/timestamp.hpp"

namespace vaxrag::service {
namespace {

std::atomic<LogLevel> g_level{LogLevel::info};
std::mutex g_mutex;

std::string_view level_name(LogLevel l) {
    switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    }
    return "info";
}

} // namespace

void set_log_level(LogLevel level) { g_level.store(level); }

void log_event(LogLevel level, std::string_view event, nlohmann::json fields) {
    if (level < g_level.load()) {
        return;
    }
    nlohmann::json line{{"ts", format_iso8601(std::chrono::time_point_cast<std::chrono::seconds>(
                                   std::chrono::system_clock::now()))},
                        {"level", level_name(level)},
                        {"event", event}};
    if (fields.is_object()) {
        line.update(fields);
    }
    const auto text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::lock_guard lock(g_mutex);
    std::cerr << text << '\n';
}

} // namespace vaxrag::service
