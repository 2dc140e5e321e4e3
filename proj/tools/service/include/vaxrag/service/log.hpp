#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace vaxrag::service {

enum class LogLevel { debug, info, warn, error };

/// Writes one JSON object per line to stderr:
/// {"ts":..., "level":..., "event":..., <fields>}. Thread-safe.
void log_event(LogLevel level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

/// Messages below `level` are discarded. Default: info.
void set_log_level(LogLevel level);

} // namespace vaxrag::service
