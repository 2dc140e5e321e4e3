#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace vaxrag {

using Timestamp = std::chrono::sys_seconds;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]]" with an optional "Z"
/// or "+HH:MM"/"-HH:MM" offset (a space may replace the "T"). Fractional
/// seconds are truncated. Returns nullopt on anything else.
std::optional<Timestamp> parse_iso8601(std::string_view s);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp t);

} // namespace vaxrag
