#include "vaxrag/timestamp.hpp"

#include <cstdio>

namespace vaxrag {
namespace {

bool read_int(std::string_view s, std::size_t& pos, std::size_t width, int& out) {
    if (pos + width > s.size()) {
        return false;
    }
    int v = 0;
    for (std::size_t k = 0; k < width; ++k) {
        const char c = s[pos + k];
        if (c < '0' || c > '9') {
            return false;
        }
        v = v * 10 + (c - '0');
    }
    pos += width;
    out = v;
    return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

} // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s) {
    using namespace std::chrono;
    std::size_t pos = 0;
    int y = 0, mo = 0, d = 0;
    if (!read_int(s, pos, 4, y) || !expect(s, pos, '-') || !read_int(s, pos, 2, mo) ||
        !expect(s, pos, '-') || !read_int(s, pos, 2, d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    int hh = 0, mm = 0, ss = 0;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') {
            return std::nullopt;
        }
        ++pos;
        if (!read_int(s, pos, 2, hh) || !expect(s, pos, ':') || !read_int(s, pos, 2, mm)) {
            return std::nullopt;
        }
        if (expect(s, pos, ':')) {
            if (!read_int(s, pos, 2, ss)) {
                return std::nullopt;
            }
            if (expect(s, pos, '.')) {
                const auto frac_start = pos;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                    ++pos;
                }
                if (pos == frac_start) {
                    return std::nullopt;
                }
            }
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) {
        return std::nullopt;
    }
    int offset_minutes = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' || s[pos] == 'z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            ++pos;
            int oh = 0, om = 0;
            if (!read_int(s, pos, 2, oh)) {
                return std::nullopt;
            }
            expect(s, pos, ':');
            if (!read_int(s, pos, 2, om) || oh > 23 || om > 59) {
                return std::nullopt;
            }
            offset_minutes = sign * (oh * 60 + om);
        }
    }
    if (pos != s.size()) {
        return std::nullopt;
    }
    const sys_seconds t = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
    return t;
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(t);
    const year_month_day ymd{days};
    const hh_mm_ss hms{t - days};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

} // namespace vaxrag
