#pragma once

#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace macrocast {

/// Calendar month. The default comparison (year, then month) is calendar order.
struct MonthStamp {
    int year = 1900;
    int month = 1;

    constexpr MonthStamp() = default;
    constexpr MonthStamp(int y, int m) : year(y), month(m) {
        if (y < 1900 || m < 1 || m > 12) {
            throw std::invalid_argument("MonthStamp: year must be >= 1900 and month in 1..12");
        }
    }

    friend constexpr auto operator<=>(const MonthStamp&, const MonthStamp&) = default;
};

/// Signed number of months from `from` to `to` (zero when equal).
constexpr int months_between(MonthStamp from, MonthStamp to) {
    return (to.year - from.year) * 12 + (to.month - from.month);
}

/// Stamp `months` months after `s` (negative moves backwards). Rolls years.
constexpr MonthStamp advance(MonthStamp s, int months) {
    const int index = s.year * 12 + (s.month - 1) + months;
    return MonthStamp(index / 12, index % 12 + 1);
}

constexpr MonthStamp successor(MonthStamp s) { return advance(s, 1); }

inline std::string to_string(MonthStamp s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", s.year, s.month);
    return buf;
}

namespace detail {
inline bool parse_int(std::string_view text, int& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}
}  // namespace detail

/// Parses "YYYY-MM". Returns nullopt on any malformation.
inline std::optional<MonthStamp> parse_month(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    if (!detail::parse_int(text.substr(0, 4), y)) return std::nullopt;
    if (!detail::parse_int(text.substr(5, 2), m)) return std::nullopt;
    if (y < 1900 || m < 1 || m > 12) return std::nullopt;
    return MonthStamp(y, m);
}

/// Parses an ISO date "YYYY-MM-DD" into (month, day-of-month).
inline std::optional<std::pair<MonthStamp, int>> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto stamp = parse_month(text.substr(0, 7));
    if (!stamp) return std::nullopt;
    int day = 0;
    if (!detail::parse_int(text.substr(8, 2), day)) return std::nullopt;
    if (day < 1 || day > 31) return std::nullopt;
    return std::make_pair(*stamp, day);
}

}  // namespace macrocast
