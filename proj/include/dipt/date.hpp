#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dipt {

// Calendar date without time zone.
using Date = std::chrono::sys_days;
// Local wall-clock timestamp, second resolution.
using DateTime = std::chrono::sys_seconds;

// YYYY-MM-DD; nullopt on any syntax or range error.
std::optional<Date> parse_date(std::string_view text);
// YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS] or with a space instead of 'T'.
std::optional<DateTime> parse_datetime(std::string_view text);

std::string format_date(Date d);
std::string format_datetime(DateTime t);

inline Date date_of(DateTime t) { return std::chrono::floor<std::chrono::days>(t); }
inline long days_between(Date from, Date to) { return (to - from).count(); }
inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }

}  // namespace dipt
