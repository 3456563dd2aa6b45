#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citysense {

// All instants are UTC epoch seconds. Conversions below implement the
// proleptic Gregorian calendar (no leap seconds), which is what ISO-8601
// timestamps in the ingest files encode.

/// Days since 1970-01-01 for a civil date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

struct CivilTime {
    int year;
    unsigned month, day, hour, minute, second;
};

CivilTime civil_from_epoch(std::int64_t epoch_s);

std::int64_t epoch_from_civil(const CivilTime& t);

/// Parses "YYYY-MM-DDTHH:MM:SSZ". Returns nullopt on any malformation.
std::optional<std::int64_t> parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(std::int64_t epoch_s);

/// Index of the time-of-day slot that `epoch_s` falls in, after shifting to
/// local civil time. step_minutes must divide 1440.
int local_slot(std::int64_t epoch_s, int utc_offset_minutes, int step_minutes);

/// Seconds since local midnight.
int local_seconds_of_day(std::int64_t epoch_s, int utc_offset_minutes);

constexpr int kMinutesPerDay = 1440;

}  // namespace citysense
