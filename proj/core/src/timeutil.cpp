#include "citysense/timeutil.hpp"

#include <charconv>
#include <cstdio>

namespace citysense {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

static void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

CivilTime civil_from_epoch(std::int64_t epoch_s) {
    std::int64_t days = epoch_s / 86400;
    std::int64_t rem = epoch_s % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    CivilTime t{};
    civil_from_days(days, t.year, t.month, t.day);
    t.hour = static_cast<unsigned>(rem / 3600);
    t.minute = static_cast<unsigned>((rem / 60) % 60);
    t.second = static_cast<unsigned>(rem % 60);
    return t;
}

std::int64_t epoch_from_civil(const CivilTime& t) {
    return days_from_civil(t.year, t.month, t.day) * 86400 + t.hour * 3600 +
           t.minute * 60 + t.second;
}

static bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

std::optional<std::int64_t> parse_iso8601(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SSZ, exactly 20 characters.
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
        s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
        return std::nullopt;
    }
    unsigned y, mo, d, h, mi, se;
    if (!parse_uint(s, 0, 4, y) || !parse_uint(s, 5, 2, mo) || !parse_uint(s, 8, 2, d) ||
        !parse_uint(s, 11, 2, h) || !parse_uint(s, 14, 2, mi) || !parse_uint(s, 17, 2, se)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 59) {
        return std::nullopt;
    }
    CivilTime t{static_cast<int>(y), mo, d, h, mi, se};
    return epoch_from_civil(t);
}

std::string format_iso8601(std::int64_t epoch_s) {
    const CivilTime t = civil_from_epoch(epoch_s);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02uZ", t.year, t.month,
                  t.day, t.hour, t.minute, t.second);
    return buf;
}

int local_seconds_of_day(std::int64_t epoch_s, int utc_offset_minutes) {
    std::int64_t local = epoch_s + static_cast<std::int64_t>(utc_offset_minutes) * 60;
    std::int64_t sod = local % 86400;
    if (sod < 0) sod += 86400;
    return static_cast<int>(sod);
}

int local_slot(std::int64_t epoch_s, int utc_offset_minutes, int step_minutes) {
    return local_seconds_of_day(epoch_s, utc_offset_minutes) / (step_minutes * 60);
}

}  // namespace citysense
