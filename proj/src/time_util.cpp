#include "egir/time_util.hpp"

#include <cstdio>

#include "egir/errors.hpp"

namespace egir {

namespace {

// Howard Hinnant's civil-date algorithms; valid across the proleptic
// Gregorian calendar.
int64_t days_from_civil(int64_t y, int64_t m, int64_t d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int64_t& y, int64_t& m, int64_t& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

int64_t iso8601_parse(const std::string& s) {
    // YYYY-MM-DD[T ]HH:MM:SS[Z]
    std::string t = s;
    if (!t.empty() && t.back() == 'Z') t.pop_back();
    auto fail = [&]() -> int64_t {
        throw DataError("timestamp '" + s + "' is not ISO-8601 (YYYY-MM-DDTHH:MM:SS)");
    };
    if (t.size() != 19) return fail();
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u, 11u, 12u, 14u, 15u, 17u, 18u}) {
        if (!is_digit(t[i])) return fail();
    }
    if (t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':' || t[16] != ':') {
        return fail();
    }
    auto num = [&](size_t pos, size_t len) {
        int64_t v = 0;
        for (size_t i = 0; i < len; ++i) v = v * 10 + (t[pos + i] - '0');
        return v;
    };
    int64_t year = num(0, 4), month = num(5, 2), day = num(8, 2);
    int64_t hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 59) {
        return fail();
    }
    return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string iso8601_format(int64_t epoch_seconds) {
    int64_t days = epoch_seconds / 86400;
    int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int64_t y, m, d;
    civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lldT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), static_cast<long long>(m), static_cast<long long>(d),
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

} // namespace egir
