#pragma once
// Timestamps and calendar helpers.
//
// All timestamps are UTC unix seconds (int64). Intervals are closed on
// both ends. Civil-date conversions use the days-from-civil algorithm so
// nothing here depends on the process time zone.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <stdexcept>
#include <string>

namespace hindsight {

using Timestamp = int64_t;  // UTC unix seconds

constexpr Timestamp kSecondsPerDay = 86400;

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
};

struct CivilTime {
    CivilDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
inline int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline Timestamp to_timestamp(const CivilTime& ct) {
    return days_from_civil(ct.date.year, ct.date.month, ct.date.day) * kSecondsPerDay +
           ct.hour * 3600 + ct.minute * 60 + ct.second;
}

inline Timestamp to_timestamp(const CivilDate& d) {
    return to_timestamp(CivilTime{d, 0, 0, 0});
}

inline CivilTime to_civil(Timestamp ts) {
    int64_t days = ts / kSecondsPerDay;
    int64_t rem = ts % kSecondsPerDay;
    if (rem < 0) {
        days -= 1;
        rem += kSecondsPerDay;
    }
    CivilTime ct;
    ct.date = civil_from_days(days);
    ct.hour = static_cast<int>(rem / 3600);
    ct.minute = static_cast<int>((rem % 3600) / 60);
    ct.second = static_cast<int>(rem % 60);
    return ct;
}

// 0 = Sunday .. 6 = Saturday
inline int day_of_week(Timestamp ts) {
    int64_t days = ts / kSecondsPerDay;
    if (ts % kSecondsPerDay < 0) days -= 1;
    int dow = static_cast<int>((days + 4) % 7);  // 1970-01-01 was a Thursday
    return dow < 0 ? dow + 7 : dow;
}

inline const char* day_name(int dow) {
    static const char* names[] = {"Sunday",   "Monday", "Tuesday", "Wednesday",
                                  "Thursday", "Friday", "Saturday"};
    return names[dow % 7];
}

inline const char* month_name(int month) {
    static const char* names[] = {"January", "February", "March",     "April",   "May",      "June",
                                  "July",    "August",   "September", "October", "November", "December"};
    return names[(month - 1) % 12];
}

inline int days_in_month(int year, int month) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

// Midnight at the start of the day containing ts.
inline Timestamp start_of_day(Timestamp ts) {
    int64_t days = ts / kSecondsPerDay;
    if (ts % kSecondsPerDay < 0) days -= 1;
    return days * kSecondsPerDay;
}

// Last second (23:59:59) of the day containing ts.
inline Timestamp end_of_day(Timestamp ts) {
    return start_of_day(ts) + kSecondsPerDay - 1;
}

// "2024-06-09T12:30:00Z"
inline std::string format_iso(Timestamp ts) {
    CivilTime ct = to_civil(ts);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", ct.date.year, ct.date.month,
                  ct.date.day, ct.hour, ct.minute, ct.second);
    return buf;
}

// "Saturday, June 9, 2024" — the human-readable time reference attached to
// facts before embedding and reranking.
inline std::string format_human_date(Timestamp ts) {
    CivilTime ct = to_civil(ts);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s, %s %d, %d", day_name(day_of_week(ts)),
                  month_name(ct.date.month), ct.date.day, ct.date.year);
    return buf;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS" with
// optional trailing "Z". Returns nullopt on anything else.
inline std::optional<Timestamp> parse_iso(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n != 3 && n != 7) return std::nullopt;
    if (n == 7 && sep != 'T' && sep != ' ') return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo)) return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) return std::nullopt;
    return to_timestamp(CivilTime{{y, mo, d}, h, mi, s});
}

inline Timestamp system_now() {
    return static_cast<Timestamp>(std::time(nullptr));
}

}  // namespace hindsight
