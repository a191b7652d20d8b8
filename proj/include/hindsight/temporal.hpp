#pragma once
// Rule-based normalization of temporal expressions into closed UTC ranges.
// Handles explicit dates ("June 2024", "June 9, 2024", "2024-06-09"),
// relative phrases ("yesterday", "last week", "last weekend", "N days ago")
// and combined ranges ("between X and Y", "from X to Y"). Returns nullopt
// when no temporal expression is detected; unresolved expressions may be
// handed to an optional fallback provider by the caller.

#include <cctype>
#include <optional>
#include <string>
#include <utility>

#include "hindsight/text.hpp"
#include "hindsight/time.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

using TimeRange = std::pair<Timestamp, Timestamp>;

namespace temporal_detail {

inline bool boundary(const std::string& s, size_t pos) {
    return pos == 0 || pos >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos]));
}

// Finds `phrase` in folded text at word boundaries.
inline std::optional<size_t> find_phrase(const std::string& folded, const std::string& phrase) {
    size_t pos = 0;
    while ((pos = folded.find(phrase, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(folded[pos - 1]));
        bool right_ok = boundary(folded, pos + phrase.size());
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::nullopt;
}

inline std::optional<int> read_int(const std::string& s, size_t& pos, int max_digits) {
    size_t start = pos;
    int value = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])) &&
           static_cast<int>(pos - start) < max_digits) {
        value = value * 10 + (s[pos] - '0');
        ++pos;
    }
    if (pos == start) return std::nullopt;
    if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) return std::nullopt;
    return value;
}

inline void skip_spaces(const std::string& s, size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == ',')) ++pos;
}

inline TimeRange day_range(Timestamp any_second_of_day) {
    return {start_of_day(any_second_of_day), end_of_day(any_second_of_day)};
}

inline TimeRange month_range(int year, int month) {
    Timestamp start = to_timestamp(CivilDate{year, month, 1});
    Timestamp end = start + static_cast<Timestamp>(days_in_month(year, month)) * kSecondsPerDay - 1;
    return {start, end};
}

// Start of the Monday beginning the week that contains ts.
inline Timestamp week_monday(Timestamp ts) {
    int dow = day_of_week(ts);                 // 0 = Sunday .. 6 = Saturday
    int days_since_monday = (dow + 6) % 7;     // Monday -> 0
    return start_of_day(ts) - static_cast<Timestamp>(days_since_monday) * kSecondsPerDay;
}

// "2024-06-09" anywhere in the text, digit-bounded.
inline std::optional<TimeRange> parse_iso_date(const std::string& folded) {
    for (size_t i = 0; i + 10 <= folded.size(); ++i) {
        bool shape = std::isdigit(static_cast<unsigned char>(folded[i])) &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 1])) &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 2])) &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 3])) &&
                     folded[i + 4] == '-' &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 5])) &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 6])) &&
                     folded[i + 7] == '-' &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 8])) &&
                     std::isdigit(static_cast<unsigned char>(folded[i + 9]));
        if (!shape) continue;
        if (i > 0 && std::isdigit(static_cast<unsigned char>(folded[i - 1]))) continue;
        if (i + 10 < folded.size() && std::isdigit(static_cast<unsigned char>(folded[i + 10])))
            continue;
        int y = std::stoi(folded.substr(i, 4));
        int m = std::stoi(folded.substr(i + 5, 2));
        int d = std::stoi(folded.substr(i + 8, 2));
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) continue;
        return day_range(to_timestamp(CivilDate{y, m, d}));
    }
    return std::nullopt;
}

// "<month> <day>, <year>" -> day span; "<month> <year>" -> month span;
// "in <month>" -> that month of now's year. "may" needs the digit or
// preposition to avoid the modal verb.
inline std::optional<TimeRange> parse_month_expression(const std::string& folded, Timestamp now) {
    for (int m = 1; m <= 12; ++m) {
        std::string name = to_lower(month_name(m));
        auto found = find_phrase(folded, name);
        if (!found) continue;
        size_t pos = *found;
        size_t after = pos + name.size();
        skip_spaces(folded, after);

        size_t cursor = after;
        auto first_num = read_int(folded, cursor, 4);
        if (first_num) {
            if (*first_num >= 1000) {
                return month_range(*first_num, m);  // "june 2024"
            }
            int day = *first_num;
            skip_spaces(folded, cursor);
            auto year_num = read_int(folded, cursor, 4);
            if (year_num && *year_num >= 1000 && day >= 1 && day <= days_in_month(*year_num, m)) {
                return day_range(to_timestamp(CivilDate{*year_num, m, day}));  // "june 9, 2024"
            }
            if (day >= 1 && day <= 31 && m != 5) {
                // "june 9" without a year: use now's year
                int y = to_civil(now).date.year;
                if (day <= days_in_month(y, m)) return day_range(to_timestamp(CivilDate{y, m, day}));
            }
            continue;
        }
        bool has_in = pos >= 3 && folded.compare(pos - 3, 3, "in ") == 0;
        if (has_in && m != 5) {
            return month_range(to_civil(now).date.year, m);  // "in june"
        }
        if (has_in && m == 5) {
            return month_range(to_civil(now).date.year, m);  // "in may" is unambiguous enough
        }
    }
    return std::nullopt;
}

inline std::optional<TimeRange> parse_relative(const std::string& folded, Timestamp now) {
    if (find_phrase(folded, "yesterday")) return day_range(now - kSecondsPerDay);
    if (find_phrase(folded, "today")) return day_range(now);
    if (find_phrase(folded, "tomorrow")) return day_range(now + kSecondsPerDay);

    Timestamp monday = week_monday(now);
    if (find_phrase(folded, "last weekend"))
        return TimeRange{monday - 2 * kSecondsPerDay, monday - 1};
    if (find_phrase(folded, "this weekend"))
        return TimeRange{monday + 5 * kSecondsPerDay, monday + 7 * kSecondsPerDay - 1};
    if (find_phrase(folded, "last week"))
        return TimeRange{monday - 7 * kSecondsPerDay, monday - 1};
    if (find_phrase(folded, "this week"))
        return TimeRange{monday, monday + 7 * kSecondsPerDay - 1};

    CivilDate today = to_civil(now).date;
    if (find_phrase(folded, "last month")) {
        int months = today.year * 12 + (today.month - 1) - 1;
        return month_range(months / 12, months % 12 + 1);
    }
    if (find_phrase(folded, "this month")) return month_range(today.year, today.month);
    if (find_phrase(folded, "last year")) {
        return TimeRange{to_timestamp(CivilDate{today.year - 1, 1, 1}),
                         to_timestamp(CivilDate{today.year, 1, 1}) - 1};
    }

    // "N days ago", "N weeks ago", "N months ago"
    for (size_t i = 0; i < folded.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(folded[i]))) continue;
        if (i > 0 && std::isalnum(static_cast<unsigned char>(folded[i - 1]))) continue;
        size_t cursor = i;
        auto n = read_int(folded, cursor, 5);
        if (!n) continue;
        while (cursor < folded.size() && folded[cursor] == ' ') ++cursor;
        auto unit_is = [&](const char* unit) {
            std::string u(unit);
            return folded.compare(cursor, u.size(), u) == 0 &&
                   boundary(folded, cursor + u.size()) &&
                   folded.find(" ago", cursor + u.size()) == cursor + u.size();
        };
        if (unit_is("days") || unit_is("day")) return day_range(now - *n * kSecondsPerDay);
        if (unit_is("weeks") || unit_is("week")) {
            Timestamp then = now - *n * 7 * kSecondsPerDay;
            Timestamp then_monday = week_monday(then);
            return TimeRange{then_monday, then_monday + 7 * kSecondsPerDay - 1};
        }
        if (unit_is("months") || unit_is("month")) {
            int months = today.year * 12 + (today.month - 1) - *n;
            return month_range(months / 12, months % 12 + 1);
        }
    }
    return std::nullopt;
}

}  // namespace temporal_detail

// Normalizes the first temporal expression found in query_text to a closed
// [start, end] range relative to `now`. Throws ValidationError when a
// combined range parses inverted (start > end).
inline std::optional<TimeRange> parse_temporal(const std::string& query_text, Timestamp now) {
    using namespace temporal_detail;
    std::string folded = to_lower(query_text);

    // Combined ranges first: "between X and Y", "from X to Y".
    for (auto [open_kw, join_kw] : {std::pair<const char*, const char*>{"between", " and "},
                                    std::pair<const char*, const char*>{"from", " to "}}) {
        auto open = find_phrase(folded, open_kw);
        if (!open) continue;
        size_t body = *open + std::string(open_kw).size();
        size_t join = folded.find(join_kw, body);
        if (join == std::string::npos) continue;
        std::string left = folded.substr(body, join - body);
        std::string right = folded.substr(join + std::string(join_kw).size());
        auto lr = parse_temporal(left, now);
        auto rr = parse_temporal(right, now);
        if (lr && rr) {
            if (lr->first > rr->second)
                throw ValidationError("contradictory temporal range: start after end");
            return TimeRange{lr->first, rr->second};
        }
    }

    if (auto r = parse_iso_date(folded)) return r;
    if (auto r = parse_month_expression(folded, now)) return r;
    if (auto r = parse_relative(folded, now)) return r;
    return std::nullopt;
}

}  // namespace hindsight
