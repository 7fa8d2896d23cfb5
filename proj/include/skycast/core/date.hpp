#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace skycast {

using Date = std::chrono::sys_days;

Date make_date(int y, unsigned m, unsigned d);

/// Parses YYYY-MM-DD; throws InputError on malformed text.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Signed difference a - b in days.
inline int days_between(Date a, Date b) { return static_cast<int>((a - b).count()); }

inline Date add_days(Date date, int n) { return date + std::chrono::days{n}; }

Date add_months(Date date, int months);

/// Monday = 0 ... Sunday = 6.
int day_of_week(Date date);

/// Zero-based week of year: (day_of_year - 1) / 7, in [0, 52].
int week_of_year(Date date);

}  // namespace skycast
