#include "skycast/core/date.hpp"

#include <charconv>
#include <cstdio>

#include "skycast/core/error.hpp"

namespace skycast {

using namespace std::chrono;

Date make_date(int y, unsigned m, unsigned d) {
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw DomainError("invalid calendar date");
    return sys_days{ymd};
}

Date parse_date(std::string_view text) {
    auto field = [&](std::size_t pos, std::size_t len) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
        if (ec != std::errc{} || ptr != text.data() + pos + len)
            throw InputError("malformed date '" + std::string(text) + "'");
        return value;
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw InputError("malformed date '" + std::string(text) + "'");
    year_month_day ymd{year{field(0, 4)}, month{static_cast<unsigned>(field(5, 2))},
                       day{static_cast<unsigned>(field(8, 2))}};
    if (!ymd.ok()) throw InputError("invalid date '" + std::string(text) + "'");
    return sys_days{ymd};
}

std::string format_date(Date date) {
    year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date add_months(Date date, int months) {
    year_month_day ymd{date};
    year_month_day shifted = ymd + std::chrono::months{months};
    if (!shifted.ok()) shifted = shifted.year() / shifted.month() / last;
    return sys_days{shifted};
}

int day_of_week(Date date) {
    return static_cast<int>(weekday{date}.iso_encoding()) - 1;
}

int week_of_year(Date date) {
    year_month_day ymd{date};
    Date jan1 = sys_days{ymd.year() / January / 1};
    return days_between(date, jan1) / 7;
}

}  // namespace skycast
