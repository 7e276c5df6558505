#include "aqua/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace aqua {

namespace {

// Howard Hinnant's civil calendar algorithms, days relative to 1970-01-01.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct Ymd {
    int year;
    unsigned month;
    unsigned day;
};

Ymd civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), m, d};
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw std::invalid_argument("date out of range: " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    const Date result(int32_t(days_from_civil(year, unsigned(month), unsigned(day))));
    // Round-trip to reject days like February 30 that slip past the range check.
    const Ymd back = civil_from_days(result.days());
    if (back.year != year || int(back.month) != month || int(back.day) != day)
        throw std::invalid_argument("invalid calendar day: " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    return result;
}

Date Date::parse(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char trailing = 0;
    if (iso.size() != 10 ||
        std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &trailing) != 3)
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + iso + "'");
    return from_ymd(y, m, d);
}

int Date::year() const { return civil_from_days(days_).year; }

std::string Date::to_string() const {
    const Ymd ymd = civil_from_days(days_);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", ymd.year, ymd.month, ymd.day);
    return buf;
}

}  // namespace aqua
