#include <doctest.h>

#include <stdexcept>

#include "aqua/date.hpp"

using aqua::Date;

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lens[m - 1];
}

}  // namespace

TEST_CASE("epoch anchor and simple offsets") {
    CHECK(Date::from_ymd(1970, 1, 1).days() == 0);
    CHECK(Date::from_ymd(1970, 1, 2).days() == 1);
    CHECK(Date::from_ymd(1969, 12, 31).days() == -1);
    CHECK(Date::from_ymd(2000, 3, 1).days() == 11017);
    CHECK(Date::from_ymd(2022, 1, 10).to_string() == "2022-01-10");
}

TEST_CASE("round trip against a day-walking oracle") {
    // Walk day by day across several leap boundaries and compare with the
    // incremental calendar.
    int y = 1999, m = 1, d = 1;
    Date cur = Date::from_ymd(y, m, d);
    for (int step = 0; step < 3000; ++step) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
        CHECK(cur.to_string() == buf);
        CHECK(Date::parse(buf) == cur);
        CHECK(cur.year() == y);
        cur = cur + 1;
        if (++d > days_in_month(y, m)) {
            d = 1;
            if (++m > 12) {
                m = 1;
                ++y;
            }
        }
    }
}

TEST_CASE("difference and ordering") {
    const Date a = Date::parse("2022-01-10");
    const Date b = Date::parse("2022-01-22");
    CHECK(b - a == 12);
    CHECK(a - b == -12);
    CHECK(a < b);
    CHECK(a + 12 == b);
    CHECK(b - 12 == a);
}

TEST_CASE("parse rejects malformed strings") {
    CHECK_THROWS_AS(Date::parse("2022-1-10"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022/01/10"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("20220110"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022-01-10x"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("abcd-ef-gh"), std::invalid_argument);
}

TEST_CASE("parse rejects impossible calendar days") {
    CHECK_THROWS_AS(Date::parse("2022-02-29"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022-04-31"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022-13-01"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022-00-10"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2022-01-00"), std::invalid_argument);
    CHECK(Date::parse("2024-02-29").to_string() == "2024-02-29");
}
