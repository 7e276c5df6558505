#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace aqua {

// Calendar date stored as a day count since 1970-01-01, so differences and
// cadence arithmetic are plain integer operations. Conversions use the
// proleptic Gregorian civil-calendar algorithms.
class Date {
public:
    Date() = default;
    explicit Date(int32_t days) : days_(days) {}

    static Date from_ymd(int year, int month, int day);

    // Strict "YYYY-MM-DD". Throws std::invalid_argument on malformed input or
    // an impossible calendar day.
    static Date parse(const std::string& iso);

    int32_t days() const { return days_; }
    int year() const;
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
    Date operator+(int32_t d) const { return Date(days_ + d); }
    Date operator-(int32_t d) const { return Date(days_ - d); }
    int32_t operator-(const Date& o) const { return days_ - o.days_; }

private:
    int32_t days_ = 0;
};

}  // namespace aqua
