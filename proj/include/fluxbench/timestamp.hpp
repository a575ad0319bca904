#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fluxbench {

/// Hour-resolution timestamp, stored as whole hours since 1970-01-01T00:00.
/// Timestamps are treated as written; no timezone conversion is applied.
class HourTimestamp {
public:
    constexpr HourTimestamp() = default;
    constexpr explicit HourTimestamp(std::int64_t hours_since_epoch) : hours_(hours_since_epoch) {}

    static HourTimestamp from_civil(int year, unsigned month, unsigned day, unsigned hour);

    /// Accepts "YYYY-MM-DDTHH[:MM[:SS]]" with 'T' or ' ' separator and an optional
    /// trailing 'Z'. Non-zero minutes or seconds are rejected as sub-hourly.
    static HourTimestamp parse(std::string_view text);

    std::string to_string() const;  // "YYYY-MM-DDTHH:00:00"

    constexpr std::int64_t hours() const { return hours_; }
    std::int64_t day_index() const;  // days since 1970-01-01
    int hour_of_day() const;
    int year() const;
    int day_of_year() const;  // 1..366

    auto operator<=>(const HourTimestamp&) const = default;

private:
    std::int64_t hours_ = 0;
};

/// Calendar helpers on day indices (days since 1970-01-01).
namespace calendar {
int year_of(std::int64_t day_index);
int day_of_year(std::int64_t day_index);
/// ISO-8601 week key encoded as week_year * 100 + week (week in 1..53).
int iso_week_key(std::int64_t day_index);
std::string format_date(std::int64_t day_index);  // "YYYY-MM-DD"
std::string format_iso_week(int key);             // "YYYY-Www"
}  // namespace calendar

}  // namespace fluxbench
