#include "fluxbench/timestamp.hpp"

#include "fluxbench/error.hpp"

#include <charconv>
#include <chrono>

#include <fmt/format.h>

namespace fluxbench {

namespace {
using namespace std::chrono;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

year_month_day civil(std::int64_t day_index) { return year_month_day{sys_days{days{day_index}}}; }
}  // namespace

HourTimestamp HourTimestamp::from_civil(int y, unsigned m, unsigned d, unsigned hour) {
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok() || hour > 23) {
        throw Error(ErrorCode::ParseError, fmt::format("invalid date {}-{}-{} {}h", y, m, d, hour));
    }
    const auto days_since = sys_days{ymd}.time_since_epoch().count();
    return HourTimestamp{static_cast<std::int64_t>(days_since) * 24 + hour};
}

HourTimestamp HourTimestamp::parse(std::string_view text) {
    auto fail = [&]() -> HourTimestamp {
        throw Error(ErrorCode::ParseError, fmt::format("bad ISO-8601 timestamp '{}'", text));
    };
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ')) return fail();
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), mo) || !parse_uint(text.substr(8, 2), d) ||
        !parse_uint(text.substr(11, 2), h)) {
        return fail();
    }
    auto rest = text.substr(13);
    if (!rest.empty()) {
        if (rest.size() < 3 || rest[0] != ':' || !parse_uint(rest.substr(1, 2), mi)) return fail();
        rest = rest.substr(3);
        if (!rest.empty()) {
            if (rest.size() != 3 || rest[0] != ':' || !parse_uint(rest.substr(1, 2), s)) return fail();
        }
    }
    if (mi != 0 || s != 0) {
        throw Error(ErrorCode::ParseError, fmt::format("sub-hourly timestamp '{}'", text));
    }
    return from_civil(y, mo, d, h);
}

std::string HourTimestamp::to_string() const {
    const auto ymd = civil(day_index());
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:00:00", int(ymd.year()), unsigned(ymd.month()),
                       unsigned(ymd.day()), hour_of_day());
}

std::int64_t HourTimestamp::day_index() const { return floor_div(hours_, 24); }
int HourTimestamp::hour_of_day() const { return static_cast<int>(hours_ - day_index() * 24); }
int HourTimestamp::year() const { return calendar::year_of(day_index()); }
int HourTimestamp::day_of_year() const { return calendar::day_of_year(day_index()); }

namespace calendar {

int year_of(std::int64_t day_index) { return int(civil(day_index).year()); }

int day_of_year(std::int64_t day_index) {
    const auto y = civil(day_index).year();
    const auto jan1 = sys_days{y / January / 1};
    return static_cast<int>((sys_days{days{day_index}} - jan1).count()) + 1;
}

int iso_week_key(std::int64_t day_index) {
    const sys_days d{days{day_index}};
    // The ISO week belongs to the year containing its Thursday.
    const unsigned iso_dow = weekday{d}.iso_encoding();  // Mon=1..Sun=7
    const sys_days thursday = d + days{4 - static_cast<int>(iso_dow)};
    const auto wy = year_month_day{thursday}.year();
    const sys_days jan1 = sys_days{wy / January / 1};
    const int week = static_cast<int>((thursday - jan1).count()) / 7 + 1;
    return int(wy) * 100 + week;
}

std::string format_date(std::int64_t day_index) {
    const auto ymd = civil(day_index);
    return fmt::format("{:04d}-{:02d}-{:02d}", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
}

std::string format_iso_week(int key) { return fmt::format("{:04d}-W{:02d}", key / 100, key % 100); }

}  // namespace calendar
}  // namespace fluxbench
