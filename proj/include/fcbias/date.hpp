#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fcbias {

/// A UTC calendar day, stored as days since 1970-01-01. No time of day.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

  static std::optional<Date> parse(std::string_view iso) {
    // Strict YYYY-MM-DD.
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto field = [&](std::size_t pos, std::size_t len, auto& out) {
      for (std::size_t i = pos; i < pos + len; ++i)
        if (iso[i] < '0' || iso[i] > '9') return false;
      auto [p, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
      return ec == std::errc{} && p == iso.data() + pos + len;
    };
    if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
  }

  static Date from_string(std::string_view iso) {
    auto d = parse(iso);
    if (!d) throw std::invalid_argument("invalid date '" + std::string(iso) + "' (expected YYYY-MM-DD)");
    return *d;
  }

  constexpr std::int32_t days() const { return days_; }

  std::chrono::year_month_day ymd() const {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
  }

  int year() const { return static_cast<int>(ymd().year()); }

  std::string to_string() const {
    const auto v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                  static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
    return buf;
  }

  constexpr Date operator+(std::int32_t n) const { return Date(days_ + n); }
  constexpr Date operator-(std::int32_t n) const { return Date(days_ - n); }
  friend constexpr std::int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::int32_t days_ = 0;
};

/// Inclusive [start, end] day interval.
struct DateRange {
  Date start;
  Date end;

  constexpr bool contains(Date d) const { return start <= d && d <= end; }
  friend constexpr bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace fcbias
