#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace droptrace {

// Calendar date (UTC). Thin wrapper over std::chrono::sys_days so dates
// stay ordinal-comparable and cheap to iterate day by day.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : days_(d) {}
  Date(int year, unsigned month, unsigned day)
      : days_(std::chrono::sys_days{std::chrono::year{year} /
                                    std::chrono::month{month} /
                                    std::chrono::day{day}}) {
    auto ymd = std::chrono::year_month_day{days_};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  }

  static Date parse(const std::string& iso);  // "YYYY-MM-DD"
  std::string str() const;

  int year() const { return int(ymd().year()); }
  unsigned month() const { return unsigned(ymd().month()); }
  unsigned day_of_month() const { return unsigned(ymd().day()); }

  std::chrono::sys_days sys() const { return days_; }
  std::int64_t ordinal() const { return days_.time_since_epoch().count(); }

  Date operator+(int n) const { return Date(days_ + std::chrono::days{n}); }
  Date operator-(int n) const { return Date(days_ - std::chrono::days{n}); }
  std::int64_t operator-(const Date& o) const { return (days_ - o.days_).count(); }
  Date& operator++() { days_ += std::chrono::days{1}; return *this; }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  std::chrono::sys_days days_{};
};

// Inclusive date interval.
struct DateInterval {
  Date start;
  Date end;

  bool contains(const Date& d) const { return start <= d && d <= end; }
  std::int64_t length_days() const { return end - start + 1; }
};

}  // namespace droptrace
