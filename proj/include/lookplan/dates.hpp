#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lookplan {

// Calendar day with ISO-8601 text form. Stored as days since 1970-01-01 so
// date arithmetic is plain integer arithmetic.
class Date {
 public:
  Date() = default;
  Date(int year, int month, int day);

  static Date parse(std::string_view iso);  // strict YYYY-MM-DD
  static Date from_serial(int serial) {
    Date d;
    d.serial_ = serial;
    return d;
  }

  int year() const;
  int month() const;
  int day() const;
  int serial() const { return serial_; }
  std::string iso() const;

  int iso_weekday() const;  // 1 = Monday .. 7 = Sunday
  bool is_weekend() const { return iso_weekday() >= 6; }

  Date operator+(int days) const { return from_serial(serial_ + days); }
  Date operator-(int days) const { return from_serial(serial_ - days); }
  int operator-(const Date& other) const { return serial_ - other.serial_; }
  Date& operator++() {
    ++serial_;
    return *this;
  }
  auto operator<=>(const Date&) const = default;

 private:
  int serial_ = 0;
};

// All non-weekend, non-excluded days in [first, last].
std::vector<Date> working_days(Date first, Date last, const std::set<Date>& excluded = {});

// The `count` working days strictly after `after`.
std::vector<Date> next_working_days(Date after, int count, const std::set<Date>& excluded = {});

}  // namespace lookplan
