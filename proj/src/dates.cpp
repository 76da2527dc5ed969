#include "lookplan/dates.hpp"

#include <chrono>
#include <cstdio>

#include "lookplan/errors.hpp"

namespace lookplan {

namespace {

std::chrono::year_month_day to_ymd(int serial) {
  return std::chrono::year_month_day{
      std::chrono::sys_days{std::chrono::days{serial}}};
}

}  // namespace

Date::Date(int year, int month, int day) {
  std::chrono::year_month_day ymd{std::chrono::year{year},
                                  std::chrono::month{unsigned(month)},
                                  std::chrono::day{unsigned(day)}};
  require(ymd.ok(), ErrorCode::ParseError,
          "invalid calendar date " + std::to_string(year) + "-" +
              std::to_string(month) + "-" + std::to_string(day));
  serial_ = int(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse(std::string_view iso) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  std::string text(iso);
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 ||
      text.size() != 10) {
    raise(ErrorCode::ParseError, "expected YYYY-MM-DD, got '" + text + "'");
  }
  return Date(y, m, d);
}

int Date::year() const { return int(to_ymd(serial_).year()); }
int Date::month() const { return int(unsigned(to_ymd(serial_).month())); }
int Date::day() const { return int(unsigned(to_ymd(serial_).day())); }

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year(), month(), day());
  return buf;
}

int Date::iso_weekday() const {
  std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{serial_}}};
  return int(wd.iso_encoding());
}

std::vector<Date> working_days(Date first, Date last, const std::set<Date>& excluded) {
  std::vector<Date> out;
  for (Date d = first; d <= last; ++d) {
    if (!d.is_weekend() && !excluded.contains(d)) out.push_back(d);
  }
  return out;
}

std::vector<Date> next_working_days(Date after, int count, const std::set<Date>& excluded) {
  std::vector<Date> out;
  Date d = after;
  while (int(out.size()) < count) {
    ++d;
    if (!d.is_weekend() && !excluded.contains(d)) out.push_back(d);
  }
  return out;
}

}  // namespace lookplan
