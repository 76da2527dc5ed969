#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lookplan/dates.hpp"
#include "lookplan/errors.hpp"

using lookplan::Date;
using lookplan::Error;
using lookplan::ErrorCode;

TEST_CASE("serial numbers count days since 1970-01-01") {
  CHECK(Date(1970, 1, 1).serial() == 0);
  CHECK(Date(1970, 1, 2).serial() == 1);
  CHECK(Date(1969, 12, 31).serial() == -1);
  CHECK(Date(2022, 2, 2).serial() == 19025);
  CHECK(Date(2022, 7, 18).serial() == 19191);
}

TEST_CASE("component accessors invert the construction") {
  // Independent oracle: enumerate day-by-day over a span including two leap
  // years and check serial/component consistency against plain counting.
  Date d(2019, 12, 28);
  int serial = d.serial();
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int y = 2019, m = 12, day = 28;
  for (int step = 0; step < 1200; ++step) {
    Date current(y, m, day);
    CHECK(current.serial() == serial);
    CHECK(current.year() == y);
    CHECK(current.month() == m);
    CHECK(current.day() == day);
    ++serial;
    int len = lengths[m - 1];
    if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) len = 29;
    if (++day > len) {
      day = 1;
      if (++m > 12) {
        m = 1;
        ++y;
      }
    }
  }
}

TEST_CASE("iso text round-trips") {
  CHECK(Date(2022, 2, 2).iso() == "2022-02-02");
  CHECK(Date(2022, 7, 18).iso() == "2022-07-18");
  CHECK(Date::parse("2022-02-02") == Date(2022, 2, 2));
  CHECK(Date::parse(Date(2000, 2, 29).iso()) == Date(2000, 2, 29));
}

TEST_CASE("parse rejects malformed and impossible dates") {
  for (const char* bad : {"2022-2-2", "2022/02/02", "20220202", "2021-02-29", "2022-13-01",
                          "2022-00-10", "2022-04-31", "abcd-ef-gh", "2022-02-02x", ""}) {
    CHECK_THROWS_AS(Date::parse(bad), Error);
  }
}

TEST_CASE("weekday and weekend classification") {
  CHECK(Date(2022, 2, 2).iso_weekday() == 3);   // Wednesday
  CHECK(Date(2022, 7, 18).iso_weekday() == 1);  // Monday
  CHECK(Date(2022, 2, 5).is_weekend());         // Saturday
  CHECK(Date(2022, 2, 6).is_weekend());         // Sunday
  CHECK_FALSE(Date(2022, 2, 7).is_weekend());
}

TEST_CASE("date arithmetic and comparisons") {
  Date d(2022, 2, 2);
  CHECK((d + 5).iso() == "2022-02-07");
  CHECK((d - 2).iso() == "2022-01-31");
  CHECK(Date(2022, 7, 18) - d == 166);
  CHECK(d < Date(2022, 2, 3));
  Date e = d;
  ++e;
  CHECK(e - d == 1);
}

TEST_CASE("working days keep weekdays and drop exclusions") {
  auto days = lookplan::working_days(Date(2022, 2, 2), Date(2022, 2, 8));
  REQUIRE(days.size() == 5);
  CHECK(days.front() == Date(2022, 2, 2));
  CHECK(days[2] == Date(2022, 2, 4));
  CHECK(days[3] == Date(2022, 2, 7));  // the weekend in between is skipped
  CHECK(days.back() == Date(2022, 2, 8));

  auto fewer = lookplan::working_days(Date(2022, 2, 2), Date(2022, 2, 8),
                                      {Date(2022, 2, 3), Date(2022, 2, 6)});
  REQUIRE(fewer.size() == 4);  // Thursday excluded; Sunday was never counted
  CHECK(fewer[1] == Date(2022, 2, 4));
}

TEST_CASE("next working days start strictly after the anchor") {
  auto days = lookplan::next_working_days(Date(2022, 2, 4), 3);  // a Friday
  REQUIRE(days.size() == 3);
  CHECK(days[0] == Date(2022, 2, 7));
  CHECK(days[1] == Date(2022, 2, 8));
  CHECK(days[2] == Date(2022, 2, 9));

  auto skipped = lookplan::next_working_days(Date(2022, 2, 4), 2, {Date(2022, 2, 7)});
  CHECK(skipped[0] == Date(2022, 2, 8));
  CHECK(skipped[1] == Date(2022, 2, 9));
}

TEST_CASE("an 18-working-day horizon lands on the hand-counted end date") {
  // 2022-06-09 is a Thursday: 1 day in week one, then 5+5+5 full weeks,
  // then 2 more days -> the 18th working day is Tuesday 2022-07-05.
  auto days = lookplan::next_working_days(Date(2022, 6, 9), 18);
  REQUIRE(days.size() == 18);
  CHECK(days.front() == Date(2022, 6, 10));
  CHECK(days.back() == Date(2022, 7, 5));
}
