#include <gtest/gtest.h>

#include <ctime>

#include "evload/civil_time.hpp"

using namespace evload;

TEST(CivilTime, EpochAndKnownDates) {
  EXPECT_EQ(make_date(1970, 1, 1).days, 0);
  EXPECT_EQ(make_date(2000, 3, 1).days, 11017);
  EXPECT_EQ(make_date(2020, 2, 29).days - make_date(2020, 2, 28).days, 1);
}

// Oracle: timegm agrees with the civil-date arithmetic over a wide span.
TEST(CivilTime, AgreesWithTimegm) {
  for (int y = 1990; y <= 2040; ++y)
    for (int m = 1; m <= 12; ++m) {
      std::tm tm{};
      tm.tm_year = y - 1900;
      tm.tm_mon = m - 1;
      tm.tm_mday = 15;
      const auto days = static_cast<long>(timegm(&tm) / 86400);
      EXPECT_EQ(make_date(y, m, 15).days, days) << y << "-" << m;
    }
}

TEST(CivilTime, RoundTripThroughCivil) {
  for (int d = -1000; d < 30000; d += 7) {
    const auto c = to_civil(Date{d});
    EXPECT_EQ(make_date(c.year, c.month, c.day).days, d);
  }
}

TEST(CivilTime, WeekdayMondayIsZero) {
  EXPECT_EQ(weekday(make_date(2022, 1, 3)), 0);  // Monday
  EXPECT_EQ(weekday(make_date(2022, 1, 9)), 6);  // Sunday
  EXPECT_TRUE(is_weekend(make_date(2022, 1, 8)));
  EXPECT_FALSE(is_weekend(make_date(2022, 1, 7)));
}

TEST(CivilTime, DaysInMonth) {
  EXPECT_EQ(days_in_month(2020, 2), 29);
  EXPECT_EQ(days_in_month(2021, 2), 28);
  EXPECT_EQ(days_in_month(1900, 2), 28);
  EXPECT_EQ(days_in_month(2000, 2), 29);
  EXPECT_EQ(days_in_month(2021, 4), 30);
}

TEST(CivilTime, MonthKeyArithmetic) {
  const auto m = month_key(make_date(2021, 12, 31));
  EXPECT_EQ(m.year(), 2021);
  EXPECT_EQ(m.month(), 12);
  const MonthKey next{m.index + 1};
  EXPECT_EQ(next.year(), 2022);
  EXPECT_EQ(next.month(), 1);
  EXPECT_EQ(format_date(last_day_of(MonthKey{month_key(make_date(2024, 2, 1))})), "2024-02-29");
  EXPECT_EQ(format_month(m), "2021-12");
}

TEST(CivilTime, ParseAndFormat) {
  const auto d = parse_date("2021-03-04");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_date(*d), "2021-03-04");
  const auto t = parse_timestamp("2021-03-04T23:59");
  ASSERT_TRUE(t);
  EXPECT_EQ(t->minute_of_day(), 23 * 60 + 59);
  EXPECT_EQ(t->date(), *d);
  EXPECT_EQ(format_timestamp(*t), "2021-03-04T23:59");
  EXPECT_FALSE(parse_date("2021-02-30"));
  EXPECT_FALSE(parse_date("2021-3-04"));
  EXPECT_FALSE(parse_timestamp("2021-03-04T24:00"));
  EXPECT_FALSE(parse_timestamp("2021-03-04 10:00"));
}

TEST(CivilTime, DateRange) {
  const auto r = parse_date_range("2021-01-01:2021-01-31");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->length(), 31);
  EXPECT_TRUE(r->contains(make_date(2021, 1, 31)));
  EXPECT_FALSE(r->contains(make_date(2021, 2, 1)));
  EXPECT_FALSE(parse_date_range("2021-01-01"));
}
