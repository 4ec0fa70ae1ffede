#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "wise/attribute.hpp"

namespace {

using namespace std::chrono;
using wise::Timestamp;

Timestamp utc(int y, unsigned m, unsigned d, int hh = 0, int mm = 0, int ss = 0, int ms = 0) {
  return sys_days{year{y} / month{m} / day{d}} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{ms};
}

TEST(Iso8601, ParsesFullForm) {
  EXPECT_EQ(wise::parse_iso8601("2019-01-01T10:20:30.456Z"), utc(2019, 1, 1, 10, 20, 30, 456));
  EXPECT_EQ(wise::parse_iso8601("2019-01-01T10:20:30Z"), utc(2019, 1, 1, 10, 20, 30));
  EXPECT_EQ(wise::parse_iso8601("2019-01-01"), utc(2019, 1, 1));
  EXPECT_EQ(wise::parse_iso8601("2019-01-01T10:20"), utc(2019, 1, 1, 10, 20));
}

TEST(Iso8601, AppliesOffsets) {
  EXPECT_EQ(wise::parse_iso8601("2019-01-01T10:00:00+02:00"), utc(2019, 1, 1, 8));
  EXPECT_EQ(wise::parse_iso8601("2019-01-01T00:30:00-01:00"), utc(2019, 1, 1, 1, 30));
}

TEST(Iso8601, TruncatesSubMillisecondDigits) {
  EXPECT_EQ(wise::parse_iso8601("2020-02-29T23:59:59.9999Z"), utc(2020, 2, 29, 23, 59, 59, 999));
}

TEST(Iso8601, RejectsGarbage) {
  EXPECT_FALSE(wise::parse_iso8601(""));
  EXPECT_FALSE(wise::parse_iso8601("yesterday"));
  EXPECT_FALSE(wise::parse_iso8601("2019-13-01"));
  EXPECT_FALSE(wise::parse_iso8601("2019-02-30"));
  EXPECT_FALSE(wise::parse_iso8601("2019-01-01T25:00:00Z"));
  EXPECT_FALSE(wise::parse_iso8601("2019-01-01T10:00:00Zjunk"));
}

TEST(Iso8601, FormatsCanonically) {
  EXPECT_EQ(wise::format_iso8601(utc(2019, 1, 1, 0, 0, 0, 5)), "2019-01-01T00:00:00.005Z");
  EXPECT_EQ(wise::format_iso8601(utc(1969, 12, 31, 23, 59, 59, 999)), "1969-12-31T23:59:59.999Z");
}

// Round trip at millisecond precision, checked against std::chrono's calendar.
TEST(Iso8601, RoundTripsRandomInstants) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> ms(-2'000'000'000'000LL, 4'000'000'000'000LL);
  for (int i = 0; i < 20000; ++i) {
    const Timestamp t{milliseconds{ms(rng)}};
    const std::string text = wise::format_iso8601(t);
    const auto back = wise::parse_iso8601(text);
    ASSERT_TRUE(back) << text;
    ASSERT_EQ(*back, t) << text;
    const year_month_day ymd{floor<days>(t)};
    ASSERT_EQ(std::stoi(text.substr(0, 4)), static_cast<int>(ymd.year())) << text;
    ASSERT_EQ(std::stoi(text.substr(5, 2)), static_cast<int>(static_cast<unsigned>(ymd.month()))) << text;
    ASSERT_EQ(std::stoi(text.substr(8, 2)), static_cast<int>(static_cast<unsigned>(ymd.day()))) << text;
  }
}

TEST(ParseWithFormat, UsesPattern) {
  EXPECT_EQ(wise::parse_with_format("01/02/2019 13:45", "%d/%m/%Y %H:%M"), utc(2019, 2, 1, 13, 45));
  EXPECT_EQ(wise::parse_with_format("2019-02-01 13:45:10.250", "%Y-%m-%d %H:%M:%S"), utc(2019, 2, 1, 13, 45, 10, 250));
  EXPECT_FALSE(wise::parse_with_format("not a date", "%Y-%m-%d"));
}

TEST(AttributeValue, MissingIsDistinctFromEmptyText) {
  const wise::AttributeValue missing;
  const wise::AttributeValue empty{std::string()};
  EXPECT_TRUE(missing.is_missing());
  EXPECT_FALSE(empty.is_missing());
  EXPECT_NE(missing, empty);
  EXPECT_EQ(missing.render(), "(missing)");
  EXPECT_EQ(empty.render(), "");
}

TEST(AttributeValue, RendersEachKind) {
  EXPECT_EQ(wise::AttributeValue(2.5).render(), "2.5");
  EXPECT_EQ(wise::AttributeValue(3.0).render(), "3");
  EXPECT_EQ(wise::AttributeValue(true).render(), "true");
  EXPECT_EQ(wise::AttributeValue(utc(2019, 5, 6)).render(), "2019-05-06T00:00:00.000Z");
  EXPECT_EQ(wise::AttributeValue("Logistic").render(), "Logistic");
}

TEST(FormatNumber, RoundTripsThroughStrtod) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 5000; ++i) {
    const double x = d(rng);
    EXPECT_EQ(std::strtod(wise::format_number(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(wise::format_number(0.1), "0.1");
  EXPECT_EQ(wise::format_number(-0.0), "-0");
}

}  // namespace
