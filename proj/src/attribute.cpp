#include "wise/attribute.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "wise/errors.hpp"

namespace wise {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::MissingCaseId: return "MissingCaseId";
    case ErrorCode::MissingActivity: return "MissingActivity";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::EmptyCaseId: return "EmptyCaseId";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::EmptyEquilibriumGroup: return "EmptyEquilibriumGroup";
    case ErrorCode::DuplicateViewName: return "DuplicateViewName";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::NonCategoricalFeature: return "NonCategoricalFeature";
    case ErrorCode::UnknownView: return "UnknownView";
    case ErrorCode::NonConformingTemplate: return "NonConformingTemplate";
    case ErrorCode::AdvisorUnreachable: return "AdvisorUnreachable";
    case ErrorCode::AdvisorMalformedResponse: return "AdvisorMalformedResponse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

using std::chrono::days;
using std::chrono::milliseconds;

// Proleptic Gregorian day count relative to 1970-01-01.
constexpr long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

struct Civil {
  long long year;
  unsigned month;
  unsigned day;
};

constexpr Civil civil_from_days(long long z) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr bool is_leap(long long y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr unsigned days_in_month(long long y, unsigned m) {
  constexpr std::array<unsigned, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  bool digits(std::size_t count, int& out) {
    if (pos_ + count > s_.size()) return false;
    out = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const char c = s_[pos_ + i];
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    pos_ += count;
    return true;
  }
  std::string_view rest() const { return s_.substr(pos_); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Parses `.fff...` and `Z`/`+hh:mm`/`-hh:mm`; returns false on trailing garbage.
bool parse_fraction_and_zone(Cursor& cur, long long& millis, long long& offset_minutes) {
  millis = 0;
  offset_minutes = 0;
  if (cur.eat('.') || cur.eat(',')) {
    int digit_count = 0;
    while (cur.peek() >= '0' && cur.peek() <= '9') {
      int d = 0;
      cur.digits(1, d);
      if (digit_count < 3) millis = millis * 10 + d;
      ++digit_count;
    }
    if (digit_count == 0) return false;
    for (int i = digit_count; i < 3; ++i) millis *= 10;
  }
  if (cur.done()) return true;
  if (cur.eat('Z') || cur.eat('z')) return cur.done();
  const char sign = cur.peek();
  if (sign != '+' && sign != '-') return false;
  cur.eat(sign);
  int hh = 0;
  int mm = 0;
  if (!cur.digits(2, hh)) return false;
  cur.eat(':');
  if (!cur.done() && !cur.digits(2, mm)) return false;
  if (!cur.done() || hh > 23 || mm > 59) return false;
  offset_minutes = (hh * 60 + mm) * (sign == '-' ? -1 : 1);
  return true;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  Cursor cur(text);
  int year = 0;
  int month = 0;
  int day = 0;
  if (!cur.digits(4, year) || !cur.eat('-') || !cur.digits(2, month) || !cur.eat('-') ||
      !cur.digits(2, day)) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 ||
      static_cast<unsigned>(day) > days_in_month(year, static_cast<unsigned>(month))) {
    return std::nullopt;
  }
  int hour = 0;
  int minute = 0;
  int second = 0;
  long long millis = 0;
  long long offset = 0;
  if (!cur.done()) {
    if (!cur.eat('T') && !cur.eat('t') && !cur.eat(' ')) return std::nullopt;
    if (!cur.digits(2, hour) || !cur.eat(':') || !cur.digits(2, minute)) return std::nullopt;
    if (cur.eat(':') && !cur.digits(2, second)) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    if (!parse_fraction_and_zone(cur, millis, offset)) return std::nullopt;
  }
  const long long day_count =
      days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const long long total_ms =
      ((day_count * 24 + hour) * 60 + minute - offset) * 60'000LL + second * 1000LL + millis;
  return Timestamp{milliseconds{total_ms}};
}

std::string format_iso8601(Timestamp ts) {
  const long long total_ms = ts.time_since_epoch().count();
  long long day_count = total_ms / 86'400'000LL;
  long long ms_of_day = total_ms % 86'400'000LL;
  if (ms_of_day < 0) {
    ms_of_day += 86'400'000LL;
    --day_count;
  }
  const Civil c = civil_from_days(day_count);
  const long long secs = ms_of_day / 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", c.year, c.month,
                c.day, secs / 3600, (secs / 60) % 60, secs % 60, ms_of_day % 1000);
  return buf;
}

std::optional<Timestamp> parse_with_format(std::string_view text, const std::string& format) {
  std::tm tm{};
  std::istringstream in{std::string(text)};
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  std::string rest;
  std::getline(in, rest);
  Cursor cur(rest);
  long long millis = 0;
  long long offset = 0;
  if (!parse_fraction_and_zone(cur, millis, offset)) return std::nullopt;
  const long long year = tm.tm_year + 1900LL;
  const unsigned month = static_cast<unsigned>(tm.tm_mon + 1);
  const unsigned day = static_cast<unsigned>(tm.tm_mday);
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
    return std::nullopt;
  }
  const long long day_count = days_from_civil(year, month, day);
  const long long total_ms =
      ((day_count * 24 + tm.tm_hour) * 60 + tm.tm_min - offset) * 60'000LL +
      tm.tm_sec * 1000LL + millis;
  return Timestamp{milliseconds{total_ms}};
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string AttributeValue::render() const {
  struct Visitor {
    std::string operator()(Missing) const { return std::string(kMissingLabel); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(Timestamp t) const { return format_iso8601(t); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, value_);
}

}  // namespace wise
