#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace wise {

/// UTC instant at millisecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses ISO-8601 `YYYY-MM-DD[Thh:mm[:ss[.fff...]]][Z|+hh:mm|-hh:mm]`.
/// A missing zone designator means UTC; sub-millisecond digits are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Always `YYYY-MM-DDThh:mm:ss.fffZ`.
std::string format_iso8601(Timestamp ts);

/// Parses `text` with a strptime-style `format` (interpreted as UTC). A
/// trailing `.fff` fraction after the formatted part is accepted.
std::optional<Timestamp> parse_with_format(std::string_view text, const std::string& format);

struct Missing {
  friend bool operator==(Missing, Missing) = default;
};

/// Tagged attribute value. `Missing` is distinct from empty text.
class AttributeValue {
 public:
  using Storage = std::variant<Missing, std::string, double, Timestamp, bool>;

  AttributeValue() = default;
  AttributeValue(std::string text) : value_(std::move(text)) {}
  AttributeValue(const char* text) : value_(std::string(text)) {}
  AttributeValue(double number) : value_(number) {}
  AttributeValue(Timestamp ts) : value_(ts) {}
  AttributeValue(bool flag) : value_(flag) {}

  bool is_missing() const { return std::holds_alternative<Missing>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_number() const { return std::holds_alternative<double>(value_); }
  bool is_timestamp() const { return std::holds_alternative<Timestamp>(value_); }
  bool is_boolean() const { return std::holds_alternative<bool>(value_); }

  const std::string& text() const { return std::get<std::string>(value_); }
  double number() const { return std::get<double>(value_); }
  Timestamp timestamp() const { return std::get<Timestamp>(value_); }
  bool boolean() const { return std::get<bool>(value_); }

  const Storage& storage() const { return value_; }

  /// Display form used for grouping and CSV cells. Missing renders as "(missing)".
  std::string render() const;

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

 private:
  Storage value_;
};

using AttributeMap = std::map<std::string, AttributeValue, std::less<>>;

inline constexpr std::string_view kMissingLabel = "(missing)";

/// Shortest decimal form that round-trips through strtod.
std::string format_number(double value);

}  // namespace wise
