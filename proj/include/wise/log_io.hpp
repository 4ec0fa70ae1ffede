#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wise/event_log.hpp"

namespace wise {

/// How CSV columns map onto the mandatory event fields. Every other column
/// becomes an event attribute.
struct ColumnMapping {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::optional<std::string> timestamp_column = "timestamp";
  /// Empty or "iso8601" selects the ISO-8601 reader; anything else is a
  /// strptime-style pattern.
  std::string timestamp_format;
};

/// Reads the XES subset: log > trace > event with string/date/int/float/boolean
/// attribute elements. Other elements are skipped with their subtrees.
/// Throws Error(MalformedXml | MissingCaseId | MissingActivity | BadTimestamp).
EventLog parse_xes(std::istream& in);

/// Case attributes the reader would re-derive from the events are written on
/// the events only, so parse(write(log)) is a fixed point.
void write_xes(std::ostream& out, const EventLog& log);

/// RFC-4180 CSV with a header row. Attribute columns are typed per column:
/// numeric if every non-empty cell is a number, then boolean, then ISO
/// timestamp, otherwise text. Empty cells are missing values.
/// Throws Error(MalformedCsv | MissingColumn | BadTimestamp | EmptyCaseId | MissingActivity).
EventLog parse_csv(std::istream& in, const ColumnMapping& mapping = {});

/// One row per event. A case attribute fills its column on every row, unless
/// some event of the trace carries that attribute itself.
/// Timestamps are always written as ISO-8601.
void write_csv(std::ostream& out, const EventLog& log, const ColumnMapping& mapping = {});

enum class LogFormat { Xes, Csv };

/// Guesses from the extension (.xes / .csv); nullopt otherwise.
std::optional<LogFormat> format_from_path(const std::filesystem::path& path);

/// Throws Error(Io) when the file cannot be opened.
EventLog read_log_file(const std::filesystem::path& path, LogFormat format,
                       const ColumnMapping& mapping = {});

}  // namespace wise
