#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "wise/errors.hpp"
#include "wise/log_io.hpp"

namespace wise {

namespace {

// RFC-4180 record reader. Returns false at end of input.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : buf_(in.rdbuf()) {}

  bool read_record(std::vector<std::string>& fields) {
    fields.clear();
    if (buf_->sgetc() == EOF) return false;
    ++record_;
    std::string field;
    bool quoted = false;
    bool after_quote = false;
    for (;;) {
      const int c = buf_->sbumpc();
      if (quoted) {
        if (c == EOF) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field in record " + std::to_string(record_));
        if (c == '"') {
          if (buf_->sgetc() == '"') {
            buf_->sbumpc();
            field.push_back('"');
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          field.push_back(static_cast<char>(c));
        }
        continue;
      }
      if (c == ',' || c == '\n' || c == EOF || c == '\r') {
        fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
        if (c == ',') continue;
        if (c == '\r' && buf_->sgetc() == '\n') buf_->sbumpc();
        return true;
      }
      if (after_quote) {
        throw Error(ErrorCode::MalformedCsv, "text after closing quote in record " + std::to_string(record_));
      }
      if (c == '"') {
        if (!field.empty()) {
          throw Error(ErrorCode::MalformedCsv, "stray quote in record " + std::to_string(record_));
        }
        quoted = true;
        continue;
      }
      field.push_back(static_cast<char>(c));
    }
  }

 private:
  std::streambuf* buf_;
  std::size_t record_ = 0;
};

std::optional<double> parse_number(const std::string& s) {
  double d = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(d)) {
    return std::nullopt;
  }
  return d;
}

enum class ColumnType { Number, Boolean, Timestamp, Text };

ColumnType infer_type(const std::vector<std::vector<std::string>>& rows, std::size_t col) {
  bool number = true;
  bool boolean = true;
  bool timestamp = true;
  bool any = false;
  for (const auto& row : rows) {
    const std::string& cell = row[col];
    if (cell.empty()) continue;
    any = true;
    number = number && parse_number(cell).has_value();
    boolean = boolean && (cell == "true" || cell == "false");
    timestamp = timestamp && parse_iso8601(cell).has_value();
    if (!number && !boolean && !timestamp) return ColumnType::Text;
  }
  if (!any) return ColumnType::Text;
  if (number) return ColumnType::Number;
  if (boolean) return ColumnType::Boolean;
  if (timestamp) return ColumnType::Timestamp;
  return ColumnType::Text;
}

AttributeValue typed_value(const std::string& cell, ColumnType type) {
  switch (type) {
    case ColumnType::Number: return AttributeValue(*parse_number(cell));
    case ColumnType::Boolean: return AttributeValue(cell == "true");
    case ColumnType::Timestamp: return AttributeValue(*parse_iso8601(cell));
    case ColumnType::Text: break;
  }
  return AttributeValue(cell);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in CSV header");
}

void write_field(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (const char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string cell_text(const AttributeValue& v) { return v.is_missing() ? std::string() : v.render(); }

}  // namespace

EventLog parse_csv(std::istream& in, const ColumnMapping& mapping) {
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.read_record(header)) throw Error(ErrorCode::MalformedCsv, "CSV input has no header row");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  const std::size_t case_col = column_index(header, mapping.case_column);
  const std::size_t activity_col = column_index(header, mapping.activity_column);
  std::optional<std::size_t> time_col;
  if (mapping.timestamp_column) time_col = column_index(header, *mapping.timestamp_column);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> record;
  while (reader.read_record(record)) {
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    if (record.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "data row " + std::to_string(rows.size()) + " has " +
                                               std::to_string(record.size()) + " fields, header has " +
                                               std::to_string(header.size()));
    }
    rows.push_back(record);
  }

  std::vector<std::pair<std::size_t, ColumnType>> attribute_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == case_col || c == activity_col || (time_col && c == *time_col)) continue;
    attribute_cols.emplace_back(c, infer_type(rows, c));
  }

  const bool iso = mapping.timestamp_format.empty() || mapping.timestamp_format == "iso8601";
  std::vector<std::string> case_order;
  std::unordered_map<std::string, std::vector<Event>> grouped;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Event e;
    e.event_id = static_cast<std::int64_t>(r);
    e.case_id = row[case_col];
    e.activity = row[activity_col];
    if (e.case_id.empty()) throw Error(ErrorCode::EmptyCaseId, "data row " + std::to_string(r) + " has an empty case id");
    if (e.activity.empty()) {
      throw Error(ErrorCode::MissingActivity, "data row " + std::to_string(r) + " (case " + e.case_id + ") has no activity");
    }
    if (time_col && !row[*time_col].empty()) {
      const std::string& raw = row[*time_col];
      e.timestamp = iso ? parse_iso8601(raw) : parse_with_format(raw, mapping.timestamp_format);
      if (!e.timestamp) {
        throw Error(ErrorCode::BadTimestamp, "data row " + std::to_string(r) + ": cannot parse timestamp '" + raw + "'");
      }
    }
    for (const auto& [c, type] : attribute_cols) {
      if (!row[c].empty()) e.attributes.emplace(header[c], typed_value(row[c], type));
    }
    auto [it, inserted] = grouped.try_emplace(e.case_id);
    if (inserted) case_order.push_back(e.case_id);
    it->second.push_back(std::move(e));
  }

  std::vector<Trace> traces;
  traces.reserve(case_order.size());
  for (const std::string& case_id : case_order) {
    std::vector<Event>& events = grouped[case_id];
    order_for_ingest(events);
    AttributeMap case_attrs = hoist_case_attributes(events, {});
    traces.emplace_back(case_id, std::move(events), std::move(case_attrs));
  }
  return EventLog::from_traces(std::move(traces));
}

void write_csv(std::ostream& out, const EventLog& log, const ColumnMapping& mapping) {
  std::set<std::string, std::less<>> names;
  for (const Trace& t : log.traces()) {
    for (const auto& [name, _] : t.case_attributes()) names.insert(name);
    for (const Event& e : t.events()) {
      for (const auto& [name, _] : e.attributes) names.insert(name);
    }
  }
  const std::string time_column = mapping.timestamp_column.value_or("timestamp");
  names.erase(mapping.case_column);
  names.erase(mapping.activity_column);
  names.erase(time_column);

  write_field(out, mapping.case_column);
  out << ',';
  write_field(out, mapping.activity_column);
  out << ',';
  write_field(out, time_column);
  for (const std::string& name : names) {
    out << ',';
    write_field(out, name);
  }
  out << '\n';
  for (const Trace& t : log.traces()) {
    // Case values fill a column only where no event of the trace carries it.
    std::set<std::string_view> event_level;
    for (const Event& e : t.events()) {
      for (const auto& [name, _] : e.attributes) event_level.insert(name);
    }
    for (const Event& e : t.events()) {
      write_field(out, e.case_id);
      out << ',';
      write_field(out, e.activity);
      out << ',';
      if (e.timestamp) out << format_iso8601(*e.timestamp);
      for (const std::string& name : names) {
        out << ',';
        if (const auto it = e.attributes.find(name); it != e.attributes.end()) {
          write_field(out, cell_text(it->second));
        } else if (const auto ct = t.case_attributes().find(name);
                   ct != t.case_attributes().end() && !event_level.contains(name)) {
          write_field(out, cell_text(ct->second));
        }
      }
      out << '\n';
    }
  }
}

std::optional<LogFormat> format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".xes" || ext == ".XES") return LogFormat::Xes;
  if (ext == ".csv" || ext == ".CSV") return LogFormat::Csv;
  return std::nullopt;
}

EventLog read_log_file(const std::filesystem::path& path, LogFormat format, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open log file " + path.string());
  return format == LogFormat::Xes ? parse_xes(in) : parse_csv(in, mapping);
}

}  // namespace wise
