#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "wise/errors.hpp"
#include "wise/log_io.hpp"

namespace wise {

namespace {

// Minimal pull parser for the XML needed by XES. Text content, comments,
// processing instructions, DOCTYPE and CDATA are skipped.
class XmlReader {
 public:
  enum class Kind { Start, End, Eof };

  struct Token {
    Kind kind = Kind::Eof;
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    bool self_closing = false;
    std::size_t line = 0;
    std::size_t column = 0;

    const std::string* attribute(std::string_view key) const {
      for (const auto& [k, v] : attributes) {
        if (k == key) return &v;
      }
      return nullptr;
    }
  };

  explicit XmlReader(std::istream& in) : buf_(in.rdbuf()) {
    if (buf_ == nullptr) fail("no input stream");
  }

  Token next() {
    if (pending_end_) {
      pending_end_ = false;
      Token t;
      t.kind = Kind::End;
      t.name = stack_.back();
      stack_.pop_back();
      return t;
    }
    for (;;) {
      int c = get();
      if (c == EOF) {
        if (!stack_.empty()) fail("unexpected end of input inside <" + stack_.back() + ">");
        if (!seen_root_) fail("document has no root element");
        return Token{};
      }
      if (c != '<') {
        if (stack_.empty() && !is_space(c)) fail("text outside the root element");
        if (c == '&') skip_entity_in_text();
        continue;
      }
      const std::size_t line = line_;
      const std::size_t column = column_ - 1;
      c = peek();
      if (c == '?') {
        skip_until("?>");
        continue;
      }
      if (c == '!') {
        get();
        if (try_consume("--")) {
          skip_until("-->");
        } else if (try_consume("[CDATA[")) {
          skip_until("]]>");
        } else {
          skip_declaration();
        }
        continue;
      }
      if (c == '/') {
        get();
        Token t;
        t.kind = Kind::End;
        t.line = line;
        t.column = column;
        t.name = read_name();
        skip_space();
        expect('>');
        if (stack_.empty() || stack_.back() != t.name) {
          fail("mismatched closing tag </" + t.name + ">");
        }
        stack_.pop_back();
        return t;
      }
      Token t;
      t.kind = Kind::Start;
      t.line = line;
      t.column = column;
      t.name = read_name();
      if (stack_.empty()) {
        if (seen_root_) fail("more than one root element");
        seen_root_ = true;
      }
      for (;;) {
        skip_space();
        c = peek();
        if (c == '/') {
          get();
          expect('>');
          t.self_closing = true;
          break;
        }
        if (c == '>') {
          get();
          break;
        }
        std::string key = read_name();
        skip_space();
        expect('=');
        skip_space();
        t.attributes.emplace_back(std::move(key), read_quoted());
      }
      stack_.push_back(t.name);
      pending_end_ = t.self_closing;
      return t;
    }
  }

  /// Consumes everything up to and including the end tag of the element
  /// whose start token was just returned.
  void skip_subtree() {
    const std::size_t depth = stack_.size();
    while (stack_.size() >= depth) {
      if (next().kind == Kind::Eof) return;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedXml, "malformed XML at line " + std::to_string(line_) +
                                             ", column " + std::to_string(column_) + ": " + what);
  }

 private:
  static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  static bool is_name_char(int c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == ':' || c == '-' || c == '.' || c >= 0x80;
  }

  int peek() { return buf_->sgetc(); }

  int get() {
    const int c = buf_->sbumpc();
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if (c != EOF) {
      ++column_;
    }
    return c;
  }

  void expect(char want) {
    const int c = get();
    if (c != want) {
      fail(std::string("expected '") + want + "'" + (c == EOF ? " before end of input" : ""));
    }
  }

  void skip_space() {
    while (is_space(peek())) get();
  }

  bool try_consume(std::string_view s) {
    // Only used right after "<!", where the alternatives share no prefix
    // beyond the first character.
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (peek() != s[i]) {
        if (i != 0) fail("unsupported markup declaration");
        return false;
      }
      get();
    }
    return true;
  }

  void skip_until(std::string_view terminator) {
    std::size_t matched = 0;
    while (matched < terminator.size()) {
      const int c = get();
      if (c == EOF) fail("unterminated markup, expected '" + std::string(terminator) + "'");
      if (c == terminator[matched]) {
        ++matched;
      } else {
        matched = c == terminator[0] ? 1 : 0;
      }
    }
  }

  void skip_declaration() {
    int depth = 0;
    for (;;) {
      const int c = get();
      if (c == EOF) fail("unterminated declaration");
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) return;
    }
  }

  std::string read_name() {
    std::string name;
    while (is_name_char(peek())) name.push_back(static_cast<char>(get()));
    if (name.empty()) fail("expected a name");
    return name;
  }

  void skip_entity_in_text() {
    while (peek() != ';') {
      if (peek() == EOF || peek() == '<') fail("unterminated entity reference");
      get();
    }
    get();
  }

  void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      fail("character reference out of range");
    }
  }

  std::string read_quoted() {
    const int quote = get();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    std::string value;
    for (;;) {
      const int c = get();
      if (c == EOF) fail("unterminated attribute value");
      if (c == quote) return value;
      if (c == '<') fail("'<' inside attribute value");
      if (c != '&') {
        value.push_back(static_cast<char>(c));
        continue;
      }
      std::string entity;
      for (int e = get(); e != ';'; e = get()) {
        if (e == EOF || entity.size() > 10) fail("bad entity reference");
        entity.push_back(static_cast<char>(e));
      }
      if (entity == "lt") value.push_back('<');
      else if (entity == "gt") value.push_back('>');
      else if (entity == "amp") value.push_back('&');
      else if (entity == "quot") value.push_back('"');
      else if (entity == "apos") value.push_back('\'');
      else if (entity.size() > 1 && entity[0] == '#') {
        const bool hex = entity[1] == 'x' || entity[1] == 'X';
        const std::string_view digits = std::string_view(entity).substr(hex ? 2 : 1);
        unsigned long cp = 0;
        const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
        if (digits.empty() || res.ec != std::errc{} || res.ptr != digits.data() + digits.size()) {
          fail("bad character reference &" + entity + ";");
        }
        append_utf8(value, cp);
      } else {
        fail("unknown entity &" + entity + ";");
      }
    }
  }

  std::streambuf* buf_;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  std::vector<std::string> stack_;
  bool seen_root_ = false;
  bool pending_end_ = false;
};

bool is_attribute_element(std::string_view name) {
  return name == "string" || name == "date" || name == "int" || name == "float" ||
         name == "boolean" || name == "id";
}

std::string where(const XmlReader::Token& t) {
  return "line " + std::to_string(t.line) + ", column " + std::to_string(t.column);
}

struct ParsedAttribute {
  std::string key;
  AttributeValue value;
};

ParsedAttribute read_attribute(XmlReader& reader, const XmlReader::Token& t) {
  const std::string* key = t.attribute("key");
  const std::string* raw = t.attribute("value");
  if (key == nullptr) reader.fail("<" + t.name + "> without key");
  if (raw == nullptr) reader.fail("<" + t.name + " key=\"" + *key + "\"> without value");
  ParsedAttribute out{*key, {}};
  if (t.name == "string" || t.name == "id") {
    out.value = AttributeValue(*raw);
  } else if (t.name == "date") {
    const auto ts = parse_iso8601(*raw);
    if (!ts) {
      throw Error(ErrorCode::BadTimestamp,
                  "bad date '" + *raw + "' for key " + *key + " at " + where(t));
    }
    out.value = AttributeValue(*ts);
  } else if (t.name == "int" || t.name == "float") {
    double d = 0;
    const auto res = std::from_chars(raw->data(), raw->data() + raw->size(), d);
    if (raw->empty() || res.ec != std::errc{} || res.ptr != raw->data() + raw->size() || !std::isfinite(d)) {
      reader.fail("bad " + t.name + " value '" + *raw + "' for key " + *key);
    }
    out.value = AttributeValue(d);
  } else {
    if (*raw == "true") out.value = AttributeValue(true);
    else if (*raw == "false") out.value = AttributeValue(false);
    else reader.fail("bad boolean value '" + *raw + "' for key " + *key);
  }
  // Nested meta-attributes are outside the supported subset.
  if (!t.self_closing) reader.skip_subtree();
  else reader.next();
  return out;
}

Event read_event(XmlReader& reader, const XmlReader::Token& start, std::int64_t event_id,
                 const std::string& case_label, std::size_t index_in_trace) {
  Event e;
  e.event_id = event_id;
  bool has_activity = false;
  for (;;) {
    XmlReader::Token t = reader.next();
    if (t.kind == XmlReader::Kind::End) break;
    if (!is_attribute_element(t.name)) {
      reader.skip_subtree();
      continue;
    }
    ParsedAttribute attr = read_attribute(reader, t);
    if (attr.key == "concept:name") {
      e.activity = attr.value.is_text() ? attr.value.text() : attr.value.render();
      has_activity = !e.activity.empty();
    } else if (attr.key == "time:timestamp" && attr.value.is_timestamp()) {
      e.timestamp = attr.value.timestamp();
    } else {
      e.attributes.insert_or_assign(std::move(attr.key), std::move(attr.value));
    }
  }
  if (!has_activity) {
    throw Error(ErrorCode::MissingActivity, "event #" + std::to_string(index_in_trace) + " of trace " +
                                                case_label + " (" + where(start) +
                                                ") has no concept:name");
  }
  return e;
}

Trace read_trace(XmlReader& reader, const XmlReader::Token& start, std::size_t trace_index,
                 std::int64_t& next_event_id) {
  std::string case_id;
  AttributeMap trace_attrs;
  std::vector<Event> events;
  std::vector<XmlReader::Token> event_starts;
  const std::string label = "#" + std::to_string(trace_index) + " (" + where(start) + ")";
  for (;;) {
    XmlReader::Token t = reader.next();
    if (t.kind == XmlReader::Kind::End) break;
    if (t.name == "event") {
      if (t.self_closing) {
        reader.next();
        throw Error(ErrorCode::MissingActivity, "event #" + std::to_string(events.size()) +
                                                    " of trace " + label + " has no concept:name");
      }
      events.push_back(read_event(reader, t, next_event_id++,
                                  case_id.empty() ? label : case_id, events.size()));
    } else if (is_attribute_element(t.name)) {
      ParsedAttribute attr = read_attribute(reader, t);
      if (attr.key == "concept:name") {
        case_id = attr.value.is_text() ? attr.value.text() : attr.value.render();
      } else {
        trace_attrs.insert_or_assign(std::move(attr.key), std::move(attr.value));
      }
    } else {
      reader.skip_subtree();
    }
  }
  if (case_id.empty()) {
    throw Error(ErrorCode::MissingCaseId, "trace " + label + " has no concept:name");
  }
  for (Event& e : events) e.case_id = case_id;
  order_for_ingest(events);
  AttributeMap case_attrs = hoist_case_attributes(events, std::move(trace_attrs));
  return Trace(case_id, std::move(events), std::move(case_attrs));
}

void write_escaped(std::ostream& out, std::string_view s) {
  for (const char c : s) {
    switch (c) {
      case '&': out << "&amp;"; break;
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      case '"': out << "&quot;"; break;
      case '\'': out << "&apos;"; break;
      case '\n': out << "&#10;"; break;
      case '\r': out << "&#13;"; break;
      case '\t': out << "&#9;"; break;
      default: out << c;
    }
  }
}

void write_attribute(std::ostream& out, std::string_view indent, std::string_view key,
                     const AttributeValue& value) {
  if (value.is_missing()) return;
  std::string_view tag = "string";
  std::string text;
  if (value.is_number()) {
    const double d = value.number();
    tag = (std::trunc(d) == d && std::fabs(d) < 9007199254740992.0) ? "int" : "float";
    text = format_number(d);
  } else if (value.is_timestamp()) {
    tag = "date";
    text = format_iso8601(value.timestamp());
  } else if (value.is_boolean()) {
    tag = "boolean";
    text = value.boolean() ? "true" : "false";
  } else {
    text = value.text();
  }
  out << indent << '<' << tag << " key=\"";
  write_escaped(out, key);
  out << "\" value=\"";
  write_escaped(out, text);
  out << "\"/>\n";
}

}  // namespace

EventLog parse_xes(std::istream& in) {
  XmlReader reader(in);
  XmlReader::Token root = reader.next();
  if (root.kind != XmlReader::Kind::Start || root.name != "log") {
    reader.fail("root element must be <log>");
  }
  std::vector<Trace> traces;
  std::int64_t next_event_id = 0;
  for (;;) {
    XmlReader::Token t = reader.next();
    if (t.kind == XmlReader::Kind::End) break;
    if (t.name == "trace") {
      if (t.self_closing) {
        reader.next();
        throw Error(ErrorCode::MissingCaseId,
                    "trace #" + std::to_string(traces.size()) + " (" + where(t) + ") has no concept:name");
      }
      traces.push_back(read_trace(reader, t, traces.size(), next_event_id));
    } else {
      reader.skip_subtree();
    }
  }
  if (reader.next().kind != XmlReader::Kind::Eof) reader.fail("content after </log>");
  return EventLog::from_traces(std::move(traces));
}

void write_xes(std::ostream& out, const EventLog& log) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">\n";
  for (const Trace& trace : log.traces()) {
    out << "  <trace>\n";
    write_attribute(out, "    ", "concept:name", AttributeValue(trace.case_id()));
    // Values the reader will hoist from the events again stay on the events only.
    const AttributeMap derived = hoist_case_attributes(trace.events(), {});
    for (const auto& [key, value] : trace.case_attributes()) {
      if (key == "concept:name") continue;
      if (const auto it = derived.find(key); it != derived.end() && it->second == value) continue;
      write_attribute(out, "    ", key, value);
    }
    for (const Event& e : trace.events()) {
      out << "    <event>\n";
      write_attribute(out, "      ", "concept:name", AttributeValue(e.activity));
      if (e.timestamp) write_attribute(out, "      ", "time:timestamp", AttributeValue(*e.timestamp));
      for (const auto& [key, value] : e.attributes) {
        if (key == "concept:name" || key == "time:timestamp") continue;
        write_attribute(out, "      ", key, value);
      }
      out << "    </event>\n";
    }
    out << "  </trace>\n";
  }
  out << "</log>\n";
}

}  // namespace wise
