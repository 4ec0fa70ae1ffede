#include "wise/server.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "wise/aggregation.hpp"
#include "wise/errors.hpp"
#include "wise/insights.hpp"
#include "wise/log_io.hpp"

namespace wise {

using nlohmann::json;

const ScoreTable* Session::table(std::string_view view) const {
  for (const ScoreTable& t : tables) {
    if (t.view_name == view) return &t;
  }
  return nullptr;
}

namespace {

ApiService::Response ok(json data) {
  return {200, json{{"ok", true}, {"data", std::move(data)}}.dump()};
}

ApiService::Response fail(int status, std::string_view code, const std::string& message) {
  return {status, json{{"ok", false}, {"error", {{"code", code}, {"message", message}}}}.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::WeightOutOfRange:
    case ErrorCode::EmptyEquilibriumGroup:
    case ErrorCode::DuplicateViewName:
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::UnknownFeature:
    case ErrorCode::UnknownView:
    case ErrorCode::Io:
      return 404;
    default:
      return 422;
  }
}

ApiService::Response fail(const Error& e) { return fail(status_for(e.code()), error_code_name(e.code()), e.what()); }

std::string fnv_hex(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

json parse_body(std::string_view body) {
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("request body is not JSON: ") + e.what());
  }
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::size_t optional_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) {
    throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

bool inside(const std::filesystem::path& p, const std::filesystem::path& root) {
  auto r = root.begin();
  auto q = p.begin();
  for (; r != root.end(); ++r, ++q) {
    if (r->empty()) continue;  // trailing separator
    if (q == p.end() || *q != *r) return false;
  }
  return true;
}

json catalog_json(const EventLog& log) {
  json out = json::array();
  for (const FeatureInfo& f : log.feature_catalog()) {
    out.push_back({{"name", f.name},
                   {"level", to_string(f.level)},
                   {"kind", to_string(f.kind)},
                   {"distinct_values", f.distinct_value_count}});
  }
  return out;
}

}  // namespace

ApiService::ApiService(ServerConfig config) : config_(std::move(config)) {}

std::shared_ptr<const Session> ApiService::session() const {
  std::lock_guard lock(mutex_);
  return session_;
}

ApiService::Response ApiService::handle(std::string_view method, std::string_view path,
                                        const std::map<std::string, std::string>& query,
                                        std::string_view body) {
  try {
    if (path == "/api/health") {
      if (method != "GET") return fail(405, "MethodNotAllowed", "use GET");
      return health();
    }
    if (path == "/api/session") {
      if (method != "POST") return fail(405, "MethodNotAllowed", "use POST");
      return create_session(body);
    }
    if (path == "/api/scores") {
      if (method != "GET") return fail(405, "MethodNotAllowed", "use GET");
      return scores(query);
    }
    if (path == "/api/heatmap") {
      if (method != "POST") return fail(405, "MethodNotAllowed", "use POST");
      return heatmap(body);
    }
    if (path == "/api/findings") {
      if (method != "POST") return fail(405, "MethodNotAllowed", "use POST");
      return findings(body);
    }
    return fail(404, "NotFound", "no endpoint " + std::string(path));
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(500, "Internal", e.what());
  }
}

ApiService::Response ApiService::health() const {
  const auto s = session();
  return ok({{"status", "ok"}, {"session", s ? json(s->session_id) : json(nullptr)}});
}

ApiService::Response ApiService::create_session(std::string_view body) {
  const json request = parse_body(body);
  const std::string log_ref = require_string(request, "log");
  if (!request.contains("norm")) throw Error(ErrorCode::SchemaViolation, "field 'norm' is required");
  ProcessNorm norm = load_norm(request["norm"]);

  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path resolved = fs::weakly_canonical(fs::absolute(log_ref), ec);
  bool allowed = false;
  for (const fs::path& root : config_.allowed_roots) {
    const fs::path canonical_root = fs::weakly_canonical(fs::absolute(root), ec);
    if (inside(resolved, canonical_root)) allowed = true;
  }
  if (!allowed) return fail(403, "Forbidden", "log path is outside the allowed directories: " + log_ref);
  if (!fs::is_regular_file(resolved)) return fail(404, "LogNotFound", "no such log file: " + log_ref);

  LogFormat format = format_from_path(resolved).value_or(LogFormat::Xes);
  if (request.contains("format")) {
    const std::string f = require_string(request, "format");
    if (f == "xes") format = LogFormat::Xes;
    else if (f == "csv") format = LogFormat::Csv;
    else throw Error(ErrorCode::SchemaViolation, "format must be 'xes' or 'csv'");
  }
  ColumnMapping mapping;
  if (request.contains("csv")) {
    const json& m = request["csv"];
    if (!m.is_object()) throw Error(ErrorCode::SchemaViolation, "field 'csv' must be an object");
    if (m.contains("case_column")) mapping.case_column = require_string(m, "case_column");
    if (m.contains("activity_column")) mapping.activity_column = require_string(m, "activity_column");
    if (m.contains("timestamp_column")) {
      if (m["timestamp_column"].is_null()) mapping.timestamp_column.reset();
      else mapping.timestamp_column = require_string(m, "timestamp_column");
    }
    if (m.contains("timestamp_format")) mapping.timestamp_format = require_string(m, "timestamp_format");
  }

  std::ifstream in(resolved, std::ios::binary);
  if (!in) return fail(404, "LogNotFound", "cannot open log file: " + log_ref);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  const std::string content = bytes.str();

  auto session = std::make_shared<Session>();
  std::istringstream stream(content);
  session->log = format == LogFormat::Xes ? parse_xes(stream) : parse_csv(stream, mapping);
  session->log_path = resolved.string();
  session->log_digest = fnv_hex(content);
  session->norm_digest = fnv_hex(serialize_norm(norm).dump());
  session->session_id = "session-" + fnv_hex(session->norm_digest, std::stoull(session->log_digest, nullptr, 16));
  session->created = format_iso8601(std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()));
  session->tables = score_all_views(norm, session->log, ScoreOptions{config_.threads});
  session->warnings = validate_against_log(norm, session->log);
  session->norm = std::move(norm);

  json views = json::array();
  for (const View& v : session->norm.views) views.push_back(v.name);
  json warnings = json::array();
  for (const NormWarning& w : session->warnings) {
    warnings.push_back({{"view", w.view}, {"layer", layer_key(w.layer)}, {"activity", w.activity}, {"message", w.message}});
  }
  json data = {{"session_id", session->session_id},
               {"cases", session->log.traces().size()},
               {"events", session->log.event_count()},
               {"views", views},
               {"feature_catalog", catalog_json(session->log)},
               {"warnings", warnings},
               {"log_digest", session->log_digest},
               {"norm_digest", session->norm_digest}};
  {
    std::lock_guard lock(mutex_);
    session_ = std::move(session);
  }
  return ok(std::move(data));
}

namespace {

ApiService::Response no_session() { return fail(409, "NoSession", "no session loaded; POST /api/session first"); }

const ScoreTable& require_table(const Session& s, const std::string& view) {
  const ScoreTable* t = s.table(view);
  if (t == nullptr) throw Error(ErrorCode::UnknownView, "unknown view '" + view + "'");
  return *t;
}

std::size_t query_count(const std::map<std::string, std::string>& query, const char* key, std::size_t fallback) {
  const auto it = query.find(key);
  if (it == query.end()) return fallback;
  std::size_t v = 0;
  const auto& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, std::string("query parameter '") + key + "' must be a non-negative integer");
  }
  return v;
}

}  // namespace

ApiService::Response ApiService::scores(const std::map<std::string, std::string>& query) const {
  const auto s = session();
  if (!s) return no_session();
  const auto view_it = query.find("view");
  if (view_it == query.end()) throw Error(ErrorCode::InvalidArgument, "query parameter 'view' is required");
  const ScoreTable& table = require_table(*s, view_it->second);
  const std::size_t offset = query_count(query, "offset", 0);
  const std::size_t limit = query_count(query, "limit", 100);
  json rows = json::array();
  for (std::size_t i = offset; i < table.rows.size() && i - offset < limit; ++i) {
    rows.push_back(score_row_json(table.rows[i]));
  }
  return ok({{"view", table.view_name},
             {"offset", offset},
             {"limit", limit},
             {"total", table.rows.size()},
             {"rows", rows}});
}

ApiService::Response ApiService::heatmap(std::string_view body) const {
  const auto s = session();
  if (!s) return no_session();
  const json request = parse_body(body);
  const std::string view = require_string(request, "view");
  const std::string feature = require_string(request, "feature");
  const ScoreTable& table = require_table(*s, view);

  HeatmapMatrix matrix;
  if (request.contains("filter") && !request["filter"].is_null()) {
    FilterSpec filter = parse_filter(request["filter"]);
    if (filter.view.empty()) filter.view = view;
    if (filter.empty()) {
      matrix = build_heatmap(table, s->log, feature);
    } else {
      const Filtered sub = apply_filter(s->log, table, filter);
      matrix = build_heatmap(sub.table, sub.log, feature);
    }
  } else {
    matrix = build_heatmap(table, s->log, feature);
  }
  return ok(heatmap_json(matrix));
}

ApiService::Response ApiService::findings(std::string_view body) const {
  const auto s = session();
  if (!s) return no_session();
  const json request = parse_body(body);
  const std::string view = require_string(request, "view");
  const ScoreTable& table = require_table(*s, view);
  const std::size_t k = optional_count(request, "k", 5);
  const std::size_t min_support = optional_count(request, "min_support", 1);
  const auto cells = aggregate_all_features(table, s->log);
  json out = json::array();
  for (const Finding& f : derive_findings(cells, k, min_support)) out.push_back(finding_json(f));
  return ok(out);
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(ApiService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  const std::string origin = service_.config().cors_origin;
  server_->set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const ApiService::Response r = service_.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace wise
