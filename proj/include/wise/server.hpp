#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "wise/event_log.hpp"
#include "wise/norm.hpp"
#include "wise/scoring.hpp"

namespace httplib {
class Server;
}

namespace wise {

/// One loaded log + norm with its score tables. Immutable; a norm reload
/// builds a new session.
struct Session {
  std::string session_id;
  std::string log_path;
  std::string log_digest;
  std::string norm_digest;
  std::string created;
  EventLog log;
  ProcessNorm norm;
  std::vector<ScoreTable> tables;
  std::vector<NormWarning> warnings;

  const ScoreTable* table(std::string_view view) const;
};

struct ServerConfig {
  /// Log paths in session requests must resolve inside one of these.
  std::vector<std::filesystem::path> allowed_roots;
  unsigned threads = 1;
  std::string cors_origin = "*";
};

/// Transport-independent request handling. Every response body is the JSON
/// envelope {"ok": true, "data": ...} or {"ok": false, "error": {"code", "message"}}.
class ApiService {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };

  explicit ApiService(ServerConfig config);

  Response handle(std::string_view method, std::string_view path,
                  const std::map<std::string, std::string>& query, std::string_view body);

  std::shared_ptr<const Session> session() const;
  const ServerConfig& config() const { return config_; }

 private:
  Response health() const;
  Response create_session(std::string_view body);
  Response scores(const std::map<std::string, std::string>& query) const;
  Response heatmap(std::string_view body) const;
  Response findings(std::string_view body) const;

  ServerConfig config_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Session> session_;
};

/// HTTP/1.1 front end for an ApiService.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks an ephemeral port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving the bound socket until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  ApiService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace wise
