// wise: score event logs against a process norm, aggregate by case features,
// generate synthetic logs, and serve the JSON API.

#include <cctype>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wise/aggregation.hpp"
#include "wise/errors.hpp"
#include "wise/log_io.hpp"
#include "wise/norm.hpp"
#include "wise/scoring.hpp"
#include "wise/server.hpp"
#include "wise/synthlog.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitStrict = 2;

struct RunConfig {
  std::string log;
  std::string format;  // empty: infer from extension
  wise::ColumnMapping mapping;
  std::string norm;
  std::string view;  // empty or "all": every view
  std::string out = ".";
  std::vector<std::string> features;
  std::vector<std::pair<std::string, std::string>> filters;
  std::optional<double> low_quantile;
  bool strict = false;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cases;
  std::string spec;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> allow;
  std::string cors_origin = "*";
};

// Command-line values; unset optionals fall back to the config file.
struct Flags {
  std::optional<std::string> log, format, case_col, activity_col, time_col, time_format, norm, view, out, spec,
      host, cors_origin;
  std::vector<std::string> features, filters, allow;
  std::optional<double> low_quantile;
  bool strict = false;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cases;
  std::optional<int> port;
  std::string config;
};

std::pair<std::string, std::string> split_filter(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw wise::Error(wise::ErrorCode::InvalidArgument, "filter '" + s + "' is not feature=value");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void apply_file(RunConfig& c, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw wise::Error(wise::ErrorCode::Io, "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw wise::Error(wise::ErrorCode::SchemaViolation, "config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw wise::Error(wise::ErrorCode::SchemaViolation, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "log") c.log = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "case_col") c.mapping.case_column = v.get<std::string>();
      else if (key == "activity_col") c.mapping.activity_column = v.get<std::string>();
      else if (key == "time_col") c.mapping.timestamp_column = v.get<std::string>();
      else if (key == "time_format") c.mapping.timestamp_format = v.get<std::string>();
      else if (key == "norm") c.norm = v.get<std::string>();
      else if (key == "view") c.view = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "features") c.features = v.get<std::vector<std::string>>();
      else if (key == "filters") {
        c.filters.clear();
        for (const auto& f : v.get<std::vector<std::string>>()) c.filters.push_back(split_filter(f));
      }
      else if (key == "low_quantile") c.low_quantile = v.get<double>();
      else if (key == "strict") c.strict = v.get<bool>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "cases") c.cases = v.get<std::size_t>();
      else if (key == "spec") c.spec = v.get<std::string>();
      else if (key == "host") c.host = v.get<std::string>();
      else if (key == "port") c.port = v.get<int>();
      else if (key == "allow") c.allow = v.get<std::vector<std::string>>();
      else if (key == "cors_origin") c.cors_origin = v.get<std::string>();
      else throw wise::Error(wise::ErrorCode::SchemaViolation, "config: unknown key '" + key + "'");
    }
  } catch (const json::type_error& e) {
    throw wise::Error(wise::ErrorCode::SchemaViolation, "config " + path.string() + ": " + e.what());
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  std::string config_path = f.config;
  if (config_path.empty()) {
    if (const char* env = std::getenv("WISE_CONFIG"); env != nullptr && *env != '\0') config_path = env;
  }
  if (!config_path.empty()) apply_file(c, config_path);

  if (f.log) c.log = *f.log;
  if (f.format) c.format = *f.format;
  if (f.case_col) c.mapping.case_column = *f.case_col;
  if (f.activity_col) c.mapping.activity_column = *f.activity_col;
  if (f.time_col) {
    if (f.time_col->empty()) c.mapping.timestamp_column.reset();
    else c.mapping.timestamp_column = *f.time_col;
  }
  if (f.time_format) c.mapping.timestamp_format = *f.time_format;
  if (f.norm) c.norm = *f.norm;
  if (f.view) c.view = *f.view;
  if (f.out) c.out = *f.out;
  if (f.spec) c.spec = *f.spec;
  if (f.host) c.host = *f.host;
  if (f.cors_origin) c.cors_origin = *f.cors_origin;
  if (!f.features.empty()) c.features = f.features;
  if (!f.filters.empty()) {
    c.filters.clear();
    for (const std::string& s : f.filters) c.filters.push_back(split_filter(s));
  }
  if (!f.allow.empty()) c.allow = f.allow;
  if (f.low_quantile) c.low_quantile = f.low_quantile;
  if (f.strict) c.strict = true;
  if (f.threads) c.threads = *f.threads;
  if (f.seed) c.seed = f.seed;
  if (f.cases) c.cases = f.cases;
  if (f.port) c.port = *f.port;
  return c;
}

std::string sanitize(std::string_view name) {
  std::string out;
  for (const char ch : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += keep ? ch : '_';
  }
  return out.empty() ? "_" : out;
}

wise::LogFormat log_format(const RunConfig& c, const fs::path& path) {
  if (c.format == "xes") return wise::LogFormat::Xes;
  if (c.format == "csv") return wise::LogFormat::Csv;
  if (!c.format.empty()) throw wise::Error(wise::ErrorCode::InvalidArgument, "--format must be xes or csv");
  if (const auto f = wise::format_from_path(path)) return *f;
  throw wise::Error(wise::ErrorCode::InvalidArgument, "cannot infer log format of " + path.string() + "; pass --format");
}

wise::EventLog load_log(const RunConfig& c) {
  if (c.log.empty()) throw wise::Error(wise::ErrorCode::InvalidArgument, "--log is required");
  if (!fs::is_regular_file(c.log)) throw wise::Error(wise::ErrorCode::Io, "log file not found: " + c.log);
  return wise::read_log_file(c.log, log_format(c, c.log), c.mapping);
}

wise::ProcessNorm load_norm(const RunConfig& c) {
  if (c.norm.empty()) throw wise::Error(wise::ErrorCode::InvalidArgument, "--norm is required");
  if (!fs::is_regular_file(c.norm)) throw wise::Error(wise::ErrorCode::Io, "norm file not found: " + c.norm);
  return wise::load_norm_file(c.norm);
}

std::vector<const wise::View*> select_views(const wise::ProcessNorm& norm, const std::string& selector) {
  std::vector<const wise::View*> out;
  if (selector.empty() || selector == "all") {
    for (const wise::View& v : norm.views) out.push_back(&v);
    return out;
  }
  const wise::View* v = norm.find_view(selector);
  if (v == nullptr) throw wise::Error(wise::ErrorCode::UnknownView, "norm has no view named '" + selector + "'");
  out.push_back(v);
  return out;
}

fs::path prepare_out(const RunConfig& c) {
  fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw wise::Error(wise::ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out.flush()) throw wise::Error(wise::ErrorCode::Io, "write failed for " + path.string());
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

int report_warnings(const std::vector<wise::NormWarning>& warnings, bool strict) {
  for (const wise::NormWarning& w : warnings) std::cerr << "warning: " << w.message << '\n';
  if (strict && !warnings.empty()) {
    std::cerr << "error: " << warnings.size() << " norm warning(s) with --strict\n";
    return kExitStrict;
  }
  return kExitOk;
}

int cmd_score(const RunConfig& c) {
  const wise::EventLog log = load_log(c);
  const wise::ProcessNorm norm = load_norm(c);
  const auto views = select_views(norm, c.view);
  if (const int rc = report_warnings(wise::validate_against_log(norm, log), c.strict); rc != kExitOk) return rc;
  const fs::path dir = prepare_out(c);
  for (const wise::View* view : views) {
    const wise::ScoreTable table = wise::score_log(*view, log, wise::ScoreOptions{c.threads});
    std::ostringstream csv;
    wise::write_score_csv(csv, table);
    const std::string stem = "scores_" + sanitize(view->name);
    write_file(dir / (stem + ".csv"), csv.str());
    write_file(dir / (stem + ".json"), wise::score_table_json(table).dump(2) + "\n");
    double sum = 0;
    for (const wise::InstanceScore& r : table.rows) sum += r.normalized_score;
    const double mean = table.rows.empty() ? 0.0 : sum / static_cast<double>(table.rows.size());
    std::cout << "view=\"" << view->name << "\" cases=" << table.rows.size() << " mean=" << fixed4(mean) << '\n';
  }
  return kExitOk;
}

int cmd_heatmap(const RunConfig& c) {
  if (c.features.empty()) throw wise::Error(wise::ErrorCode::InvalidArgument, "--feature is required");
  const wise::EventLog log = load_log(c);
  const wise::ProcessNorm norm = load_norm(c);
  const auto views = select_views(norm, c.view);
  if (const int rc = report_warnings(wise::validate_against_log(norm, log), c.strict); rc != kExitOk) return rc;

  wise::FilterSpec filter;
  filter.equals = c.filters;
  filter.score_quantile = c.low_quantile;
  const fs::path dir = prepare_out(c);
  for (const wise::View* view : views) {
    const wise::ScoreTable table = wise::score_log(*view, log, wise::ScoreOptions{c.threads});
    std::optional<wise::Filtered> sub;
    if (!filter.empty()) sub = wise::apply_filter(log, table, filter);
    const wise::ScoreTable& scores = sub ? sub->table : table;
    const wise::EventLog& scope = sub ? sub->log : log;
    for (const std::string& feature : c.features) {
      const wise::HeatmapMatrix m = wise::build_heatmap(scores, scope, feature);
      json doc = wise::heatmap_json(m);
      if (sub) doc["filter"] = wise::filter_json(filter);
      const std::string stem = "heatmap_" + sanitize(view->name) + "_" + sanitize(feature);
      write_file(dir / (stem + ".json"), doc.dump(2) + "\n");
      std::ostringstream csv;
      wise::write_cells_csv(csv, m.cells);
      write_file(dir / (stem + ".csv"), csv.str());
      std::cout << "view=\"" << view->name << "\" feature=\"" << feature << "\" cases=" << scores.rows.size()
                << " values=" << m.rows.size();
      if (!m.rows.empty()) std::cout << " worst=\"" << m.rows.front().value << "\"";
      std::cout << '\n';
    }
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& c) {
  if (c.spec.empty()) throw wise::Error(wise::ErrorCode::InvalidArgument, "--spec is required");
  std::ifstream in(c.spec);
  if (!in) throw wise::Error(wise::ErrorCode::Io, "cannot open generator spec " + c.spec);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw wise::Error(wise::ErrorCode::SchemaViolation, "generator spec: " + std::string(e.what()));
  }
  wise::synth::GeneratorSpec spec = wise::synth::parse_generator_spec(j);
  if (c.seed) spec.seed = *c.seed;
  if (c.cases) spec.n_cases = *c.cases;

  const wise::ProcessNorm norm = load_norm(c);
  const wise::View* view = nullptr;
  if (c.view.empty() || c.view == "all") {
    if (norm.views.size() != 1) {
      throw wise::Error(wise::ErrorCode::InvalidArgument, "norm has several views; pick the template view with --view");
    }
    view = &norm.views.front();
  } else {
    view = select_views(norm, c.view).front();
  }

  const wise::synth::Generated g = wise::synth::generate(spec, *view);
  const fs::path dir = prepare_out(c);
  const bool csv = c.format == "csv";
  if (!c.format.empty() && c.format != "csv" && c.format != "xes") {
    throw wise::Error(wise::ErrorCode::InvalidArgument, "--format must be xes or csv");
  }
  std::ostringstream log_out;
  if (csv) wise::write_csv(log_out, g.log, c.mapping);
  else wise::write_xes(log_out, g.log);
  const fs::path log_path = dir / (csv ? "log.csv" : "log.xes");
  write_file(log_path, log_out.str());
  json truth = wise::synth::ground_truth_json(g.truth);
  truth["spec"] = wise::synth::generator_spec_json(spec);
  write_file(dir / "ground_truth.json", truth.dump(2) + "\n");
  std::cout << "cases=" << g.log.traces().size() << " events=" << g.log.event_count() << " log=" << log_path.string()
            << '\n';
  return kExitOk;
}

int cmd_serve(const RunConfig& c) {
  wise::ServerConfig sc;
  for (const std::string& a : c.allow) sc.allowed_roots.emplace_back(a);
  if (sc.allowed_roots.empty()) sc.allowed_roots.push_back(fs::current_path());
  sc.threads = c.threads;
  sc.cors_origin = c.cors_origin;
  wise::ApiService service(sc);

  if (!c.log.empty() && !c.norm.empty()) {
    json norm_doc;
    std::ifstream in(c.norm);
    if (!in) throw wise::Error(wise::ErrorCode::Io, "cannot open norm file " + c.norm);
    try {
      norm_doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw wise::Error(wise::ErrorCode::SchemaViolation, "norm: " + std::string(e.what()));
    }
    json request = {{"log", fs::absolute(c.log).string()}, {"norm", norm_doc}};
    if (!c.format.empty()) request["format"] = c.format;
    const auto r = service.handle("POST", "/api/session", {}, request.dump());
    if (r.status != 200) {
      std::cerr << "error: cannot load session: " << r.body << '\n';
      return kExitError;
    }
  }

  // Block the stop signals before any server thread exists so sigwait owns them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  wise::HttpServer server(service);
  const int port = server.bind(c.host, c.port);
  if (port < 0) {
    std::cerr << "error: cannot bind " << c.host << ':' << c.port << '\n';
    return kExitError;
  }
  std::thread worker([&server] { server.serve(); });
  server.wait_until_ready();
  std::cout << "listening on http://" << c.host << ':' << port << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.stop();
  worker.join();
  return kExitOk;
}

void add_log_flags(CLI::App* app, Flags& f) {
  app->add_option("--log", f.log, "Event log path (.xes or .csv)");
  app->add_option("--format", f.format, "Log format: xes or csv")->check(CLI::IsMember({"xes", "csv"}));
  app->add_option("--case-col", f.case_col, "CSV case id column");
  app->add_option("--activity-col", f.activity_col, "CSV activity column");
  app->add_option("--time-col", f.time_col, "CSV timestamp column; empty for none");
  app->add_option("--time-format", f.time_format, "strftime-style timestamp format; default ISO-8601");
  app->add_option("--norm", f.norm, "Process norm JSON");
  app->add_option("--view", f.view, "View name, or 'all'");
  app->add_option("--threads", f.threads, "Scoring threads (0 = hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score event logs against a layered process norm"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON config file (also WISE_CONFIG); flags override it");

  CLI::App* score = app.add_subcommand("score", "Score every case and write per-view score tables");
  add_log_flags(score, f);
  score->add_option("--out", f.out, "Output directory");
  score->add_flag("--strict", f.strict, "Exit 2 on norm warnings");

  CLI::App* heatmap = app.add_subcommand("heatmap", "Aggregate scores by case features");
  add_log_flags(heatmap, f);
  heatmap->add_option("--out", f.out, "Output directory");
  heatmap->add_option("--feature", f.features, "Case feature to group by (repeatable)");
  heatmap->add_option("--filter", f.filters, "Drill-down condition feature=value (repeatable)");
  heatmap->add_option("--low-quantile", f.low_quantile, "Keep cases scoring at or below this quantile");
  heatmap->add_flag("--strict", f.strict, "Exit 2 on norm warnings");

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic log with known violations");
  synth->add_option("--spec", f.spec, "Generator spec JSON");
  synth->add_option("--norm", f.norm, "Process norm JSON");
  synth->add_option("--view", f.view, "View the base sequence must conform to");
  synth->add_option("--seed", f.seed, "Override the seed in the generator file");
  synth->add_option("--cases", f.cases, "Override the number of cases");
  synth->add_option("--format", f.format, "Output format: xes or csv")->check(CLI::IsMember({"xes", "csv"}));
  synth->add_option("--out", f.out, "Output directory");

  CLI::App* serve = app.add_subcommand("serve", "Serve the JSON API");
  add_log_flags(serve, f);
  serve->add_option("--host", f.host, "Bind address");
  serve->add_option("--port", f.port, "Port (0 = ephemeral)");
  serve->add_option("--allow", f.allow, "Directory log paths may come from (repeatable; default cwd)");
  serve->add_option("--cors-origin", f.cors_origin, "Access-Control-Allow-Origin value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    const RunConfig config = resolve(f);
    if (score->parsed()) return cmd_score(config);
    if (heatmap->parsed()) return cmd_heatmap(config);
    if (synth->parsed()) return cmd_synth(config);
    if (serve->parsed()) return cmd_serve(config);
  } catch (const wise::Error& e) {
    std::cerr << "error: " << wise::error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
