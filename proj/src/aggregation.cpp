#include "wise/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "wise/errors.hpp"

namespace wise {

using nlohmann::json;

std::array<ScoreColumn, kColumnCount> score_columns() {
  std::array<ScoreColumn, kColumnCount> cols;
  for (std::size_t i = 0; i < kLayerCount; ++i) cols[i].layer = kLayers[i];
  return cols;
}

double quantile_inclusive(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0 ? sorted[lo] : sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_inclusive(values, 0.25);
  s.median = quantile_inclusive(values, 0.5);
  s.q3 = quantile_inclusive(values, 0.75);
  return s;
}

namespace {

const FeatureInfo& require_feature(const EventLog& log, std::string_view feature) {
  const FeatureInfo* info = log.find_feature(feature);
  if (info == nullptr) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + std::string(feature) + "'");
  return *info;
}

const FeatureInfo& require_categorical(const EventLog& log, std::string_view feature) {
  const FeatureInfo& info = require_feature(log, feature);
  if (info.level != FeatureLevel::Case) {
    throw Error(ErrorCode::NonCategoricalFeature,
                "feature '" + info.name + "' varies within cases; only case-level features can group scores");
  }
  if (info.kind != FeatureKind::Categorical) {
    throw Error(ErrorCode::NonCategoricalFeature,
                "feature '" + info.name + "' is " + std::string(to_string(info.kind)) +
                    "; bin it into categories before aggregating");
  }
  return info;
}

// Trace index for every table row.
std::vector<std::size_t> align_rows(const ScoreTable& table, const EventLog& log) {
  std::vector<std::size_t> idx(table.rows.size());
  const auto& traces = log.traces();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i < traces.size() && traces[i].case_id() == table.rows[i].case_id) {
      idx[i] = i;
      continue;
    }
    const auto found = log.find_trace(table.rows[i].case_id);
    if (!found) {
      throw Error(ErrorCode::InvalidArgument, "score row for case '" + table.rows[i].case_id + "' has no trace in the log");
    }
    idx[i] = *found;
  }
  return idx;
}

std::string case_value(const Trace& trace, std::string_view feature) {
  const auto it = trace.case_attributes().find(feature);
  return it == trace.case_attributes().end() ? std::string(kMissingLabel) : it->second.render();
}

double column_score(const InstanceScore& row, const ScoreColumn& col) {
  return col.is_overall() ? row.normalized_score : row.layer(*col.layer).layer_score;
}

}  // namespace

std::vector<AggregationCell> aggregate(const ScoreTable& table, const EventLog& log, std::string_view feature) {
  const FeatureInfo& info = require_categorical(log, feature);
  const auto trace_of = align_rows(table, log);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    groups[case_value(log.traces()[trace_of[i]], feature)].push_back(i);
  }
  std::vector<AggregationCell> cells;
  cells.reserve(groups.size() * kColumnCount);
  const auto columns = score_columns();
  for (const auto& [value, members] : groups) {
    for (const ScoreColumn& col : columns) {
      std::vector<double> scores;
      scores.reserve(members.size());
      for (std::size_t r : members) scores.push_back(column_score(table.rows[r], col));
      cells.push_back({info.name, value, col, box_stats(std::move(scores))});
    }
  }
  return cells;
}

HeatmapMatrix build_heatmap(const ScoreTable& table, const EventLog& log, std::string_view feature) {
  HeatmapMatrix m;
  m.feature = std::string(feature);
  m.view = table.view_name;
  m.cells = aggregate(table, log, feature);
  for (std::size_t i = 0; i < m.cells.size(); i += kColumnCount) {
    HeatmapRow row;
    row.value = m.cells[i].value;
    row.n_cases = m.cells[i].stats.n;
    for (std::size_t c = 0; c < kColumnCount; ++c) row.means[c] = m.cells[i + c].stats.mean;
    m.rows.push_back(std::move(row));
  }
  std::stable_sort(m.rows.begin(), m.rows.end(), [](const HeatmapRow& a, const HeatmapRow& b) {
    const double ma = a.means[kColumnCount - 1];
    const double mb = b.means[kColumnCount - 1];
    return ma != mb ? ma < mb : a.value < b.value;
  });
  return m;
}

Filtered apply_filter(const EventLog& log, const ScoreTable& table, const FilterSpec& filter) {
  if (filter.empty()) throw Error(ErrorCode::InvalidArgument, "filter needs at least one criterion");
  if (!filter.view.empty() && filter.view != table.view_name) {
    throw Error(ErrorCode::UnknownView, "filter names view '" + filter.view + "' but the scores are for '" +
                                            table.view_name + "'");
  }
  for (const auto& [feature, _] : filter.equals) require_feature(log, feature);
  std::optional<double> threshold;
  if (filter.score_quantile) {
    const double q = *filter.score_quantile;
    if (!(q > 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "score quantile must lie in (0, 1], got " + format_number(q));
    }
    std::vector<double> scores;
    scores.reserve(table.rows.size());
    for (const InstanceScore& r : table.rows) scores.push_back(r.normalized_score);
    std::sort(scores.begin(), scores.end());
    if (!scores.empty()) threshold = quantile_inclusive(scores, q);
  }
  const auto trace_of = align_rows(table, log);
  Filtered out;
  out.table.view_name = table.view_name;
  out.table.norm_digest = table.norm_digest;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const Trace& trace = log.traces()[trace_of[i]];
    const bool equals_ok = std::all_of(filter.equals.begin(), filter.equals.end(), [&](const auto& fv) {
      return case_value(trace, fv.first) == fv.second;
    });
    const bool quantile_ok = !filter.score_quantile || (threshold && table.rows[i].normalized_score <= *threshold);
    if (equals_ok && quantile_ok) {
      keep.push_back(trace_of[i]);
      out.table.rows.push_back(table.rows[i]);
    }
  }
  out.log = log.subset(keep);
  return out;
}

std::vector<RankedValue> rank_feature_values(std::span<const AggregationCell> cells, std::size_t min_support) {
  if (min_support < 1) throw Error(ErrorCode::InvalidArgument, "min_support must be at least 1");
  std::vector<RankedValue> out;
  for (const AggregationCell& c : cells) {
    if (!c.column.is_overall() || c.stats.n < min_support) continue;
    out.push_back({c.feature, c.value, (1.0 - c.stats.mean) * static_cast<double>(c.stats.n), c.stats.n});
  }
  std::sort(out.begin(), out.end(), [](const RankedValue& a, const RankedValue& b) {
    if (a.deficit != b.deficit) return a.deficit > b.deficit;
    return std::tie(a.feature, a.value) < std::tie(b.feature, b.value);
  });
  return out;
}

std::vector<AggregationCell> aggregate_all_features(const ScoreTable& table, const EventLog& log) {
  std::vector<AggregationCell> all;
  for (const FeatureInfo& f : log.feature_catalog()) {
    if (f.level != FeatureLevel::Case || f.kind != FeatureKind::Categorical) continue;
    auto cells = aggregate(table, log, f.name);
    all.insert(all.end(), std::make_move_iterator(cells.begin()), std::make_move_iterator(cells.end()));
  }
  return all;
}

// ---------------------------------------------------------------------------

json cell_json(const AggregationCell& c) {
  return {{"feature", c.feature}, {"value", c.value},     {"layer", c.column.key()},
          {"n", c.stats.n},       {"mean", c.stats.mean}, {"min", c.stats.min},
          {"q1", c.stats.q1},     {"median", c.stats.median}, {"q3", c.stats.q3},
          {"max", c.stats.max}};
}

json heatmap_json(const HeatmapMatrix& m) {
  json columns = json::array();
  for (const ScoreColumn& c : score_columns()) columns.push_back(c.key());
  json rows = json::array();
  json values = json::array();
  json cells = json::array();
  json volumes = json::array();
  for (const HeatmapRow& r : m.rows) {
    rows.push_back(r.value);
    values.push_back(r.means);
    volumes.push_back(r.n_cases);
  }
  for (const AggregationCell& c : m.cells) cells.push_back(cell_json(c));
  return {{"feature", m.feature}, {"view", m.view},       {"columns", columns},
          {"rows", rows},         {"cells", values},      {"volumes", volumes},
          {"statistics", cells}};
}

void write_cells_csv(std::ostream& out, std::span<const AggregationCell> cells) {
  auto field = [&out](std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
      out << s;
      return;
    }
    out << '"';
    for (char c : s) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  };
  out << "feature,value,layer,n,mean,min,q1,median,q3,max\n";
  for (const AggregationCell& c : cells) {
    field(c.feature);
    out << ',';
    field(c.value);
    out << ',' << c.column.key() << ',' << c.stats.n << ',' << format_number(c.stats.mean) << ','
        << format_number(c.stats.min) << ',' << format_number(c.stats.q1) << ','
        << format_number(c.stats.median) << ',' << format_number(c.stats.q3) << ','
        << format_number(c.stats.max) << '\n';
  }
}

json filter_json(const FilterSpec& f) {
  json equals = json::array();
  for (const auto& [k, v] : f.equals) equals.push_back({k, v});
  json j = {{"equals", equals}};
  if (f.score_quantile) j["score_quantile"] = *f.score_quantile;
  if (!f.view.empty()) j["view"] = f.view;
  return j;
}

FilterSpec parse_filter(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "filter must be an object");
  FilterSpec f;
  if (j.contains("equals")) {
    const json& eq = j["equals"];
    if (eq.is_object()) {
      for (const auto& [k, v] : eq.items()) {
        if (!v.is_string()) throw Error(ErrorCode::SchemaViolation, "filter value for '" + k + "' must be a string");
        f.equals.emplace_back(k, v.get<std::string>());
      }
    } else if (eq.is_array()) {
      for (const json& pair : eq) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw Error(ErrorCode::SchemaViolation, "filter equals entries must be [feature, value] string pairs");
        }
        f.equals.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    } else {
      throw Error(ErrorCode::SchemaViolation, "filter equals must be an array or object");
    }
  }
  if (j.contains("score_quantile") && !j["score_quantile"].is_null()) {
    if (!j["score_quantile"].is_number()) throw Error(ErrorCode::SchemaViolation, "score_quantile must be a number");
    f.score_quantile = j["score_quantile"].get<double>();
  }
  if (j.contains("view")) {
    if (!j["view"].is_string()) throw Error(ErrorCode::SchemaViolation, "filter view must be a string");
    f.view = j["view"].get<std::string>();
  }
  return f;
}

}  // namespace wise
