#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wise/event_log.hpp"
#include "wise/norm.hpp"
#include "wise/scoring.hpp"

namespace wise {

/// A layer column, or the overall normalized score.
struct ScoreColumn {
  std::optional<LayerId> layer;  // nullopt = Overall

  static ScoreColumn overall() { return {}; }
  bool is_overall() const { return !layer.has_value(); }
  std::string_view key() const { return layer ? layer_key(*layer) : std::string_view("overall"); }

  friend bool operator==(const ScoreColumn&, const ScoreColumn&) = default;
};

inline constexpr std::size_t kColumnCount = kLayerCount + 1;
/// Layers 1..5, then Overall.
std::array<ScoreColumn, kColumnCount> score_columns();

struct BoxStats {
  std::size_t n = 0;
  double mean = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;

  friend bool operator==(const BoxStats&, const BoxStats&) = default;
};

/// Linear interpolation between closest ranks: position (n - 1) * q in the
/// sorted sample. Throws Error(InvalidArgument) on an empty sample.
double quantile_inclusive(std::span<const double> sorted, double q);
BoxStats box_stats(std::vector<double> values);

struct AggregationCell {
  std::string feature;
  std::string value;
  ScoreColumn column;
  BoxStats stats;

  friend bool operator==(const AggregationCell&, const AggregationCell&) = default;
};

/// One cell per (distinct value, column); values ascending, columns in
/// score_columns() order. Cases lacking the feature group under "(missing)".
/// Throws Error(UnknownFeature | NonCategoricalFeature).
std::vector<AggregationCell> aggregate(const ScoreTable& table, const EventLog& log,
                                       std::string_view feature);

struct HeatmapRow {
  std::string value;
  std::size_t n_cases = 0;
  std::array<double, kColumnCount> means{};

  friend bool operator==(const HeatmapRow&, const HeatmapRow&) = default;
};

struct HeatmapMatrix {
  std::string feature;
  std::string view;
  /// Worst Overall mean first; ties by value ascending.
  std::vector<HeatmapRow> rows;
  std::vector<AggregationCell> cells;

  friend bool operator==(const HeatmapMatrix&, const HeatmapMatrix&) = default;
};

HeatmapMatrix build_heatmap(const ScoreTable& table, const EventLog& log, std::string_view feature);

struct FilterSpec {
  std::vector<std::pair<std::string, std::string>> equals;
  /// Keep cases whose normalized score is at most this quantile of the
  /// input table's normalized scores.
  std::optional<double> score_quantile;
  std::string view;

  bool empty() const { return equals.empty() && !score_quantile; }
};

struct Filtered {
  EventLog log;
  ScoreTable table;
};

/// Throws Error(UnknownFeature | UnknownView | InvalidArgument). An empty
/// result is returned, not reported.
Filtered apply_filter(const EventLog& log, const ScoreTable& table, const FilterSpec& filter);

struct RankedValue {
  std::string feature;
  std::string value;
  double deficit = 0;  // (1 - Overall mean) * n_cases
  std::size_t n_cases = 0;

  friend bool operator==(const RankedValue&, const RankedValue&) = default;
};

/// Overall cells only; descending deficit, ties by (feature, value).
std::vector<RankedValue> rank_feature_values(std::span<const AggregationCell> cells,
                                             std::size_t min_support);

/// Every case-level categorical feature in the catalog, aggregated.
std::vector<AggregationCell> aggregate_all_features(const ScoreTable& table, const EventLog& log);

nlohmann::json cell_json(const AggregationCell& cell);
nlohmann::json heatmap_json(const HeatmapMatrix& matrix);
/// Long form: feature,value,layer,n,mean,min,q1,median,q3,max.
void write_cells_csv(std::ostream& out, std::span<const AggregationCell> cells);
nlohmann::json filter_json(const FilterSpec& filter);
/// Accepts {"equals": [[f, v], ...] | {f: v, ...}, "score_quantile": q, "view": name}.
FilterSpec parse_filter(const nlohmann::json& j);

}  // namespace wise
