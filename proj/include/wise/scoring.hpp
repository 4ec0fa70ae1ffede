#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wise/event_log.hpp"
#include "wise/norm.hpp"

namespace wise {

struct ViolatedElement {
  std::string element;  // activity name, "a1 -> a2" or "ref == member"
  double magnitude = 0;  // contribution to the layer's raw violation
  /// Sequential pairs only: the pair failed because a1 or a2 never occurs,
  /// not because of their order.
  bool vacuous = false;

  friend bool operator==(const ViolatedElement&, const ViolatedElement&) = default;
};

struct LayerResult {
  LayerId layer = LayerId::Foundational;
  double raw_violation = 0;     // f(c_j, trace)
  double weighted_penalty = 0;  // w_j * f
  double layer_score = 1;       // clamp(1 - w_j * f, 0, 1)
  std::vector<ViolatedElement> violated_elements;

  friend bool operator==(const LayerResult&, const LayerResult&) = default;
};

struct InstanceScore {
  std::string case_id;
  std::string view_name;
  std::array<LayerResult, kLayerCount> layers;
  double penalty = 0;  // sum of the weighted layer penalties
  double score = 1;    // 1 - penalty, may be negative
  double normalized_score = 1;  // score clamped to [0, 1]

  const LayerResult& layer(LayerId id) const { return layers[layer_index(id)]; }

  friend bool operator==(const InstanceScore&, const InstanceScore&) = default;
};

struct ScoreTable {
  std::string view_name;
  std::string norm_digest;
  std::vector<InstanceScore> rows;  // log trace order

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

// Raw violation of one layer. The ConstraintSet overloads weigh every
// element 1; the View overloads apply the view's element weights.
double penalty_mandatory(const ConstraintSet& constraints, const Trace& trace);
double penalty_sequential(const ConstraintSet& constraints, const Trace& trace);
double penalty_equilibrium(const ConstraintSet& constraints, const Trace& trace);
double penalty_singularity(const ConstraintSet& constraints, const Trace& trace);
double penalty_exclusion(const ConstraintSet& constraints, const Trace& trace);

LayerResult evaluate_layer(const View& view, LayerId layer, const Trace& trace);

/// A view with its activities resolved against one codebook, so the same
/// compiled form scores every trace of a log.
class CompiledView {
 public:
  CompiledView(const View& view, const Codebook& codebook);

  /// `trace` must be encoded against an identical codebook.
  InstanceScore score(const Trace& trace) const;
  LayerResult evaluate(LayerId layer, const Trace& trace) const;

  const View& view() const { return *view_; }

 private:
  struct Element {
    std::string descriptor;
    double weight = 1;
    ActivityCode first = kAbsentActivity;
    ActivityCode second = kAbsentActivity;
  };
  struct Group {
    ActivityCode reference = kAbsentActivity;
    std::vector<Element> members;
  };

  const View* view_;
  std::vector<Element> mandatory_;
  std::vector<Element> sequential_;
  std::vector<Group> equilibrium_;
  std::vector<Element> singularity_;
  std::vector<Element> exclusion_;
};

InstanceScore score_trace(const View& view, const Trace& trace);

struct ScoreOptions {
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

ScoreTable score_log(const View& view, const EventLog& log, const ScoreOptions& options = {});
std::vector<ScoreTable> score_all_views(const ProcessNorm& norm, const EventLog& log,
                                        const ScoreOptions& options = {});

/// Columns: case_id,view,f1..f5,p1..p5,penalty,score,normalized_score.
void write_score_csv(std::ostream& out, const ScoreTable& table);
nlohmann::json score_row_json(const InstanceScore& row);
nlohmann::json score_table_json(const ScoreTable& table);

}  // namespace wise
