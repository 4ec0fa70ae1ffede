#include "wise/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "wise/simd/kernels.hpp"

namespace wise {

namespace {

std::size_t occurrences(std::span<const ActivityCode> codes, ActivityCode code) {
  return code == kAbsentActivity ? 0 : simd::count_equal(codes, code);
}

bool precedes_somewhere(const Trace& trace, ActivityCode first, ActivityCode second) {
  if (first == kAbsentActivity || second == kAbsentActivity) return false;
  const auto codes = trace.codes();
  if (trace.order().is_total()) {
    const auto i = simd::find_first(codes, first);
    return i >= 0 && simd::find_last(codes, second) > i;
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] != first) continue;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (codes[j] == second && trace.order().precedes(i, j)) return true;
    }
  }
  return false;
}

void finish(LayerResult& r, double layer_weight) {
  r.weighted_penalty = layer_weight * r.raw_violation;
  r.layer_score = std::clamp(1.0 - r.weighted_penalty, 0.0, 1.0);
}

View unit_view(const ConstraintSet& constraints) {
  View v;
  v.name = "unweighted";
  v.constraints = constraints;
  v.weights.fill(1.0);
  return v;
}

}  // namespace

CompiledView::CompiledView(const View& view, const Codebook& codebook) : view_(&view) {
  const ConstraintSet& c = view.constraints;
  auto single = [&](LayerId layer, const std::string& activity) {
    return Element{activity, view.element_weight(layer, activity), codebook.lookup(activity), kAbsentActivity};
  };
  for (const auto& a : c.mandatory) mandatory_.push_back(single(LayerId::Foundational, a));
  for (const auto& a : c.singularity) singularity_.push_back(single(LayerId::Singularity, a));
  for (const auto& a : c.exclusion) exclusion_.push_back(single(LayerId::Exclusion, a));
  for (const auto& p : c.sequential) {
    const std::string key = sequential_key(p);
    sequential_.push_back(Element{key, view.element_weight(LayerId::Sequential, key),
                                  codebook.lookup(p.first), codebook.lookup(p.second)});
  }
  for (const auto& g : c.equilibrium) {
    Group group;
    group.reference = codebook.lookup(g.front());
    for (std::size_t r = 1; r < g.size(); ++r) {
      const std::string key = equilibrium_key(g.front(), g[r]);
      group.members.push_back(Element{key, view.element_weight(LayerId::Equilibrium, key),
                                      codebook.lookup(g[r]), kAbsentActivity});
    }
    equilibrium_.push_back(std::move(group));
  }
}

LayerResult CompiledView::evaluate(LayerId layer, const Trace& trace) const {
  const auto codes = trace.codes();
  LayerResult r;
  r.layer = layer;
  auto add = [&r](const Element& e, double unweighted, bool vacuous = false) {
    if (unweighted == 0) return;
    const double magnitude = e.weight * unweighted;
    r.raw_violation += magnitude;
    r.violated_elements.push_back({e.descriptor, magnitude, vacuous});
  };
  switch (layer) {
    case LayerId::Foundational:
      for (const Element& e : mandatory_) {
        const bool present = e.first != kAbsentActivity && simd::find_first(codes, e.first) >= 0;
        add(e, present ? 0.0 : 1.0);
      }
      break;
    case LayerId::Sequential:
      for (const Element& e : sequential_) {
        if (precedes_somewhere(trace, e.first, e.second)) continue;
        const bool vacuous = occurrences(codes, e.first) == 0 || occurrences(codes, e.second) == 0;
        add(e, 1.0, vacuous);
      }
      break;
    case LayerId::Equilibrium:
      for (const Group& g : equilibrium_) {
        const auto reference = static_cast<double>(occurrences(codes, g.reference));
        for (const Element& m : g.members) {
          add(m, std::fabs(static_cast<double>(occurrences(codes, m.first)) - reference));
        }
      }
      break;
    case LayerId::Singularity:
      for (const Element& e : singularity_) {
        const std::size_t n = occurrences(codes, e.first);
        add(e, n > 1 ? static_cast<double>(n - 1) : 0.0);
      }
      break;
    case LayerId::Exclusion:
      for (const Element& e : exclusion_) add(e, static_cast<double>(occurrences(codes, e.first)));
      break;
  }
  finish(r, view_->weight(layer));
  return r;
}

InstanceScore CompiledView::score(const Trace& trace) const {
  InstanceScore s;
  s.case_id = trace.case_id();
  s.view_name = view_->name;
  s.penalty = 0.0;
  for (LayerId layer : kLayers) {
    LayerResult& r = s.layers[layer_index(layer)];
    r = evaluate(layer, trace);
    s.penalty += r.weighted_penalty;
  }
  s.score = 1.0 - s.penalty;
  // The maximum attainable score is 1, so normalizing is a clamp at zero.
  s.normalized_score = s.score > 0.0 ? s.score : 0.0;
  return s;
}

double penalty_mandatory(const ConstraintSet& constraints, const Trace& trace) {
  return evaluate_layer(unit_view(constraints), LayerId::Foundational, trace).raw_violation;
}

double penalty_sequential(const ConstraintSet& constraints, const Trace& trace) {
  return evaluate_layer(unit_view(constraints), LayerId::Sequential, trace).raw_violation;
}

double penalty_equilibrium(const ConstraintSet& constraints, const Trace& trace) {
  return evaluate_layer(unit_view(constraints), LayerId::Equilibrium, trace).raw_violation;
}

double penalty_singularity(const ConstraintSet& constraints, const Trace& trace) {
  return evaluate_layer(unit_view(constraints), LayerId::Singularity, trace).raw_violation;
}

double penalty_exclusion(const ConstraintSet& constraints, const Trace& trace) {
  return evaluate_layer(unit_view(constraints), LayerId::Exclusion, trace).raw_violation;
}

LayerResult evaluate_layer(const View& view, LayerId layer, const Trace& trace) {
  return CompiledView(view, *trace.codebook()).evaluate(layer, trace);
}

InstanceScore score_trace(const View& view, const Trace& trace) {
  return CompiledView(view, *trace.codebook()).score(trace);
}

ScoreTable score_log(const View& view, const EventLog& log, const ScoreOptions& options) {
  ScoreTable table;
  table.view_name = view.name;
  table.norm_digest = view_digest(view);
  const auto& traces = log.traces();
  table.rows.resize(traces.size());
  if (traces.empty()) return table;

  const CompiledView compiled(view, *log.codebook());
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Trace& t = traces[i];
      table.rows[i] = t.codebook() == log.codebook() ? compiled.score(t) : score_trace(view, t);
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, traces.size()));
  if (threads <= 1) {
    score_range(0, traces.size());
    return table;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (traces.size() + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(traces.size(), begin + chunk);
    if (begin >= end) break;
    workers.emplace_back(score_range, begin, end);
  }
  workers.clear();
  return table;
}

std::vector<ScoreTable> score_all_views(const ProcessNorm& norm, const EventLog& log,
                                        const ScoreOptions& options) {
  std::vector<ScoreTable> tables;
  tables.reserve(norm.views.size());
  for (const View& v : norm.views) tables.push_back(score_log(v, log, options));
  return tables;
}

// ---------------------------------------------------------------------------

namespace {

void write_csv_field(std::ostream& out, std::string_view s) {
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

}  // namespace

void write_score_csv(std::ostream& out, const ScoreTable& table) {
  out << "case_id,view,f1,f2,f3,f4,f5,p1,p2,p3,p4,p5,penalty,score,normalized_score\n";
  for (const InstanceScore& row : table.rows) {
    write_csv_field(out, row.case_id);
    out << ',';
    write_csv_field(out, row.view_name);
    for (const LayerResult& l : row.layers) out << ',' << format_number(l.raw_violation);
    for (const LayerResult& l : row.layers) out << ',' << format_number(l.weighted_penalty);
    out << ',' << format_number(row.penalty) << ',' << format_number(row.score) << ','
        << format_number(row.normalized_score) << '\n';
  }
}

nlohmann::json score_row_json(const InstanceScore& row) {
  nlohmann::json j = nlohmann::json::object();
  j["case_id"] = row.case_id;
  j["view"] = row.view_name;
  for (LayerId layer : kLayers) {
    const std::string n = std::to_string(layer_index(layer) + 1);
    j["f" + n] = row.layer(layer).raw_violation;
  }
  for (LayerId layer : kLayers) {
    const std::string n = std::to_string(layer_index(layer) + 1);
    j["p" + n] = row.layer(layer).weighted_penalty;
  }
  j["penalty"] = row.penalty;
  j["score"] = row.score;
  j["normalized_score"] = row.normalized_score;
  nlohmann::json layer_scores = nlohmann::json::object();
  nlohmann::json violated = nlohmann::json::array();
  for (const LayerResult& l : row.layers) {
    layer_scores[std::string(layer_key(l.layer))] = l.layer_score;
    for (const ViolatedElement& v : l.violated_elements) {
      violated.push_back({{"layer", layer_key(l.layer)},
                          {"element", v.element},
                          {"magnitude", v.magnitude},
                          {"vacuous", v.vacuous}});
    }
  }
  j["layer_scores"] = layer_scores;
  j["violated_elements"] = violated;
  return j;
}

nlohmann::json score_table_json(const ScoreTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const InstanceScore& row : table.rows) rows.push_back(score_row_json(row));
  return {{"view", table.view_name}, {"norm_digest", table.norm_digest}, {"rows", rows}};
}

}  // namespace wise
