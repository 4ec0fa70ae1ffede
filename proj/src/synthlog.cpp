#include "wise/synthlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "wise/errors.hpp"

namespace wise::synth {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CaseRng {
 public:
  explicit CaseRng(std::uint64_t seed) : engine_(seed) {}

  // Top 53 bits; std distributions are implementation-defined.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) {
    return n == 0 ? 0 : static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  std::size_t pick(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    const double x = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

std::string_view kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DropMandatory: return "DropMandatory";
    case ViolationKind::SwapPair: return "SwapPair";
    case ViolationKind::Unbalance: return "Unbalance";
    case ViolationKind::Duplicate: return "Duplicate";
    case ViolationKind::InsertExcluded: return "InsertExcluded";
  }
  return "";
}

ViolationKind kind_from_name(const std::string& name) {
  for (auto k : {ViolationKind::DropMandatory, ViolationKind::SwapPair, ViolationKind::Unbalance,
                 ViolationKind::Duplicate, ViolationKind::InsertExcluded}) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown violation kind '" + name + "'");
}

std::string describe(const Violation& v) {
  std::string s(kind_name(v.kind));
  s += '(';
  for (std::size_t i = 0; i < v.activities.size(); ++i) {
    if (i) s += ", ";
    s += v.activities[i];
  }
  if (v.kind == ViolationKind::Unbalance || v.kind == ViolationKind::Duplicate ||
      v.kind == ViolationKind::InsertExcluded) {
    s += ", " + std::to_string(v.times);
  }
  return s + ')';
}

void validate(const GeneratorSpec& spec) {
  for (const FeatureSpec& f : spec.features) {
    if (f.values.empty() || f.values.size() != f.weights.size()) {
      throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' needs one weight per value");
    }
    for (double w : f.weights) {
      if (!(w > 0) || !std::isfinite(w)) {
        throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' has a non-positive weight");
      }
    }
  }
  for (const InjectionRule& rule : spec.injections) {
    if (!(rule.probability >= 0.0 && rule.probability <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "injection probability must lie in [0, 1]");
    }
    const Violation& v = rule.violation;
    const bool arity_ok = v.kind == ViolationKind::SwapPair    ? v.activities.size() == 2
                          : v.kind == ViolationKind::Unbalance ? v.activities.size() >= 2
                                                               : v.activities.size() == 1;
    if (!arity_ok) {
      throw Error(ErrorCode::InvalidArgument, "injection " + describe(v) + " has the wrong number of activities");
    }
    if (v.times < 0) throw Error(ErrorCode::InvalidArgument, "injection " + describe(v) + " has a negative count");
  }
}

void insert_after(std::vector<std::string>& acts, std::ptrdiff_t pos, const std::string& a, int times) {
  const auto at = pos < 0 ? acts.end() : acts.begin() + pos + 1;
  acts.insert(at, static_cast<std::size_t>(times), a);
}

std::ptrdiff_t first_index(const std::vector<std::string>& acts, const std::string& a) {
  const auto it = std::find(acts.begin(), acts.end(), a);
  return it == acts.end() ? -1 : it - acts.begin();
}

std::ptrdiff_t last_index(const std::vector<std::string>& acts, const std::string& a) {
  const auto it = std::find(acts.rbegin(), acts.rend(), a);
  return it == acts.rend() ? -1 : static_cast<std::ptrdiff_t>(acts.rend() - it) - 1;
}

void apply(const Violation& v, std::vector<std::string>& acts, CaseRng& rng) {
  switch (v.kind) {
    case ViolationKind::DropMandatory:
      std::erase(acts, v.activities[0]);
      break;
    case ViolationKind::SwapPair: {
      const auto i = first_index(acts, v.activities[0]);
      const auto j = first_index(acts, v.activities[1]);
      if (i >= 0 && j >= 0) std::swap(acts[static_cast<std::size_t>(i)], acts[static_cast<std::size_t>(j)]);
      break;
    }
    case ViolationKind::Unbalance:
      insert_after(acts, last_index(acts, v.activities[1]), v.activities[1], v.times);
      break;
    case ViolationKind::Duplicate:
      insert_after(acts, first_index(acts, v.activities[0]), v.activities[0], v.times);
      break;
    case ViolationKind::InsertExcluded:
      for (int k = 0; k < v.times; ++k) {
        const std::size_t pos = rng.below(acts.size() + 1);
        acts.insert(acts.begin() + static_cast<std::ptrdiff_t>(pos), v.activities[0]);
      }
      break;
  }
}

std::string case_label(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case-%06zu", index);
  return buf;
}

}  // namespace

std::uint64_t case_stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

Generated generate(const GeneratorSpec& spec, const View& view) {
  validate(spec);
  {
    const Trace probe = Trace::from_activities("template", spec.base_sequence);
    const OracleScore s = oracle_score(view, probe);
    for (LayerId layer : kLayers) {
      if (s.f[layer_index(layer)] != 0) {
        throw Error(ErrorCode::NonConformingTemplate,
                    "base sequence violates view '" + view.name + "' on the " +
                        std::string(layer_title(layer)) + " layer (f=" +
                        format_number(s.f[layer_index(layer)]) + ")");
      }
    }
  }

  constexpr long long kCaseSpacingMs = 3'600'000;
  constexpr long long kEventSpacingMs = 60'000;
  std::vector<Trace> traces;
  traces.reserve(spec.n_cases);
  GroundTruth truth;
  truth.cases.reserve(spec.n_cases);
  std::int64_t next_event_id = 0;

  for (std::size_t i = 0; i < spec.n_cases; ++i) {
    CaseRng rng(case_stream_seed(spec.seed, i));
    AttributeMap features;
    std::map<std::string, std::string> chosen;
    for (const FeatureSpec& f : spec.features) {
      const std::string& value = f.values[rng.pick(f.weights)];
      chosen[f.name] = value;
      features.insert_or_assign(f.name, AttributeValue(value));
    }
    std::vector<std::string> acts = spec.base_sequence;
    CaseTruth ct;
    ct.case_id = case_label(i);
    for (const InjectionRule& rule : spec.injections) {
      const bool matches = std::all_of(rule.target.begin(), rule.target.end(), [&](const auto& kv) {
        const auto it = chosen.find(kv.first);
        return it != chosen.end() && it->second == kv.second;
      });
      if (!matches || !(rng.uniform() < rule.probability)) continue;
      apply(rule.violation, acts, rng);
      ct.applied.push_back(describe(rule.violation));
    }
    ct.n_events = acts.size();
    truth.n_events += acts.size();
    for (const std::string& a : acts) ++truth.activity_counts[a];
    std::vector<Event> events;
    events.reserve(acts.size());
    const auto case_start = spec.start + std::chrono::milliseconds{kCaseSpacingMs * static_cast<long long>(i)};
    for (std::size_t k = 0; k < acts.size(); ++k) {
      Event e;
      e.event_id = next_event_id++;
      e.activity = acts[k];
      e.case_id = ct.case_id;
      e.timestamp = case_start + std::chrono::milliseconds{kEventSpacingMs * static_cast<long long>(k)};
      events.push_back(std::move(e));
    }
    traces.emplace_back(ct.case_id, std::move(events), std::move(features));
    ct.expected_f = oracle_score(view, traces.back()).f;
    truth.cases.push_back(std::move(ct));
  }
  return {EventLog::from_traces(std::move(traces)), std::move(truth)};
}

OracleScore oracle_score(const View& view, const Trace& trace) {
  const auto& events = trace.events();
  std::map<std::string, double> count;
  for (const Event& e : events) count[e.activity] += 1;
  auto count_of = [&](const std::string& a) {
    const auto it = count.find(a);
    return it == count.end() ? 0.0 : it->second;
  };
  const ConstraintSet& c = view.constraints;
  OracleScore out;

  double& f1 = out.f[0];
  for (const std::string& a : c.mandatory) {
    const bool present = std::any_of(events.begin(), events.end(), [&](const Event& e) { return e.activity == a; });
    f1 += view.element_weight(LayerId::Foundational, a) * (present ? 0.0 : 1.0);
  }

  double& f2 = out.f[1];
  for (const ActivityPair& p : c.sequential) {
    bool seen = false;
    for (std::size_t i = 0; i < events.size() && !seen; ++i) {
      for (std::size_t j = 0; j < events.size() && !seen; ++j) {
        seen = events[i].activity == p.first && events[j].activity == p.second && trace.order().precedes(i, j);
      }
    }
    f2 += view.element_weight(LayerId::Sequential, sequential_key(p)) * (seen ? 0.0 : 1.0);
  }

  double& f3 = out.f[2];
  for (const auto& group : c.equilibrium) {
    const double reference = count_of(group[0]);
    for (std::size_t r = 1; r < group.size(); ++r) {
      const double diff = count_of(group[r]) - reference;
      f3 += view.element_weight(LayerId::Equilibrium, equilibrium_key(group[0], group[r])) *
            (diff < 0 ? -diff : diff);
    }
  }

  double& f4 = out.f[3];
  for (const std::string& u : c.singularity) {
    const double excess = count_of(u) - 1.0;
    f4 += view.element_weight(LayerId::Singularity, u) * (excess > 0 ? excess : 0.0);
  }

  double& f5 = out.f[4];
  for (const std::string& x : c.exclusion) f5 += view.element_weight(LayerId::Exclusion, x) * count_of(x);

  out.penalty = 0;
  for (std::size_t j = 0; j < kLayerCount; ++j) {
    out.weighted[j] = view.weights[j] * out.f[j];
    out.penalty += out.weighted[j];
    const double ls = 1.0 - out.weighted[j];
    out.layer_scores[j] = ls < 0 ? 0.0 : (ls > 1 ? 1.0 : ls);
  }
  out.score = 1.0 - out.penalty;
  out.normalized = out.score > 0 ? out.score / 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------

GeneratorSpec parse_generator_spec(const json& j) {
  try {
    GeneratorSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.n_cases = j.value("n_cases", std::size_t{0});
    spec.base_sequence = j.at("base_sequence").get<std::vector<std::string>>();
    if (j.contains("start")) {
      const auto ts = parse_iso8601(j["start"].get<std::string>());
      if (!ts) throw Error(ErrorCode::InvalidArgument, "generator spec: bad start timestamp");
      spec.start = *ts;
    }
    for (const json& f : j.value("features", json::array())) {
      FeatureSpec fs;
      fs.name = f.at("name").get<std::string>();
      fs.values = f.at("values").get<std::vector<std::string>>();
      fs.weights = f.contains("weights") ? f["weights"].get<std::vector<double>>()
                                         : std::vector<double>(fs.values.size(), 1.0);
      spec.features.push_back(std::move(fs));
    }
    for (const json& r : j.value("injections", json::array())) {
      InjectionRule rule;
      rule.target = r.value("target", std::map<std::string, std::string>{});
      rule.probability = r.value("probability", 1.0);
      const json& v = r.at("violation");
      rule.violation.kind = kind_from_name(v.at("kind").get<std::string>());
      rule.violation.activities = v.at("activities").get<std::vector<std::string>>();
      rule.violation.times = v.value("times", 1);
      spec.injections.push_back(std::move(rule));
    }
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("generator spec: ") + e.what());
  }
}

json generator_spec_json(const GeneratorSpec& spec) {
  json features = json::array();
  for (const FeatureSpec& f : spec.features) {
    features.push_back({{"name", f.name}, {"values", f.values}, {"weights", f.weights}});
  }
  json injections = json::array();
  for (const InjectionRule& r : spec.injections) {
    injections.push_back({{"target", r.target},
                          {"probability", r.probability},
                          {"violation",
                           {{"kind", kind_name(r.violation.kind)},
                            {"activities", r.violation.activities},
                            {"times", r.violation.times}}}});
  }
  return {{"seed", spec.seed},
          {"n_cases", spec.n_cases},
          {"start", format_iso8601(spec.start)},
          {"base_sequence", spec.base_sequence},
          {"features", features},
          {"injections", injections}};
}

json ground_truth_json(const GroundTruth& truth) {
  json cases = json::array();
  for (const CaseTruth& c : truth.cases) {
    cases.push_back({{"case_id", c.case_id},
                     {"applied", c.applied},
                     {"expected_f", c.expected_f},
                     {"n_events", c.n_events}});
  }
  return {{"cases", cases},
          {"n_cases", truth.cases.size()},
          {"n_events", truth.n_events},
          {"activity_counts", truth.activity_counts}};
}

}  // namespace wise::synth
