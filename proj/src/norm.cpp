#include "wise/norm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "wise/errors.hpp"

namespace wise {

using nlohmann::json;

std::string_view layer_key(LayerId layer) {
  switch (layer) {
    case LayerId::Foundational: return "foundational";
    case LayerId::Sequential: return "sequential";
    case LayerId::Equilibrium: return "equilibrium";
    case LayerId::Singularity: return "singularity";
    case LayerId::Exclusion: return "exclusion";
  }
  return "";
}

std::string_view layer_title(LayerId layer) {
  switch (layer) {
    case LayerId::Foundational: return "Foundational";
    case LayerId::Sequential: return "Sequential";
    case LayerId::Equilibrium: return "Equilibrium";
    case LayerId::Singularity: return "Singularity";
    case LayerId::Exclusion: return "Exclusion";
  }
  return "";
}

std::optional<LayerId> layer_from_key(std::string_view key) {
  for (LayerId layer : kLayers) {
    if (layer_key(layer) == key) return layer;
  }
  return std::nullopt;
}

std::string sequential_key(const ActivityPair& pair) { return pair.first + " -> " + pair.second; }

std::string equilibrium_key(std::string_view reference, std::string_view member) {
  std::string key(reference);
  key += " == ";
  key += member;
  return key;
}

double View::element_weight(LayerId layer, std::string_view key) const {
  const auto& map = element_weights[layer_index(layer)];
  const auto it = map.find(key);
  return it == map.end() ? 1.0 : it->second;
}

const View* ProcessNorm::find_view(std::string_view name) const {
  for (const View& v : views) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "norm schema violation at " + path + ": " + what);
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  return j;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(path + "/" + key, "unknown key");
    }
  }
}

std::string activity_name(const json& j, const std::string& path) {
  if (!j.is_string() || j.get_ref<const std::string&>().empty()) {
    schema_error(path, "expected a non-empty activity name");
  }
  return j.get<std::string>();
}

std::vector<std::string> activity_set(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of activity names");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string name = activity_name(j[i], path + "/" + std::to_string(i));
    if (!seen.insert(name).second) schema_error(path + "/" + std::to_string(i), "duplicate activity '" + name + "'");
    out.push_back(std::move(name));
  }
  return out;
}

ConstraintSet parse_constraints(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown_keys(j, path, {"mandatory", "sequential", "equilibrium", "singularity", "exclusion"});
  ConstraintSet c;
  if (j.contains("mandatory")) c.mandatory = activity_set(j["mandatory"], path + "/mandatory");
  if (j.contains("singularity")) c.singularity = activity_set(j["singularity"], path + "/singularity");
  if (j.contains("exclusion")) c.exclusion = activity_set(j["exclusion"], path + "/exclusion");
  if (j.contains("sequential")) {
    const json& seq = j["sequential"];
    const std::string seq_path = path + "/sequential";
    if (!seq.is_array()) schema_error(seq_path, "expected an array of [a1, a2] pairs");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::string p = seq_path + "/" + std::to_string(i);
      if (!seq[i].is_array() || seq[i].size() != 2) schema_error(p, "expected a pair [a1, a2]");
      ActivityPair pair{activity_name(seq[i][0], p + "/0"), activity_name(seq[i][1], p + "/1")};
      if (std::find(c.sequential.begin(), c.sequential.end(), pair) != c.sequential.end()) {
        schema_error(p, "duplicate pair " + sequential_key(pair));
      }
      c.sequential.push_back(std::move(pair));
    }
  }
  if (j.contains("equilibrium")) {
    const json& eq = j["equilibrium"];
    const std::string eq_path = path + "/equilibrium";
    if (!eq.is_array()) schema_error(eq_path, "expected an array of activity groups");
    for (std::size_t i = 0; i < eq.size(); ++i) {
      const std::string p = eq_path + "/" + std::to_string(i);
      if (!eq[i].is_array()) schema_error(p, "expected an activity group");
      std::vector<std::string> group;
      for (std::size_t k = 0; k < eq[i].size(); ++k) {
        std::string name = activity_name(eq[i][k], p + "/" + std::to_string(k));
        if (std::find(group.begin(), group.end(), name) != group.end()) {
          throw Error(ErrorCode::EmptyEquilibriumGroup,
                      "equilibrium group at " + p + " repeats activity '" + name + "'");
        }
        group.push_back(std::move(name));
      }
      if (group.size() < 2) {
        throw Error(ErrorCode::EmptyEquilibriumGroup,
                    "equilibrium group at " + p + " needs at least two distinct activities");
      }
      c.equilibrium.push_back(std::move(group));
    }
  }
  return c;
}

std::set<std::string, std::less<>> element_keys(const ConstraintSet& c, LayerId layer) {
  std::set<std::string, std::less<>> keys;
  switch (layer) {
    case LayerId::Foundational: keys.insert(c.mandatory.begin(), c.mandatory.end()); break;
    case LayerId::Sequential:
      for (const auto& p : c.sequential) keys.insert(sequential_key(p));
      break;
    case LayerId::Equilibrium:
      for (const auto& g : c.equilibrium) {
        for (std::size_t r = 1; r < g.size(); ++r) keys.insert(equilibrium_key(g.front(), g[r]));
      }
      break;
    case LayerId::Singularity: keys.insert(c.singularity.begin(), c.singularity.end()); break;
    case LayerId::Exclusion: keys.insert(c.exclusion.begin(), c.exclusion.end()); break;
  }
  return keys;
}

double parse_weight(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double w = j.get<double>();
  if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
    throw Error(ErrorCode::WeightOutOfRange, "weight at " + path + " is " + format_number(w) +
                                                 ", must lie in [0, 1]");
  }
  return w;
}

View parse_view(const json& j, const std::string& path) {
  require_object(j, path);
  reject_unknown_keys(j, path, {"name", "description", "weights", "constraints", "element_weights"});
  View view;
  if (!j.contains("name") || !j["name"].is_string() || j["name"].get_ref<const std::string&>().empty()) {
    schema_error(path + "/name", "expected a non-empty string");
  }
  view.name = j["name"].get<std::string>();
  if (j.contains("description")) {
    if (!j["description"].is_string()) schema_error(path + "/description", "expected a string");
    view.description = j["description"].get<std::string>();
  }
  if (!j.contains("weights")) schema_error(path + "/weights", "missing");
  const json& weights = require_object(j["weights"], path + "/weights");
  reject_unknown_keys(weights, path + "/weights",
                      {"foundational", "sequential", "equilibrium", "singularity", "exclusion"});
  for (LayerId layer : kLayers) {
    const std::string key(layer_key(layer));
    const std::string p = path + "/weights/" + key;
    if (!weights.contains(key)) schema_error(p, "missing layer weight");
    view.weights[layer_index(layer)] = parse_weight(weights[key], p);
  }
  if (!j.contains("constraints")) schema_error(path + "/constraints", "missing");
  view.constraints = parse_constraints(j["constraints"], path + "/constraints");
  if (j.contains("element_weights")) {
    const std::string ew_path = path + "/element_weights";
    const json& ew = require_object(j["element_weights"], ew_path);
    for (const auto& [layer_name, entries] : ew.items()) {
      const std::string lp = ew_path + "/" + layer_name;
      const auto layer = layer_from_key(layer_name);
      if (!layer) schema_error(lp, "unknown layer");
      require_object(entries, lp);
      const auto known = element_keys(view.constraints, *layer);
      for (const auto& [key, value] : entries.items()) {
        const std::string kp = lp + "/" + key;
        if (!known.contains(key)) schema_error(kp, "no such constraint element in this layer");
        view.element_weights[layer_index(*layer)][key] = parse_weight(value, kp);
      }
    }
  }
  return view;
}

}  // namespace

ProcessNorm load_norm(const json& document) {
  require_object(document, "/");
  reject_unknown_keys(document, "", {"views", "metadata"});
  if (!document.contains("views") || !document["views"].is_array() || document["views"].empty()) {
    schema_error("/views", "expected a non-empty array of views");
  }
  ProcessNorm norm;
  std::set<std::string> names;
  const json& views = document["views"];
  for (std::size_t i = 0; i < views.size(); ++i) {
    View view = parse_view(views[i], "/views/" + std::to_string(i));
    if (!names.insert(view.name).second) {
      throw Error(ErrorCode::DuplicateViewName, "duplicate view name '" + view.name + "' at /views/" + std::to_string(i));
    }
    norm.views.push_back(std::move(view));
  }
  if (document.contains("metadata")) {
    const json& meta = require_object(document["metadata"], "/metadata");
    for (const auto& [key, value] : meta.items()) {
      if (!value.is_string()) schema_error("/metadata/" + key, "expected a string");
      norm.metadata[key] = value.get<std::string>();
    }
  }
  return norm;
}

ProcessNorm load_norm(std::istream& in) {
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("norm is not valid JSON: ") + e.what());
  }
  return load_norm(document);
}

ProcessNorm load_norm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open norm file " + path.string());
  return load_norm(in);
}

json serialize_view(const View& view) {
  json j = json::object();
  j["name"] = view.name;
  if (view.description) j["description"] = *view.description;
  json weights = json::object();
  for (LayerId layer : kLayers) weights[std::string(layer_key(layer))] = view.weight(layer);
  j["weights"] = weights;
  const ConstraintSet& c = view.constraints;
  json constraints = json::object();
  constraints["mandatory"] = c.mandatory;
  json seq = json::array();
  for (const auto& p : c.sequential) seq.push_back({p.first, p.second});
  constraints["sequential"] = seq;
  constraints["equilibrium"] = c.equilibrium;
  constraints["singularity"] = c.singularity;
  constraints["exclusion"] = c.exclusion;
  j["constraints"] = constraints;
  json ew = json::object();
  for (LayerId layer : kLayers) {
    const auto& map = view.element_weights[layer_index(layer)];
    if (map.empty()) continue;
    json entries = json::object();
    for (const auto& [key, w] : map) entries[key] = w;
    ew[std::string(layer_key(layer))] = entries;
  }
  if (!ew.empty()) j["element_weights"] = ew;
  return j;
}

json serialize_norm(const ProcessNorm& norm) {
  json j = json::object();
  json views = json::array();
  for (const View& v : norm.views) views.push_back(serialize_view(v));
  j["views"] = views;
  if (!norm.metadata.empty()) j["metadata"] = norm.metadata;
  return j;
}

std::string view_digest(const View& view) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_view(view).dump()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// ---------------------------------------------------------------------------

std::vector<NormWarning> validate_against_log(const ProcessNorm& norm, const EventLog& log) {
  struct Keyed {
    std::size_t layer;
    std::string activity;
    int kind;
    std::size_t view;
    NormWarning warning;
  };
  std::vector<Keyed> found;
  const auto& alphabet = log.activity_alphabet();

  for (std::size_t vi = 0; vi < norm.views.size(); ++vi) {
    const View& view = norm.views[vi];
    const ConstraintSet& c = view.constraints;
    std::set<std::pair<LayerId, std::string>> reported;
    auto check = [&](LayerId layer, const std::string& activity) {
      if (alphabet.contains(activity) || !reported.emplace(layer, activity).second) return;
      NormWarning w;
      w.kind = NormWarning::Kind::AbsentActivity;
      w.view = view.name;
      w.layer = layer;
      w.activity = activity;
      w.message = "view '" + view.name + "', " + std::string(layer_title(layer)) + " layer: activity '" +
                  activity + "' does not occur in the log";
      found.push_back({layer_index(layer), activity, 0, vi, std::move(w)});
    };
    for (const auto& a : c.mandatory) check(LayerId::Foundational, a);
    for (const auto& p : c.sequential) {
      check(LayerId::Sequential, p.first);
      check(LayerId::Sequential, p.second);
    }
    for (const auto& g : c.equilibrium) {
      for (const auto& a : g) check(LayerId::Equilibrium, a);
    }
    for (const auto& a : c.singularity) check(LayerId::Singularity, a);
    for (const auto& a : c.exclusion) check(LayerId::Exclusion, a);

    std::set<std::string> refs_reported;
    for (const auto& g : c.equilibrium) {
      if (alphabet.contains(g.front()) || !refs_reported.insert(g.front()).second) continue;
      NormWarning w;
      w.kind = NormWarning::Kind::AbsentEquilibriumReference;
      w.view = view.name;
      w.layer = LayerId::Equilibrium;
      w.activity = g.front();
      w.message = "view '" + view.name + "', Equilibrium layer: reference activity '" + g.front() +
                  "' never occurs, so its groups compare against a zero count";
      found.push_back({layer_index(LayerId::Equilibrium), g.front(), 1, vi, std::move(w)});
    }
  }
  std::sort(found.begin(), found.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.layer, a.activity, a.kind, a.view) < std::tie(b.layer, b.activity, b.kind, b.view);
  });
  std::vector<NormWarning> out;
  out.reserve(found.size());
  for (auto& k : found) out.push_back(std::move(k.warning));
  return out;
}

}  // namespace wise
