#include "wise/insights.hpp"

#include <cstdio>
#include <map>
#include <tuple>

#include <httplib.h>

#include "wise/errors.hpp"

namespace wise {

using nlohmann::json;

std::string_view layer_diagnosis(LayerId layer) {
  switch (layer) {
    case LayerId::Foundational: return "missing steps";
    case LayerId::Sequential: return "order violations";
    case LayerId::Equilibrium: return "imbalance/quantity mismatch";
    case LayerId::Singularity: return "rework/repetition";
    case LayerId::Exclusion: return "manual changes";
  }
  return "";
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::vector<Finding> derive_findings(std::span<const AggregationCell> cells, std::size_t k,
                                     std::size_t min_support) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  using Key = std::tuple<std::string_view, std::string_view>;
  std::map<Key, std::vector<const AggregationCell*>> by_value;
  for (const AggregationCell& c : cells) by_value[{c.feature, c.value}].push_back(&c);

  const auto ranked = rank_feature_values(cells, min_support);
  std::vector<Finding> out;
  for (std::size_t i = 0; i < ranked.size() && out.size() < k; ++i) {
    const RankedValue& rv = ranked[i];
    Finding f;
    f.rank = out.size() + 1;
    f.feature = rv.feature;
    f.value = rv.value;
    f.deficit = rv.deficit;
    f.n_cases = rv.n_cases;
    std::array<const AggregationCell*, kColumnCount> slots{};
    for (const AggregationCell* c : by_value[{rv.feature, rv.value}]) {
      const std::size_t slot = c->column.is_overall() ? kLayerCount : layer_index(*c->column.layer);
      if (slots[slot] == nullptr) slots[slot] = c;
    }
    bool have_layer = false;
    for (LayerId layer : kLayers) {
      const AggregationCell* c = slots[layer_index(layer)];
      if (c == nullptr) continue;
      if (!have_layer || c->stats.mean < f.layer_mean) {
        f.layer = layer;
        f.layer_mean = c->stats.mean;
        have_layer = true;
      }
    }
    f.overall_mean = 1.0 - rv.deficit / static_cast<double>(rv.n_cases);
    if (slots[kLayerCount] != nullptr) f.overall_mean = slots[kLayerCount]->stats.mean;
    for (const AggregationCell* c : slots) {
      if (c != nullptr) f.evidence.push_back(*c);
    }
    f.statement = f.feature + "=" + f.value + " (" + std::to_string(f.n_cases) + " cases, overall mean " +
                  fixed4(f.overall_mean) + ", deficit " + fixed4(f.deficit) + ") scores lowest on the " +
                  std::string(layer_title(f.layer)) + " layer (mean " + fixed4(f.layer_mean) +
                  "), indicating " + std::string(layer_diagnosis(f.layer)) + ".";
    out.push_back(std::move(f));
  }
  return out;
}

json finding_json(const Finding& f) {
  json evidence = json::array();
  for (const AggregationCell& c : f.evidence) evidence.push_back(cell_json(c));
  return {{"rank", f.rank},
          {"feature", f.feature},
          {"value", f.value},
          {"layer", layer_key(f.layer)},
          {"layer_mean", f.layer_mean},
          {"overall_mean", f.overall_mean},
          {"deficit", f.deficit},
          {"n_cases", f.n_cases},
          {"statement", f.statement},
          {"evidence", evidence}};
}

json norm_summary(const ProcessNorm& norm) {
  json views = json::array();
  for (const View& v : norm.views) {
    json weights = json::object();
    for (LayerId layer : kLayers) weights[std::string(layer_key(layer))] = v.weight(layer);
    const ConstraintSet& c = v.constraints;
    views.push_back({{"name", v.name},
                     {"weights", weights},
                     {"constraint_counts",
                      {{"mandatory", c.mandatory.size()},
                       {"sequential", c.sequential.size()},
                       {"equilibrium", c.equilibrium.size()},
                       {"singularity", c.singularity.size()},
                       {"exclusion", c.exclusion.size()}}}});
    if (v.description) views.back()["description"] = *v.description;
  }
  return {{"views", views}, {"metadata", norm.metadata}};
}

json advisor_request_json(const AdvisorRequest& r) {
  json findings = json::array();
  for (const Finding& f : r.findings) findings.push_back(finding_json(f));
  json aggregates = json::array();
  for (const AggregationCell& c : r.aggregates) aggregates.push_back(cell_json(c));
  return {{"version", r.version}, {"norm_summary", r.norm_summary}, {"findings", findings}, {"aggregates", aggregates}};
}

json advisor_response_json(const AdvisorResponse& r) {
  json filters = json::array();
  for (const FilterSpec& f : r.follow_up_filters) filters.push_back(filter_json(f));
  return {{"narrative", r.narrative}, {"follow_up_filters", filters}, {"deterministic", r.deterministic}};
}

AdvisorResponse EchoAdvisor::advise(const AdvisorRequest& request) {
  AdvisorResponse out;
  for (const Finding& f : request.findings) {
    out.narrative += std::to_string(f.rank) + ". " + f.statement + "\n";
    FilterSpec filter;
    filter.equals.emplace_back(f.feature, f.value);
    out.follow_up_filters.push_back(std::move(filter));
  }
  if (request.findings.empty()) out.narrative = "No low-performing feature values found.\n";
  out.deterministic = true;
  return out;
}

HttpAdvisor::HttpAdvisor(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

AdvisorResponse HttpAdvisor::advise(const AdvisorRequest& request) {
  const std::string scheme = "http://";
  if (url_.rfind(scheme, 0) != 0) {
    throw Error(ErrorCode::AdvisorUnreachable, "advisor URL must start with http://: " + url_);
  }
  const auto slash = url_.find('/', scheme.size());
  const std::string host_port = url_.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : url_.substr(slash);

  httplib::Client client(host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const auto res = client.Post(path, advisor_request_json(request).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::AdvisorUnreachable,
                "advisor at " + url_ + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::AdvisorUnreachable, "advisor at " + url_ + " answered HTTP " + std::to_string(res->status));
  }
  AdvisorResponse out;
  out.deterministic = false;
  try {
    const json body = json::parse(res->body);
    if (!body.is_object() || !body.contains("narrative") || !body["narrative"].is_string()) {
      throw Error(ErrorCode::AdvisorMalformedResponse, "advisor reply lacks a narrative string");
    }
    out.narrative = body["narrative"].get<std::string>();
    if (body.contains("follow_up_filters")) {
      if (!body["follow_up_filters"].is_array()) {
        throw Error(ErrorCode::AdvisorMalformedResponse, "follow_up_filters must be an array");
      }
      for (const json& f : body["follow_up_filters"]) out.follow_up_filters.push_back(parse_filter(f));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::AdvisorMalformedResponse, std::string("advisor reply is not JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AdvisorMalformedResponse) throw;
    throw Error(ErrorCode::AdvisorMalformedResponse, std::string("advisor reply: ") + e.what());
  }
  return out;
}

AdvisorResponse advise(const AdvisorRequest& request, Advisor& advisor) { return advisor.advise(request); }

}  // namespace wise
