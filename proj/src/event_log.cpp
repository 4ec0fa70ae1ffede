#include "wise/event_log.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "wise/errors.hpp"
#include "wise/simd/kernels.hpp"

namespace wise {

Codebook::Codebook(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const auto [it, inserted] = index_.emplace(names_[i], static_cast<ActivityCode>(i));
    if (!inserted) throw Error(ErrorCode::InvalidArgument, "duplicate activity in codebook: " + names_[i]);
  }
}

ActivityCode Codebook::lookup(std::string_view name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? kAbsentActivity : it->second;
}

// ---------------------------------------------------------------------------

PrecedenceOrder PrecedenceOrder::total(std::size_t n) {
  PrecedenceOrder order;
  order.n_ = n;
  return order;
}

PrecedenceOrder PrecedenceOrder::from_pairs(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  PrecedenceOrder order;
  order.n_ = n;
  order.total_ = false;
  order.closure_.assign(n * n, 0);
  for (const auto& [a, b] : pairs) {
    if (a >= n || b >= n) throw Error(ErrorCode::InvalidArgument, "precedence pair out of range");
    if (a == b) throw Error(ErrorCode::InvalidArgument, "precedence pair is reflexive");
    order.closure_[a * n + b] = 1;
  }
  // Warshall closure.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!order.closure_[i * n + k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (order.closure_[k * n + j]) order.closure_[i * n + j] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (order.closure_[i * n + i]) throw Error(ErrorCode::InvalidArgument, "precedence relation has a cycle");
  }
  return order;
}

bool operator==(const PrecedenceOrder& a, const PrecedenceOrder& b) {
  if (a.n_ != b.n_) return false;
  if (a.total_ && b.total_) return true;
  for (std::size_t i = 0; i < a.n_; ++i) {
    for (std::size_t j = 0; j < a.n_; ++j) {
      if (a.precedes(i, j) != b.precedes(i, j)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<const Codebook> codebook_for(const std::vector<Event>& events) {
  std::vector<std::string> names;
  std::unordered_set<std::string_view> seen;
  for (const Event& e : events) {
    if (seen.insert(e.activity).second) names.push_back(e.activity);
  }
  return std::make_shared<const Codebook>(std::move(names));
}

}  // namespace

Trace::Trace(std::string case_id, std::vector<Event> events, AttributeMap case_attributes)
    : Trace(std::move(case_id), std::move(events), PrecedenceOrder::total(0),
            std::move(case_attributes)) {
  order_ = PrecedenceOrder::total(events_.size());
}

Trace::Trace(std::string case_id, std::vector<Event> events, PrecedenceOrder order,
             AttributeMap case_attributes)
    : case_id_(std::move(case_id)),
      events_(std::move(events)),
      order_(std::move(order)),
      case_attributes_(std::move(case_attributes)) {
  if (case_id_.empty()) throw Error(ErrorCode::EmptyCaseId, "trace has an empty case id");
  if (!order_.is_total() && order_.size() != events_.size()) {
    throw Error(ErrorCode::InvalidArgument, "precedence order size does not match event count in case " + case_id_);
  }
  if (order_.is_total()) order_ = PrecedenceOrder::total(events_.size());
  for (const Event& e : events_) {
    if (e.case_id != case_id_) {
      throw Error(ErrorCode::InvalidArgument,
                  "event " + std::to_string(e.event_id) + " has case id '" + e.case_id +
                      "' but belongs to trace '" + case_id_ + "'");
    }
    if (e.activity.empty()) {
      throw Error(ErrorCode::MissingActivity,
                  "event " + std::to_string(e.event_id) + " in case " + case_id_ + " has no activity");
    }
  }
  encode(codebook_for(events_));
}

Trace Trace::from_activities(std::string case_id, const std::vector<std::string>& activities) {
  std::vector<Event> events;
  events.reserve(activities.size());
  for (std::size_t i = 0; i < activities.size(); ++i) {
    Event e;
    e.event_id = static_cast<std::int64_t>(i);
    e.activity = activities[i];
    e.case_id = case_id;
    events.push_back(std::move(e));
  }
  return Trace(std::move(case_id), std::move(events));
}

void Trace::encode(std::shared_ptr<const Codebook> codebook) {
  codes_.resize(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const ActivityCode code = codebook->lookup(events_[i].activity);
    if (code == kAbsentActivity) {
      throw Error(ErrorCode::InvalidArgument, "codebook lacks activity " + events_[i].activity);
    }
    codes_[i] = code;
  }
  codebook_ = std::move(codebook);
}

Trace Trace::rebind(std::shared_ptr<const Codebook> codebook) const {
  Trace copy = *this;
  copy.encode(std::move(codebook));
  return copy;
}

bool operator==(const Trace& a, const Trace& b) {
  return a.case_id_ == b.case_id_ && a.events_ == b.events_ && a.order_ == b.order_ &&
         a.case_attributes_ == b.case_attributes_;
}

bool eventually_precedes(const Trace& trace, std::string_view a1, std::string_view a2) {
  const ActivityCode c1 = trace.codebook()->lookup(a1);
  const ActivityCode c2 = trace.codebook()->lookup(a2);
  if (c1 == kAbsentActivity || c2 == kAbsentActivity) return false;
  const auto codes = trace.codes();
  if (trace.order().is_total()) {
    const auto first = simd::find_first(codes, c1);
    return first >= 0 && simd::find_last(codes, c2) > first;
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] != c1) continue;
    for (std::size_t j = 0; j < codes.size(); ++j) {
      if (codes[j] == c2 && trace.order().precedes(i, j)) return true;
    }
  }
  return false;
}

std::size_t count_activity(const Trace& trace, std::string_view activity) {
  const ActivityCode code = trace.codebook()->lookup(activity);
  return code == kAbsentActivity ? 0 : simd::count_equal(trace.codes(), code);
}

std::string_view to_string(FeatureLevel level) {
  return level == FeatureLevel::Case ? "case" : "event";
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Categorical: return "categorical";
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Timestamp: return "timestamp";
  }
  return "categorical";
}

// ---------------------------------------------------------------------------

EventLog EventLog::from_traces(std::vector<Trace> traces) {
  EventLog log;
  std::vector<std::string> names;
  std::unordered_set<std::string_view> seen;
  bool shared = !traces.empty();
  for (const Trace& t : traces) {
    if (t.codebook() != traces.front().codebook()) shared = false;
    for (const Event& e : t.events()) {
      if (seen.insert(e.activity).second) names.push_back(e.activity);
    }
  }
  if (shared && traces.front().codebook()->size() == names.size()) {
    log.codebook_ = traces.front().codebook();
  } else {
    log.codebook_ = std::make_shared<const Codebook>(std::move(names));
    for (Trace& t : traces) t = t.rebind(log.codebook_);
  }
  log.traces_ = std::move(traces);
  log.index();
  return log;
}

EventLog EventLog::subset(std::span<const std::size_t> indices) const {
  EventLog out;
  out.codebook_ = codebook_;
  out.traces_.reserve(indices.size());
  for (std::size_t i : indices) out.traces_.push_back(traces_.at(i));
  out.index();
  out.catalog_ = catalog_;
  return out;
}

namespace {

struct FeatureAccumulator {
  bool seen_at_event_only = false;
  bool all_numeric = true;
  bool all_timestamp = true;
  bool any_value = false;
  std::unordered_set<std::string> case_values;
  std::unordered_set<std::string> event_values;

  void observe(const AttributeValue& v, bool case_scope) {
    if (v.is_missing()) return;
    any_value = true;
    all_numeric = all_numeric && v.is_number();
    all_timestamp = all_timestamp && v.is_timestamp();
    (case_scope ? case_values : event_values).insert(v.render());
  }
};

}  // namespace

void EventLog::index() {
  alphabet_.clear();
  case_index_.clear();
  case_index_.reserve(traces_.size());
  std::map<std::string, FeatureAccumulator, std::less<>> features;
  for (std::size_t ti = 0; ti < traces_.size(); ++ti) {
    const Trace& t = traces_[ti];
    if (!case_index_.emplace(t.case_id(), ti).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate case id " + t.case_id());
    }
    for (const auto& [name, value] : t.case_attributes()) features[name].observe(value, true);
    for (const Event& e : t.events()) {
      alphabet_.insert(e.activity);
      for (const auto& [name, value] : e.attributes) {
        FeatureAccumulator& acc = features[name];
        if (!t.case_attributes().contains(name)) {
          acc.seen_at_event_only = true;
          acc.observe(value, false);
        } else if (acc.seen_at_event_only) {
          acc.observe(value, false);
        }
      }
    }
  }
  catalog_.clear();
  catalog_.reserve(features.size());
  for (auto& [name, acc] : features) {
    FeatureInfo info;
    info.name = name;
    info.level = acc.seen_at_event_only ? FeatureLevel::Event : FeatureLevel::Case;
    if (acc.any_value && acc.all_numeric) {
      info.kind = FeatureKind::Numeric;
    } else if (acc.any_value && acc.all_timestamp) {
      info.kind = FeatureKind::Timestamp;
    }
    if (info.level == FeatureLevel::Case) {
      info.distinct_value_count = acc.case_values.size();
    } else {
      acc.event_values.insert(acc.case_values.begin(), acc.case_values.end());
      info.distinct_value_count = acc.event_values.size();
    }
    catalog_.push_back(std::move(info));
  }
}

const FeatureInfo* EventLog::find_feature(std::string_view name) const {
  const auto it = std::lower_bound(catalog_.begin(), catalog_.end(), name,
                                   [](const FeatureInfo& f, std::string_view n) { return f.name < n; });
  return it != catalog_.end() && it->name == name ? &*it : nullptr;
}

std::optional<std::size_t> EventLog::find_trace(std::string_view case_id) const {
  const auto it = case_index_.find(std::string(case_id));
  if (it == case_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EventLog::event_count() const {
  std::size_t n = 0;
  for (const Trace& t : traces_) n += t.size();
  return n;
}

// ---------------------------------------------------------------------------

void order_for_ingest(std::vector<Event>& events) {
  const bool all_timed = std::all_of(events.begin(), events.end(),
                                     [](const Event& e) { return e.timestamp.has_value(); });
  if (!all_timed) return;
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return *a.timestamp < *b.timestamp; });
}

AttributeMap hoist_case_attributes(const std::vector<Event>& events, AttributeMap trace_level) {
  std::map<std::string_view, const AttributeValue*> single;
  std::unordered_set<std::string_view> conflicting;
  for (const Event& e : events) {
    for (const auto& [name, value] : e.attributes) {
      if (value.is_missing() || conflicting.contains(name)) continue;
      const auto [it, inserted] = single.emplace(name, &value);
      if (!inserted && !(*it->second == value)) {
        conflicting.insert(name);
        single.erase(it);
      }
    }
  }
  for (const auto& [name, value] : single) trace_level.try_emplace(std::string(name), *value);
  return trace_level;
}

}  // namespace wise
