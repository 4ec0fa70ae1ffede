#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wise/attribute.hpp"

namespace wise {

using ActivityCode = std::int32_t;
inline constexpr ActivityCode kAbsentActivity = -1;

/// Interned activity names. Immutable once constructed, shared between the
/// traces of one log.
class Codebook {
 public:
  Codebook() = default;
  explicit Codebook(std::vector<std::string> names);

  ActivityCode lookup(std::string_view name) const;
  const std::string& name(ActivityCode code) const { return names_.at(static_cast<std::size_t>(code)); }
  std::size_t size() const { return names_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, ActivityCode, Hash, std::equal_to<>> index_;
};

struct Event {
  std::int64_t event_id = 0;
  std::string activity;
  std::string case_id;
  std::optional<Timestamp> timestamp;
  AttributeMap attributes;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Strict partial order over the events of one trace, stored as its
/// transitive closure. The common case (a chain in event index order) is
/// kept implicit.
class PrecedenceOrder {
 public:
  PrecedenceOrder() = default;

  static PrecedenceOrder total(std::size_t n);
  /// Throws Error(InvalidArgument) on out-of-range indices, reflexive pairs or cycles.
  static PrecedenceOrder from_pairs(std::size_t n,
                                    std::span<const std::pair<std::size_t, std::size_t>> pairs);

  bool is_total() const { return total_; }
  std::size_t size() const { return n_; }
  bool precedes(std::size_t i, std::size_t j) const {
    return total_ ? i < j : closure_[i * n_ + j] != 0;
  }

  friend bool operator==(const PrecedenceOrder& a, const PrecedenceOrder& b);

 private:
  std::size_t n_ = 0;
  bool total_ = true;
  std::vector<std::uint8_t> closure_;
};

class Trace {
 public:
  Trace() = default;
  /// Events are totally ordered in the given sequence.
  Trace(std::string case_id, std::vector<Event> events, AttributeMap case_attributes = {});
  Trace(std::string case_id, std::vector<Event> events, PrecedenceOrder order,
        AttributeMap case_attributes = {});

  /// Convenience for programmatic traces: one event per activity, ids 0..n-1.
  static Trace from_activities(std::string case_id, const std::vector<std::string>& activities);

  const std::string& case_id() const { return case_id_; }
  const std::vector<Event>& events() const { return events_; }
  const PrecedenceOrder& order() const { return order_; }
  const AttributeMap& case_attributes() const { return case_attributes_; }
  std::size_t size() const { return events_.size(); }

  std::span<const ActivityCode> codes() const { return codes_; }
  const std::shared_ptr<const Codebook>& codebook() const { return codebook_; }

  /// Same trace with activity codes re-expressed against `codebook`, which
  /// must contain every activity of this trace.
  Trace rebind(std::shared_ptr<const Codebook> codebook) const;

  friend bool operator==(const Trace& a, const Trace& b);

 private:
  void encode(std::shared_ptr<const Codebook> codebook);

  std::string case_id_;
  std::vector<Event> events_;
  PrecedenceOrder order_;
  AttributeMap case_attributes_;
  std::shared_ptr<const Codebook> codebook_;
  std::vector<ActivityCode> codes_;
};

/// True iff some event with activity `a1` strictly precedes some event with `a2`.
bool eventually_precedes(const Trace& trace, std::string_view a1, std::string_view a2);

std::size_t count_activity(const Trace& trace, std::string_view activity);

enum class FeatureLevel { Event, Case };
enum class FeatureKind { Categorical, Numeric, Timestamp };

std::string_view to_string(FeatureLevel level);
std::string_view to_string(FeatureKind kind);

struct FeatureInfo {
  std::string name;
  FeatureLevel level = FeatureLevel::Event;
  FeatureKind kind = FeatureKind::Categorical;
  std::size_t distinct_value_count = 0;

  friend bool operator==(const FeatureInfo&, const FeatureInfo&) = default;
};

class EventLog {
 public:
  EventLog() = default;

  /// Throws Error(InvalidArgument) on duplicate case ids.
  static EventLog from_traces(std::vector<Trace> traces);

  const std::vector<Trace>& traces() const { return traces_; }
  const std::set<std::string, std::less<>>& activity_alphabet() const { return alphabet_; }
  /// Sorted by feature name.
  const std::vector<FeatureInfo>& feature_catalog() const { return catalog_; }
  const FeatureInfo* find_feature(std::string_view name) const;
  std::optional<std::size_t> find_trace(std::string_view case_id) const;
  std::size_t event_count() const;
  const std::shared_ptr<const Codebook>& codebook() const { return codebook_; }

  /// Traces at `indices` (in the given order) as a new log sharing this
  /// codebook. The feature catalog is inherited so drill-downs type features
  /// the same way as the full log.
  EventLog subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const EventLog& a, const EventLog& b) { return a.traces_ == b.traces_; }

 private:
  void index();

  std::vector<Trace> traces_;
  std::set<std::string, std::less<>> alphabet_;
  std::vector<FeatureInfo> catalog_;
  std::unordered_map<std::string, std::size_t> case_index_;
  std::shared_ptr<const Codebook> codebook_ = std::make_shared<const Codebook>();
};

// Ingestion helpers shared by the readers.

/// Stable-sorts events (given in source order) by timestamp. If any event
/// lacks a timestamp the source order is kept for the whole case.
void order_for_ingest(std::vector<Event>& events);

/// Case attributes: `trace_level` plus every event attribute that has exactly
/// one distinct non-missing value across `events`. Trace-level entries win.
AttributeMap hoist_case_attributes(const std::vector<Event>& events, AttributeMap trace_level);

}  // namespace wise
