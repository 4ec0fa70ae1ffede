#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wise/event_log.hpp"
#include "wise/norm.hpp"

namespace wise::synth {

struct FeatureSpec {
  std::string name;
  std::vector<std::string> values;
  std::vector<double> weights;  // positive, one per value
};

enum class ViolationKind { DropMandatory, SwapPair, Unbalance, Duplicate, InsertExcluded };

/// `activities` holds one activity (DropMandatory, Duplicate, InsertExcluded),
/// the pair (SwapPair) or an equilibrium group whose second member receives
/// the extra events (Unbalance). `times` is the repeat count / delta.
struct Violation {
  ViolationKind kind = ViolationKind::InsertExcluded;
  std::vector<std::string> activities;
  int times = 1;
};

struct InjectionRule {
  /// Conjunction of feature == value; empty matches every case.
  std::map<std::string, std::string> target;
  Violation violation;
  double probability = 1.0;
};

struct GeneratorSpec {
  std::uint64_t seed = 0;
  std::size_t n_cases = 0;
  std::vector<std::string> base_sequence;
  std::vector<FeatureSpec> features;
  std::vector<InjectionRule> injections;
  Timestamp start = Timestamp{std::chrono::milliseconds{1546300800000}};  // 2019-01-01Z
};

struct CaseTruth {
  std::string case_id;
  std::vector<std::string> applied;
  std::array<double, kLayerCount> expected_f{};
  std::size_t n_events = 0;
};

struct GroundTruth {
  std::vector<CaseTruth> cases;
  std::size_t n_events = 0;
  std::map<std::string, std::size_t> activity_counts;
};

struct Generated {
  EventLog log;
  GroundTruth truth;
};

/// Deterministic for a fixed spec. Case i draws from its own stream, seeded
/// from (seed, i), so the output does not depend on generation order.
/// Throws Error(NonConformingTemplate) when the base sequence violates `view`,
/// Error(InvalidArgument) on malformed specs.
Generated generate(const GeneratorSpec& spec, const View& view);

/// Straight-from-the-definitions rescoring used as the test oracle. Shares
/// no code with the scoring module.
struct OracleScore {
  std::array<double, kLayerCount> f{};
  std::array<double, kLayerCount> weighted{};
  std::array<double, kLayerCount> layer_scores{};
  double penalty = 0;
  double score = 1;
  double normalized = 1;
};

OracleScore oracle_score(const View& view, const Trace& trace);

/// 64-bit stream for case `index`: mt19937_64 seeded with
/// splitmix64(seed ^ splitmix64(index)).
std::uint64_t case_stream_seed(std::uint64_t seed, std::uint64_t index);

GeneratorSpec parse_generator_spec(const nlohmann::json& j);
nlohmann::json generator_spec_json(const GeneratorSpec& spec);
nlohmann::json ground_truth_json(const GroundTruth& truth);

}  // namespace wise::synth
