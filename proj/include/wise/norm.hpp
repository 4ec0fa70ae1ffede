#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wise/event_log.hpp"

namespace wise {

/// The five constraint families of a process norm, in canonical order 1..5.
enum class LayerId { Foundational = 1, Sequential = 2, Equilibrium = 3, Singularity = 4, Exclusion = 5 };

inline constexpr std::size_t kLayerCount = 5;
inline constexpr std::array<LayerId, kLayerCount> kLayers{
    LayerId::Foundational, LayerId::Sequential, LayerId::Equilibrium, LayerId::Singularity,
    LayerId::Exclusion};

constexpr std::size_t layer_index(LayerId layer) { return static_cast<std::size_t>(layer) - 1; }

/// Lower-case schema key, e.g. "foundational".
std::string_view layer_key(LayerId layer);
/// Display name, e.g. "Foundational".
std::string_view layer_title(LayerId layer);
std::optional<LayerId> layer_from_key(std::string_view key);

struct ActivityPair {
  std::string first;
  std::string second;

  friend bool operator==(const ActivityPair&, const ActivityPair&) = default;
};

/// Element keys used by per-element weights and violation descriptors.
std::string sequential_key(const ActivityPair& pair);                          // "a1 -> a2"
std::string equilibrium_key(std::string_view reference, std::string_view member);  // "ref == member"

/// Sets are kept in schema order; scoring accumulates in that order.
struct ConstraintSet {
  std::vector<std::string> mandatory;
  std::vector<ActivityPair> sequential;
  /// Each group lists its reference activity first.
  std::vector<std::vector<std::string>> equilibrium;
  std::vector<std::string> singularity;
  std::vector<std::string> exclusion;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

using ElementWeightMap = std::map<std::string, double, std::less<>>;

struct View {
  std::string name;
  std::optional<std::string> description;
  ConstraintSet constraints;
  std::array<double, kLayerCount> weights{};
  /// Optional per-element weights; absent elements weigh 1.
  std::array<ElementWeightMap, kLayerCount> element_weights;

  double weight(LayerId layer) const { return weights[layer_index(layer)]; }
  double element_weight(LayerId layer, std::string_view key) const;

  friend bool operator==(const View&, const View&) = default;
};

struct ProcessNorm {
  std::vector<View> views;
  std::map<std::string, std::string> metadata;

  const View* find_view(std::string_view name) const;

  friend bool operator==(const ProcessNorm&, const ProcessNorm&) = default;
};

/// Throws Error(SchemaViolation | WeightOutOfRange | EmptyEquilibriumGroup |
/// DuplicateViewName); messages carry a JSON pointer to the offending value.
ProcessNorm load_norm(const nlohmann::json& document);
ProcessNorm load_norm(std::istream& in);
ProcessNorm load_norm_file(const std::filesystem::path& path);

nlohmann::json serialize_norm(const ProcessNorm& norm);
nlohmann::json serialize_view(const View& view);

/// FNV-1a 64 over the canonical JSON of the view, as 16 hex digits.
std::string view_digest(const View& view);

struct NormWarning {
  enum class Kind { AbsentActivity, AbsentEquilibriumReference };

  Kind kind = Kind::AbsentActivity;
  std::string view;
  LayerId layer = LayerId::Foundational;
  std::string activity;
  std::string message;

  friend bool operator==(const NormWarning&, const NormWarning&) = default;
};

/// Constraint activities missing from the log alphabet, sorted by layer,
/// then activity, then view order. Never throws.
std::vector<NormWarning> validate_against_log(const ProcessNorm& norm, const EventLog& log);

}  // namespace wise
