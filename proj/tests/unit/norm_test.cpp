#include <fstream>
#include <regex>
#include <set>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "wise/errors.hpp"
#include "wise/log_io.hpp"
#include "wise/norm.hpp"

namespace {

using nlohmann::json;
using wise::ErrorCode;
using wise::LayerId;

json minimal_view(const std::string& name) {
  return {{"name", name},
          {"weights", {{"foundational", 0.2}, {"sequential", 0.2}, {"equilibrium", 0.2}, {"singularity", 0.2}, {"exclusion", 0.2}}},
          {"constraints", {{"mandatory", {"A"}}}}};
}

ErrorCode load_error(const json& doc) {
  try {
    wise::load_norm(doc);
  } catch (const wise::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "document loaded: " << doc.dump();
  return ErrorCode::Io;
}

TEST(LoadNorm, ProcurementFixture) {
  const auto norm = wise::load_norm_file(wise::testing::fixture("procurement_norm.json"));
  ASSERT_EQ(norm.views.size(), 1u);
  const wise::View& v = norm.views[0];
  EXPECT_EQ(v.name, "Process Standardization");
  EXPECT_EQ(v.constraints.mandatory, (std::vector<std::string>{"Create Purchase Order Item", "Record Goods Receipt"}));
  EXPECT_EQ(v.constraints.exclusion, (std::vector<std::string>{"Change Price", "Change Vendor"}));
  for (LayerId l : wise::kLayers) EXPECT_DOUBLE_EQ(v.weight(l), 0.2);
  EXPECT_EQ(norm.metadata.at("domain"), "purchase-to-pay");
}

TEST(LoadNorm, WeightOutOfRange) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["weights"]["sequential"] = 1.3;
  EXPECT_EQ(load_error(doc), ErrorCode::WeightOutOfRange);
  doc["views"][0]["weights"]["sequential"] = -0.1;
  EXPECT_EQ(load_error(doc), ErrorCode::WeightOutOfRange);
}

TEST(LoadNorm, DuplicateViewName) {
  EXPECT_EQ(load_error({{"views", {minimal_view("same"), minimal_view("same")}}}), ErrorCode::DuplicateViewName);
}

TEST(LoadNorm, EquilibriumGroupsNeedTwoDistinctActivities) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"]["equilibrium"] = json::array({json::array({"A"})});
  EXPECT_EQ(load_error(doc), ErrorCode::EmptyEquilibriumGroup);
  doc["views"][0]["constraints"]["equilibrium"] = json::array({json::array({"A", "A"})});
  EXPECT_EQ(load_error(doc), ErrorCode::EmptyEquilibriumGroup);
}

TEST(LoadNorm, SchemaViolations) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"]["mandatory"] = {"A", "A"};
  EXPECT_EQ(load_error(doc), ErrorCode::SchemaViolation);

  doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"]["sequential"] = json::array({json::array({"A", "B"}), json::array({"A", "B"})});
  EXPECT_EQ(load_error(doc), ErrorCode::SchemaViolation);

  doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["weights"].erase("exclusion");
  EXPECT_EQ(load_error(doc), ErrorCode::SchemaViolation);

  doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["colour"] = "blue";
  EXPECT_EQ(load_error(doc), ErrorCode::SchemaViolation);

  EXPECT_EQ(load_error({{"views", json::array()}}), ErrorCode::SchemaViolation);
  EXPECT_EQ(load_error(json::array()), ErrorCode::SchemaViolation);
}

TEST(LoadNorm, SelfLoopPairsAreAllowed) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"]["sequential"] = json::array({json::array({"A", "A"})});
  EXPECT_NO_THROW(wise::load_norm(doc));
}

TEST(LoadNorm, ErrorMessageCarriesJsonPointer) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["weights"]["singularity"] = "high";
  try {
    wise::load_norm(doc);
    FAIL();
  } catch (const wise::Error& e) {
    EXPECT_NE(std::string(e.what()).find("/views/0/weights/singularity"), std::string::npos) << e.what();
  }
}

TEST(LoadNorm, ElementWeights) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"]["sequential"] = json::array({json::array({"A", "B"})});
  doc["views"][0]["constraints"]["equilibrium"] = json::array({json::array({"G", "I"})});
  doc["views"][0]["element_weights"] = {{"sequential", {{"A -> B", 0.5}}}, {"equilibrium", {{"G == I", 0.25}}}};
  const auto norm = wise::load_norm(doc);
  const wise::View& v = norm.views[0];
  EXPECT_DOUBLE_EQ(v.element_weight(LayerId::Sequential, "A -> B"), 0.5);
  EXPECT_DOUBLE_EQ(v.element_weight(LayerId::Equilibrium, "G == I"), 0.25);
  EXPECT_DOUBLE_EQ(v.element_weight(LayerId::Foundational, "A"), 1.0);

  doc["views"][0]["element_weights"] = {{"sequential", {{"B -> A", 0.5}}}};
  EXPECT_EQ(load_error(doc), ErrorCode::SchemaViolation);
  doc["views"][0]["element_weights"] = {{"sequential", {{"A -> B", 2.0}}}};
  EXPECT_EQ(load_error(doc), ErrorCode::WeightOutOfRange);
}

TEST(SerializeNorm, RoundTrips) {
  const auto norm = wise::load_norm_file(wise::testing::fixture("two_view_norm.json"));
  EXPECT_EQ(wise::load_norm(wise::serialize_norm(norm)), norm);
  const auto procurement = wise::load_norm_file(wise::testing::fixture("procurement_norm.json"));
  EXPECT_EQ(wise::load_norm(wise::serialize_norm(procurement)), procurement);
}

TEST(ViewDigest, StableAndSensitiveToWeights) {
  const auto norm = wise::load_norm_file(wise::testing::fixture("two_view_norm.json"));
  EXPECT_EQ(wise::view_digest(norm.views[0]), wise::view_digest(norm.views[0]));
  EXPECT_NE(wise::view_digest(norm.views[0]), wise::view_digest(norm.views[1]));
  EXPECT_EQ(wise::view_digest(norm.views[0]).size(), 16u);
}

wise::EventLog ab_log() {
  std::vector<wise::Trace> traces{wise::Trace::from_activities("1", {"A", "B"})};
  return wise::EventLog::from_traces(std::move(traces));
}

TEST(ValidateAgainstLog, NamesAbsentActivityAndLayer) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"] = {{"mandatory", {"A"}}, {"exclusion", {"Z"}}};
  const auto warnings = wise::validate_against_log(wise::load_norm(doc), ab_log());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].activity, "Z");
  EXPECT_EQ(warnings[0].layer, LayerId::Exclusion);
  EXPECT_NE(warnings[0].message.find("Z"), std::string::npos);
}

TEST(ValidateAgainstLog, CoveredNormHasNoWarnings) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"] = {{"mandatory", {"A"}}, {"sequential", json::array({json::array({"A", "B"})})}};
  EXPECT_TRUE(wise::validate_against_log(wise::load_norm(doc), ab_log()).empty());
}

TEST(ValidateAgainstLog, AbsentEquilibriumReference) {
  json doc = {{"views", {minimal_view("v")}}};
  doc["views"][0]["constraints"] = {{"equilibrium", json::array({json::array({"Q", "A"})})}};
  const auto warnings = wise::validate_against_log(wise::load_norm(doc), ab_log());
  ASSERT_FALSE(warnings.empty());
  EXPECT_TRUE(std::any_of(warnings.begin(), warnings.end(), [](const wise::NormWarning& w) {
    return w.kind == wise::NormWarning::Kind::AbsentEquilibriumReference && w.activity == "Q";
  }));
}

// Set difference between the norm's activities and the activities found in
// the raw XML text, computed without the parser or the norm loader.
TEST(ValidateAgainstLog, Sample50MatchesSetDifferenceOracle) {
  const std::string xml = wise::testing::read_file(wise::testing::fixture("sample_50.xes"));
  std::set<std::string> in_log;
  const std::regex event_name(R"re(<event>\s*<string key="concept:name" value="([^"]*)"/>)re");
  for (auto it = std::sregex_iterator(xml.begin(), xml.end(), event_name); it != std::sregex_iterator(); ++it) {
    in_log.insert((*it)[1]);
  }
  std::ifstream norm_in(wise::testing::fixture("procurement_norm.json"));
  const json raw = json::parse(norm_in);
  std::set<std::string> in_norm;
  for (const json& view : raw["views"]) {
    for (const auto& [layer, items] : view["constraints"].items()) {
      for (const json& item : items) {
        if (item.is_string()) in_norm.insert(item.get<std::string>());
        else for (const json& a : item) in_norm.insert(a.get<std::string>());
      }
    }
  }
  std::set<std::string> expected;
  std::set_difference(in_norm.begin(), in_norm.end(), in_log.begin(), in_log.end(),
                      std::inserter(expected, expected.end()));

  std::ifstream log_in(wise::testing::fixture("sample_50.xes"));
  const auto warnings = wise::validate_against_log(wise::load_norm_file(wise::testing::fixture("procurement_norm.json")),
                                                   wise::parse_xes(log_in));
  std::set<std::string> reported;
  for (const auto& w : warnings) reported.insert(w.activity);
  EXPECT_EQ(reported, expected);
  EXPECT_FALSE(expected.empty());
}

}  // namespace
