#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_support.hpp"
#include "wise/errors.hpp"
#include "wise/synthlog.hpp"

namespace {

using namespace wise::synth;
using wise::LayerId;

const std::vector<std::string> kBase{"Create Purchase Order Item", "Record Goods Receipt", "Record Invoice Receipt",
                                     "Clear Invoice"};

wise::View procurement() { return wise::load_norm_file(wise::testing::fixture("procurement_norm.json")).views[0]; }

GeneratorSpec base_spec(std::size_t n) {
  GeneratorSpec s;
  s.seed = 17;
  s.n_cases = n;
  s.base_sequence = kBase;
  s.features = {{"Category", {"Logistic", "Service"}, {1, 1}}};
  return s;
}

std::vector<std::string> acts(const wise::Trace& t) {
  std::vector<std::string> out;
  for (const auto& e : t.events()) out.push_back(e.activity);
  return out;
}

TEST(Generate, ZeroCases) {
  const auto g = generate(base_spec(0), procurement());
  EXPECT_TRUE(g.log.traces().empty());
  EXPECT_TRUE(g.truth.cases.empty());
}

TEST(Generate, NoInjectionsMeansConforming) {
  const auto g = generate(base_spec(100), procurement());
  ASSERT_EQ(g.truth.cases.size(), 100u);
  for (const auto& c : g.truth.cases) {
    EXPECT_TRUE(c.applied.empty());
    for (double f : c.expected_f) EXPECT_EQ(f, 0);
  }
}

TEST(Generate, InsertExcludedTwiceEverywhere) {
  GeneratorSpec s = base_spec(50);
  s.injections.push_back({{}, {ViolationKind::InsertExcluded, {"Change Price"}, 2}, 1.0});
  const auto g = generate(s, procurement());
  for (std::size_t i = 0; i < g.truth.cases.size(); ++i) {
    EXPECT_EQ(g.truth.cases[i].expected_f[wise::layer_index(LayerId::Exclusion)], 2);
    EXPECT_EQ(wise::count_activity(g.log.traces()[i], "Change Price"), 2u);
  }
}

TEST(Generate, NonConformingTemplateIsRejected) {
  GeneratorSpec s = base_spec(5);
  s.base_sequence = {"Record Goods Receipt", "Create Purchase Order Item"};
  try {
    generate(s, procurement());
    FAIL();
  } catch (const wise::Error& e) {
    EXPECT_EQ(e.code(), wise::ErrorCode::NonConformingTemplate);
  }
}

TEST(Generate, IsDeterministicAndPrefixStable) {
  GeneratorSpec s = base_spec(40);
  s.injections.push_back({{{"Category", "Logistic"}}, {ViolationKind::Duplicate, {"Record Goods Receipt"}, 1}, 0.5});
  const auto a = generate(s, procurement());
  const auto b = generate(s, procurement());
  EXPECT_EQ(a.log, b.log);
  s.n_cases = 80;
  const auto longer = generate(s, procurement());
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(acts(a.log.traces()[i]), acts(longer.log.traces()[i]));
    EXPECT_EQ(a.log.traces()[i].case_attributes(), longer.log.traces()[i].case_attributes());
  }
  s.seed = 18;
  EXPECT_NE(generate(s, procurement()).log, longer.log);
}

TEST(Generate, TargetedInjectionOnlyHitsMatchingCases) {
  GeneratorSpec s = base_spec(200);
  s.injections.push_back({{{"Category", "Logistic"}}, {ViolationKind::InsertExcluded, {"Change Vendor"}, 1}, 1.0});
  const auto g = generate(s, procurement());
  for (const auto& t : g.log.traces()) {
    const bool logistic = t.case_attributes().at("Category") == wise::AttributeValue("Logistic");
    EXPECT_EQ(wise::count_activity(t, "Change Vendor"), logistic ? 1u : 0u);
  }
}

TEST(Generate, EachViolationKindMovesItsLayer) {
  struct Case {
    Violation v;
    LayerId layer;
    double f;
  };
  const std::vector<Case> cases{
      {{ViolationKind::DropMandatory, {"Record Goods Receipt"}, 1}, LayerId::Foundational, 1},
      {{ViolationKind::SwapPair, {"Record Invoice Receipt", "Clear Invoice"}, 1}, LayerId::Sequential, 1},
      {{ViolationKind::Unbalance, {"Record Goods Receipt", "Record Invoice Receipt"}, 2}, LayerId::Equilibrium, 2},
      {{ViolationKind::Duplicate, {"Clear Invoice"}, 2}, LayerId::Singularity, 2},
      {{ViolationKind::InsertExcluded, {"Change Price"}, 3}, LayerId::Exclusion, 3},
  };
  for (const Case& c : cases) {
    GeneratorSpec s = base_spec(10);
    s.injections.push_back({{}, c.v, 1.0});
    const auto g = generate(s, procurement());
    for (const auto& truth : g.truth.cases) {
      ASSERT_EQ(truth.applied.size(), 1u);
      EXPECT_EQ(truth.expected_f[wise::layer_index(c.layer)], c.f) << truth.applied[0];
    }
  }
}

TEST(Generate, BookkeepingCounts) {
  GeneratorSpec s = base_spec(30);
  s.injections.push_back({{}, {ViolationKind::InsertExcluded, {"Change Price"}, 1}, 0.5});
  const auto g = generate(s, procurement());
  EXPECT_EQ(g.truth.n_events, g.log.event_count());
  std::map<std::string, std::size_t> counts;
  for (const auto& t : g.log.traces()) {
    for (const auto& e : t.events()) ++counts[e.activity];
  }
  EXPECT_EQ(counts, g.truth.activity_counts);
}

TEST(Generate, CaseFeaturesFollowWeights) {
  GeneratorSpec s = base_spec(2000);
  s.features = {{"Tier", {"gold", "silver"}, {1, 3}}};
  const auto g = generate(s, procurement());
  std::size_t silver = 0;
  for (const auto& t : g.log.traces()) silver += t.case_attributes().at("Tier") == wise::AttributeValue("silver");
  // Binomial(2000, 0.75): mean 1500, sd about 19.
  EXPECT_NEAR(static_cast<double>(silver), 1500.0, 100.0);

  s.features = {{"Tier", {"gold", "silver"}, {0, 1}}};
  EXPECT_THROW(generate(s, procurement()), wise::Error);
}

TEST(OracleScore, Examples) {
  const auto conforming = oracle_score(procurement(), wise::Trace::from_activities("c", kBase));
  for (double f : conforming.f) EXPECT_EQ(f, 0);
  EXPECT_EQ(conforming.normalized, 1);

  wise::View v;
  v.name = "example";
  v.weights = {1, 0, 0, 0, 0};
  v.constraints.mandatory = {"A", "D", "G"};
  const auto s = oracle_score(v, wise::Trace::from_activities("c", {"A", "D", "A", "F", "C"}));
  EXPECT_EQ(s.f[0], 1);
  EXPECT_EQ(s.score, 0);
}

TEST(GeneratorSpecJson, RoundTrips) {
  std::ifstream in(wise::testing::fixture("sample_spec.json"));
  const auto spec = parse_generator_spec(nlohmann::json::parse(in));
  const auto again = parse_generator_spec(generator_spec_json(spec));
  EXPECT_EQ(generator_spec_json(again), generator_spec_json(spec));
}

TEST(GeneratorSpecJson, RejectsBadInput) {
  EXPECT_THROW(parse_generator_spec(nlohmann::json::object()), wise::Error);
  nlohmann::json bad = {{"n_cases", 3},
                        {"base_sequence", {"A"}},
                        {"injections", {{{"violation", {{"kind", "Teleport"}, {"activities", {"A"}}}}}}}};
  EXPECT_THROW(parse_generator_spec(bad), wise::Error);
  nlohmann::json bad_prob = {{"n_cases", 3},
                             {"base_sequence", {"A"}},
                             {"injections",
                              {{{"probability", 1.5}, {"violation", {{"kind", "Duplicate"}, {"activities", {"A"}}}}}}}};
  EXPECT_THROW(parse_generator_spec(bad_prob), wise::Error);
}

TEST(CaseStreamSeed, DistinctPerIndex) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(case_stream_seed(42, i));
  EXPECT_EQ(seen.size(), 10000u);
}

}  // namespace
