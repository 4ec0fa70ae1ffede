#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wise/errors.hpp"
#include "wise/event_log.hpp"

namespace {

using wise::Event;
using wise::EventLog;
using wise::Trace;

Trace adafc_trace() { return Trace::from_activities("c", {"A", "D", "A", "F", "C"}); }

TEST(EventuallyPrecedes, Examples) {
  EXPECT_TRUE(wise::eventually_precedes(adafc_trace(), "A", "F"));
  EXPECT_FALSE(wise::eventually_precedes(Trace::from_activities("c", {"A"}), "A", "A"));
  EXPECT_FALSE(wise::eventually_precedes(Trace::from_activities("c", {"B", "A"}), "A", "B"));
  EXPECT_TRUE(wise::eventually_precedes(Trace::from_activities("c", {"A", "A"}), "A", "A"));
  EXPECT_FALSE(wise::eventually_precedes(adafc_trace(), "A", "Z"));
}

TEST(CountActivity, Examples) {
  EXPECT_EQ(wise::count_activity(adafc_trace(), "A"), 2u);
  EXPECT_EQ(wise::count_activity(Trace::from_activities("c", {}), "A"), 0u);
  EXPECT_EQ(wise::count_activity(Trace::from_activities("c", {"A", "A", "A"}), "A"), 3u);
  EXPECT_EQ(wise::count_activity(adafc_trace(), "Q"), 0u);
}

// Brute force over all index pairs, independent of the code-scanning path.
bool precedes_by_definition(const std::vector<std::string>& seq, const std::string& a, const std::string& b) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] == a && seq[j] == b) return true;
    }
  }
  return false;
}

TEST(EventuallyPrecedes, MatchesDefinitionOnRandomTraces) {
  std::mt19937_64 rng(5);
  const auto alphabet = wise::testing::letters(5);
  for (int n = 0; n < 3000; ++n) {
    const auto seq = wise::testing::random_sequence(rng, alphabet, 20);
    const Trace t = Trace::from_activities("c", seq);
    for (const auto& a : alphabet) {
      for (const auto& b : alphabet) {
        ASSERT_EQ(wise::eventually_precedes(t, a, b), precedes_by_definition(seq, a, b));
      }
      ASSERT_EQ(wise::count_activity(t, a), static_cast<std::size_t>(std::count(seq.begin(), seq.end(), a)));
    }
  }
}

TEST(PrecedenceOrder, PartialOrderClosure) {
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}, {1, 2}};
  const auto order = wise::PrecedenceOrder::from_pairs(4, pairs);
  EXPECT_FALSE(order.is_total());
  EXPECT_TRUE(order.precedes(0, 2));
  EXPECT_FALSE(order.precedes(2, 0));
  EXPECT_FALSE(order.precedes(0, 3));
  EXPECT_FALSE(order.precedes(3, 0));
}

TEST(PrecedenceOrder, RejectsCyclesAndReflexivePairs) {
  const std::vector<std::pair<std::size_t, std::size_t>> cycle{{0, 1}, {1, 0}};
  EXPECT_THROW(wise::PrecedenceOrder::from_pairs(2, cycle), wise::Error);
  const std::vector<std::pair<std::size_t, std::size_t>> self{{1, 1}};
  EXPECT_THROW(wise::PrecedenceOrder::from_pairs(2, self), wise::Error);
  const std::vector<std::pair<std::size_t, std::size_t>> out_of_range{{0, 5}};
  EXPECT_THROW(wise::PrecedenceOrder::from_pairs(2, out_of_range), wise::Error);
}

TEST(EventuallyPrecedes, RespectsPartialOrder) {
  std::vector<Event> events;
  for (const char* a : {"A", "B", "C"}) {
    Event e;
    e.event_id = static_cast<std::int64_t>(events.size());
    e.activity = a;
    e.case_id = "p";
    events.push_back(e);
  }
  // A before C only; B unordered.
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 2}};
  const Trace t("p", events, wise::PrecedenceOrder::from_pairs(3, pairs));
  EXPECT_TRUE(wise::eventually_precedes(t, "A", "C"));
  EXPECT_FALSE(wise::eventually_precedes(t, "A", "B"));
  EXPECT_FALSE(wise::eventually_precedes(t, "B", "C"));
  EXPECT_FALSE(wise::eventually_precedes(t, "C", "A"));
}

TEST(EventLog, AlphabetCatalogAndLookup) {
  wise::AttributeMap case_attrs{{"Category", wise::AttributeValue("Logistic")}};
  std::vector<Event> e1(2), e2(1);
  e1[0] = {0, "A", "c1", std::nullopt, {{"amount", wise::AttributeValue(10.0)}}};
  e1[1] = {1, "B", "c1", std::nullopt, {{"amount", wise::AttributeValue(12.0)}}};
  e2[0] = {2, "A", "c2", std::nullopt, {}};
  std::vector<Trace> traces;
  traces.emplace_back("c1", e1, case_attrs);
  traces.emplace_back("c2", e2, wise::AttributeMap{{"Category", wise::AttributeValue("Service")}});
  const EventLog log = EventLog::from_traces(std::move(traces));

  EXPECT_EQ(log.activity_alphabet(), (std::set<std::string, std::less<>>{"A", "B"}));
  EXPECT_EQ(log.event_count(), 3u);
  ASSERT_EQ(log.feature_catalog().size(), 2u);
  const auto* amount = log.find_feature("amount");
  ASSERT_NE(amount, nullptr);
  EXPECT_EQ(amount->level, wise::FeatureLevel::Event);
  EXPECT_EQ(amount->kind, wise::FeatureKind::Numeric);
  const auto* category = log.find_feature("Category");
  ASSERT_NE(category, nullptr);
  EXPECT_EQ(category->level, wise::FeatureLevel::Case);
  EXPECT_EQ(category->kind, wise::FeatureKind::Categorical);
  EXPECT_EQ(category->distinct_value_count, 2u);
  EXPECT_EQ(log.find_trace("c2"), 1u);
  EXPECT_FALSE(log.find_trace("nope"));
}

TEST(EventLog, RejectsDuplicateCaseIds) {
  std::vector<Trace> traces{Trace::from_activities("x", {"A"}), Trace::from_activities("x", {"B"})};
  EXPECT_THROW(EventLog::from_traces(std::move(traces)), wise::Error);
}

TEST(EventLog, SharesOneCodebookAcrossTraces) {
  std::vector<Trace> traces{Trace::from_activities("1", {"A", "B"}), Trace::from_activities("2", {"C", "A"})};
  const EventLog log = EventLog::from_traces(std::move(traces));
  for (const Trace& t : log.traces()) {
    EXPECT_EQ(t.codebook(), log.codebook());
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(log.codebook()->name(t.codes()[i]), t.events()[i].activity);
    }
  }
}

TEST(EventLog, SubsetKeepsParentCatalog) {
  std::vector<Trace> traces;
  traces.emplace_back("1", std::vector<Event>{{0, "A", "1", std::nullopt, {}}},
                      wise::AttributeMap{{"Tier", wise::AttributeValue("gold")}});
  traces.emplace_back("2", std::vector<Event>{{1, "B", "2", std::nullopt, {}}},
                      wise::AttributeMap{{"Tier", wise::AttributeValue(3.0)}});
  const EventLog log = EventLog::from_traces(std::move(traces));
  const std::vector<std::size_t> keep{1};
  const EventLog sub = log.subset(keep);
  EXPECT_EQ(sub.traces().size(), 1u);
  EXPECT_EQ(sub.activity_alphabet(), (std::set<std::string, std::less<>>{"B"}));
  EXPECT_EQ(sub.feature_catalog(), log.feature_catalog());
}

TEST(OrderForIngest, StableByTimestamp) {
  using namespace std::chrono;
  const wise::Timestamp t0{milliseconds{0}};
  std::vector<Event> ev{{0, "late", "c", t0 + milliseconds{5}, {}},
                        {1, "tie-a", "c", t0, {}},
                        {2, "tie-b", "c", t0, {}}};
  wise::order_for_ingest(ev);
  EXPECT_EQ(ev[0].activity, "tie-a");
  EXPECT_EQ(ev[1].activity, "tie-b");
  EXPECT_EQ(ev[2].activity, "late");
}

TEST(OrderForIngest, UntimedEventKeepsSourceOrder) {
  using namespace std::chrono;
  const wise::Timestamp t0{milliseconds{0}};
  std::vector<Event> ev{{0, "B", "c", t0 + milliseconds{5}, {}}, {1, "A", "c", std::nullopt, {}}, {2, "C", "c", t0, {}}};
  wise::order_for_ingest(ev);
  EXPECT_EQ(ev[0].activity, "B");
  EXPECT_EQ(ev[1].activity, "A");
  EXPECT_EQ(ev[2].activity, "C");
}

TEST(HoistCaseAttributes, OnlyConstantValues) {
  std::vector<Event> ev{{0, "A", "c", std::nullopt, {{"org", wise::AttributeValue("x")}, {"amt", wise::AttributeValue(1.0)}}},
                        {1, "B", "c", std::nullopt, {{"org", wise::AttributeValue("x")}, {"amt", wise::AttributeValue(2.0)}}},
                        {2, "C", "c", std::nullopt, {}}};
  const auto hoisted = wise::hoist_case_attributes(ev, {{"org", wise::AttributeValue("trace-level")}});
  EXPECT_EQ(hoisted.at("org"), wise::AttributeValue("trace-level"));
  EXPECT_FALSE(hoisted.contains("amt"));
  const auto plain = wise::hoist_case_attributes(ev, {});
  EXPECT_EQ(plain.at("org"), wise::AttributeValue("x"));
}

}  // namespace
