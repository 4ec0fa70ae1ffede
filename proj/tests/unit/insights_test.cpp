#include <fstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "test_support.hpp"
#include "wise/errors.hpp"
#include "wise/insights.hpp"
#include "wise/synthlog.hpp"

namespace {

using wise::AggregationCell;
using wise::LayerId;

// Six cells for one value: the given layer means, then Overall.
std::vector<AggregationCell> value_cells(const std::string& feature, const std::string& value, std::size_t n,
                                         const std::array<double, wise::kColumnCount>& means) {
  std::vector<AggregationCell> out;
  const auto cols = wise::score_columns();
  for (std::size_t i = 0; i < wise::kColumnCount; ++i) {
    AggregationCell c;
    c.feature = feature;
    c.value = value;
    c.column = cols[i];
    c.stats.n = n;
    c.stats.mean = means[i];
    out.push_back(c);
  }
  return out;
}

std::vector<AggregationCell> two_values() {
  auto cells = value_cells("Category", "Logistic", 2, {1, 1, 1, 1, 0.3, 0.3});
  auto more = value_cells("Category", "Service", 2, {1, 0.95, 1, 1, 1, 0.95});
  cells.insert(cells.end(), more.begin(), more.end());
  return cells;
}

wise::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const wise::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return wise::ErrorCode::Io;
}

TEST(DeriveFindings, NamesWeakestLayer) {
  const auto findings = wise::derive_findings(two_values(), 5, 1);
  ASSERT_EQ(findings.size(), 2u);
  EXPECT_EQ(findings[0].rank, 1u);
  EXPECT_EQ(findings[0].value, "Logistic");
  EXPECT_EQ(findings[0].layer, LayerId::Exclusion);
  EXPECT_NE(findings[0].statement.find("manual changes"), std::string::npos) << findings[0].statement;
  EXPECT_NEAR(findings[0].deficit, 1.4, 1e-12);
  EXPECT_EQ(findings[0].evidence.size(), wise::kColumnCount);
  EXPECT_EQ(findings[1].layer, LayerId::Sequential);
  EXPECT_NE(findings[1].statement.find("order violations"), std::string::npos);
}

TEST(DeriveFindings, LayerTiesGoToLowerIndex) {
  const auto cells = value_cells("F", "x", 3, {0.5, 0.5, 0.9, 0.5, 1, 0.4});
  EXPECT_EQ(wise::derive_findings(cells, 1, 1)[0].layer, LayerId::Foundational);
}

TEST(DeriveFindings, EdgeCases) {
  EXPECT_TRUE(wise::derive_findings({}, 3, 1).empty());
  EXPECT_EQ(wise::derive_findings(two_values(), 50, 1).size(), 2u);
  EXPECT_EQ(wise::derive_findings(two_values(), 1, 1).size(), 1u);
  EXPECT_TRUE(wise::derive_findings(two_values(), 5, 3).empty());
  EXPECT_EQ(code_of([] { wise::derive_findings(two_values(), 0, 1); }), wise::ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { wise::derive_findings(two_values(), 1, 0); }), wise::ErrorCode::InvalidArgument);
}

TEST(DeriveFindings, LayerDiagnosisTemplates) {
  EXPECT_EQ(wise::layer_diagnosis(LayerId::Foundational), "missing steps");
  EXPECT_EQ(wise::layer_diagnosis(LayerId::Sequential), "order violations");
  EXPECT_EQ(wise::layer_diagnosis(LayerId::Equilibrium), "imbalance/quantity mismatch");
  EXPECT_EQ(wise::layer_diagnosis(LayerId::Singularity), "rework/repetition");
  EXPECT_EQ(wise::layer_diagnosis(LayerId::Exclusion), "manual changes");
}

TEST(DeriveFindings, GeneratedLogisticLogBlamesExclusion) {
  std::ifstream in(wise::testing::fixture("logistic_spec.json"));
  const auto spec = wise::synth::parse_generator_spec(nlohmann::json::parse(in));
  const auto norm = wise::load_norm_file(wise::testing::fixture("procurement_norm.json"));
  const auto g = wise::synth::generate(spec, norm.views[0]);
  const auto table = wise::score_log(norm.views[0], g.log);
  const auto findings = wise::derive_findings(wise::aggregate_all_features(table, g.log), 3, 1);
  ASSERT_FALSE(findings.empty());
  EXPECT_EQ(findings[0].value, "Logistic");
  EXPECT_EQ(findings[0].layer, LayerId::Exclusion);
  EXPECT_NE(findings[0].statement.find("manual changes"), std::string::npos);
}

TEST(EchoAdvisor, NarratesFindingsInRankOrder) {
  wise::AdvisorRequest request;
  request.findings = wise::derive_findings(two_values(), 5, 1);
  wise::EchoAdvisor echo;
  const auto response = wise::advise(request, echo);
  const auto first = response.narrative.find(request.findings[0].statement);
  const auto second = response.narrative.find(request.findings[1].statement);
  ASSERT_NE(first, std::string::npos);
  ASSERT_NE(second, std::string::npos);
  EXPECT_LT(first, second);
  EXPECT_TRUE(response.deterministic);
  ASSERT_EQ(response.follow_up_filters.size(), 2u);
  EXPECT_EQ(response.follow_up_filters[0].equals,
            (std::vector<std::pair<std::string, std::string>>{{"Category", "Logistic"}}));
}

TEST(EchoAdvisor, NoFindings) {
  wise::EchoAdvisor echo;
  const auto response = echo.advise({});
  EXPECT_FALSE(response.narrative.empty());
  EXPECT_TRUE(response.follow_up_filters.empty());
}

TEST(AdvisorWire, RequestCarriesNoEventData) {
  wise::AdvisorRequest request;
  request.norm_summary = wise::norm_summary(wise::load_norm_file(wise::testing::fixture("two_view_norm.json")));
  request.findings = wise::derive_findings(two_values(), 5, 1);
  request.aggregates = two_values();
  const auto j = wise::advisor_request_json(request);
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["findings"].size(), 2u);
  EXPECT_EQ(j["aggregates"].size(), 12u);
  EXPECT_EQ(j["norm_summary"]["views"].size(), 2u);
  EXPECT_EQ(j.dump().find("\"events\""), std::string::npos);
}

// A throwaway advisor endpoint on an ephemeral port.
class StubAdvisor {
 public:
  explicit StubAdvisor(std::string reply) {
    server_.Post("/advise", [reply](const httplib::Request&, httplib::Response& res) {
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubAdvisor() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/advise"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpAdvisor, PassesThroughWellFormedReply) {
  StubAdvisor stub(R"({"narrative":"look at Logistic","follow_up_filters":[{"equals":{"Category":"Logistic"}}]})");
  wise::HttpAdvisor advisor(stub.url(), std::chrono::milliseconds(2000));
  const auto response = advisor.advise({});
  EXPECT_EQ(response.narrative, "look at Logistic");
  EXPECT_FALSE(response.deterministic);
  ASSERT_EQ(response.follow_up_filters.size(), 1u);
}

TEST(HttpAdvisor, NonJsonReplyIsMalformed) {
  StubAdvisor stub("<html>teapot</html>");
  wise::HttpAdvisor advisor(stub.url(), std::chrono::milliseconds(2000));
  EXPECT_EQ(code_of([&] { advisor.advise({}); }), wise::ErrorCode::AdvisorMalformedResponse);
}

TEST(HttpAdvisor, JsonWithoutNarrativeIsMalformed) {
  StubAdvisor stub(R"({"story":"x"})");
  wise::HttpAdvisor advisor(stub.url(), std::chrono::milliseconds(2000));
  EXPECT_EQ(code_of([&] { advisor.advise({}); }), wise::ErrorCode::AdvisorMalformedResponse);
}

TEST(HttpAdvisor, ClosedPortIsUnreachable) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  wise::HttpAdvisor advisor("http://127.0.0.1:" + std::to_string(port) + "/advise", std::chrono::milliseconds(500));
  EXPECT_EQ(code_of([&] { advisor.advise({}); }), wise::ErrorCode::AdvisorUnreachable);
}

}  // namespace
