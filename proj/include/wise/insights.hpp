#pragma once

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wise/aggregation.hpp"
#include "wise/norm.hpp"

namespace wise {

struct Finding {
  std::size_t rank = 0;  // 1-based
  std::string feature;
  std::string value;
  LayerId layer = LayerId::Foundational;  // lowest layer mean for this value
  double layer_mean = 0;
  double overall_mean = 0;
  double deficit = 0;
  std::size_t n_cases = 0;
  std::string statement;
  std::vector<AggregationCell> evidence;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Fixed per-layer reading of a low score, e.g. Exclusion -> "manual changes".
std::string_view layer_diagnosis(LayerId layer);

/// Top-k values by deficit (see rank_feature_values), each annotated with its
/// weakest layer. Ties between layer means go to the lower layer index.
/// Throws Error(InvalidArgument) when k or min_support is zero.
std::vector<Finding> derive_findings(std::span<const AggregationCell> cells, std::size_t k,
                                     std::size_t min_support);

nlohmann::json finding_json(const Finding& finding);

struct AdvisorRequest {
  int version = 1;
  nlohmann::json norm_summary;
  std::vector<Finding> findings;
  std::vector<AggregationCell> aggregates;
};

struct AdvisorResponse {
  std::string narrative;
  std::vector<FilterSpec> follow_up_filters;
  bool deterministic = true;
};

/// Views with their weights and constraint counts; no event data.
nlohmann::json norm_summary(const ProcessNorm& norm);
nlohmann::json advisor_request_json(const AdvisorRequest& request);
nlohmann::json advisor_response_json(const AdvisorResponse& response);

class Advisor {
 public:
  virtual ~Advisor() = default;
  virtual AdvisorResponse advise(const AdvisorRequest& request) = 0;
};

/// Re-renders the findings as a numbered narrative and proposes one
/// drill-down filter per finding.
class EchoAdvisor final : public Advisor {
 public:
  AdvisorResponse advise(const AdvisorRequest& request) override;
};

/// POSTs the request JSON to `url` (http://host[:port]/path) and returns the
/// reply unchanged, flagged non-deterministic.
/// Throws Error(AdvisorUnreachable | AdvisorMalformedResponse).
class HttpAdvisor final : public Advisor {
 public:
  HttpAdvisor(std::string url, std::chrono::milliseconds timeout);
  AdvisorResponse advise(const AdvisorRequest& request) override;

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

AdvisorResponse advise(const AdvisorRequest& request, Advisor& advisor);

}  // namespace wise
