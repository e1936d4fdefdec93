#pragma once

// Scoring of pairwise and grouping oracles against a hand-labelled ground
// truth, plus latency and cost accounting.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ontobuild/refine.hpp"

namespace ontobuild::eval {

using refine::IriPair;

/// Ground-truth ids may be bare names or full IRIs; IRIs reduce to their
/// fragment so that files can be written by hand.
std::string normalize_id(std::string_view id);
IriPair normalize_pair(std::string_view a, std::string_view b);

struct GroundTruth {
  std::set<IriPair> positives;
  std::set<IriPair> universe;
};

/// {"universe": [[a, b], ...], "positives": [[a, b], ...]}; positives are
/// required to be in the universe.
GroundTruth ground_truth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GroundTruth& truth);

struct Histogram {
  double bin_width = 0.0;
  std::map<long, std::size_t> bins;  // k -> count of samples in [k*w, (k+1)*w)
  std::size_t samples = 0;
  std::optional<double> mean;

  /// `bin_start_seconds,count` rows.
  std::string csv() const;
};

struct Metrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_score;
};

Metrics metrics(std::size_t tp, std::size_t fp, std::size_t fn);
std::optional<double> f_score(std::optional<double> precision, std::optional<double> recall);

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t judged_pairs = 0;
  std::size_t invalid = 0;    // judgments excluded as unparseable/failed
  std::size_t unjudged = 0;   // universe pairs with no valid judgment
  Metrics metrics;
  Histogram latency;
  std::size_t calls = 0;
  double total_cost = 0.0;
};

/// Counts over judged pairs. Repeated judgments of a pair follow the merge
/// graph rule: positive only if some judgment says true and none says false.
/// Throws ValidationError for a judged pair outside the universe.
EvalReport score_pairwise(const std::vector<refine::Judgment>& judgments, const GroundTruth& truth,
                          double price_per_call = 0.0, double bin_width = 5.0);

/// Every within-clique pair of the positive graph's maximal cliques.
GroundTruth adapt_ground_truth_to_groups(const GroundTruth& truth);

/// Predicted positives are all within-group pairs; every universe pair is
/// judged. Throws ValidationError for overlapping groups or a predicted pair
/// outside the universe.
EvalReport score_grouping(const std::vector<std::set<std::string>>& groups, const GroundTruth& truth);

/// Accepts {"groups": [[...], ...]} or a bare array of arrays.
std::vector<std::set<std::string>> groups_from_json(const nlohmann::json& j);

/// Throws ValidationError unless bin_width > 0.
Histogram latency_histogram(const std::vector<refine::Judgment>& judgments, double bin_width);

nlohmann::json to_json(const EvalReport& report);

}  // namespace ontobuild::eval
