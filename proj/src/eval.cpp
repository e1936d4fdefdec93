#include "ontobuild/eval.hpp"

#include <cmath>
#include <cstdio>

namespace ontobuild::eval {

using nlohmann::json;

std::string normalize_id(std::string_view id) {
  if (id.find("://") != std::string_view::npos || id.starts_with("urn:")) return local_part(id);
  return std::string(id);
}

IriPair normalize_pair(std::string_view a, std::string_view b) {
  return refine::canonical_pair(normalize_id(a), normalize_id(b));
}

namespace {

std::set<IriPair> pair_list(const json& j, const char* field) {
  std::set<IriPair> out;
  if (!j.contains(field)) return out;
  for (const auto& row : j.at(field)) {
    if (!row.is_array() || row.size() != 2) {
      throw ParseError(std::string("ground truth: every ") + field + " entry must be a [a, b] pair");
    }
    out.insert(normalize_pair(row[0].get<std::string>(), row[1].get<std::string>()));
  }
  return out;
}

json pair_json(const std::set<IriPair>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

GroundTruth ground_truth_from_json(const json& j) {
  if (!j.is_object() || !j.contains("universe")) {
    throw ParseError("ground truth: expected an object with a \"universe\" pair list");
  }
  GroundTruth t{pair_list(j, "positives"), pair_list(j, "universe")};
  for (const auto& p : t.positives) {
    if (!t.universe.contains(p)) {
      throw ValidationError("ground truth: positive (" + p.first + ", " + p.second +
                            ") is missing from the universe");
    }
  }
  return t;
}

json to_json(const GroundTruth& truth) {
  return {{"universe", pair_json(truth.universe)}, {"positives", pair_json(truth.positives)}};
}

std::string Histogram::csv() const {
  std::string out = "bin_start_seconds,count\n";
  char buf[64];
  for (const auto& [k, n] : bins) {
    std::snprintf(buf, sizeof buf, "%.6g,%zu\n", static_cast<double>(k) * bin_width, n);
    out += buf;
  }
  return out;
}

std::optional<double> f_score(std::optional<double> precision, std::optional<double> recall) {
  if (!precision || !recall || *precision + *recall <= 0.0) return std::nullopt;
  return 2.0 * *precision * *recall / (*precision + *recall);
}

Metrics metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  Metrics m;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f_score = f_score(m.precision, m.recall);
  return m;
}

Histogram latency_histogram(const std::vector<refine::Judgment>& judgments, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  double sum = 0.0;
  for (const auto& j : judgments) {
    // Only calls that produced a reply have a meaningful latency.
    if (!j.valid && j.raw_response.empty()) continue;
    ++h.bins[static_cast<long>(std::floor(j.latency / bin_width))];
    sum += j.latency;
    ++h.samples;
  }
  if (h.samples > 0) h.mean = sum / static_cast<double>(h.samples);
  return h;
}

namespace {

// pair -> predicted positive; shared by both scorers.
EvalReport score_predictions(const std::map<IriPair, bool>& predicted, const GroundTruth& truth) {
  EvalReport r;
  for (const auto& [pair, positive] : predicted) {
    if (!truth.universe.contains(pair)) {
      throw ValidationError("judged pair (" + pair.first + ", " + pair.second +
                            ") is not in the ground-truth universe");
    }
    bool actual = truth.positives.contains(pair);
    if (positive && actual) ++r.tp;
    else if (positive) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  r.judged_pairs = predicted.size();
  r.unjudged = truth.universe.size() - predicted.size();
  r.metrics = metrics(r.tp, r.fp, r.fn);
  return r;
}

}  // namespace

EvalReport score_pairwise(const std::vector<refine::Judgment>& judgments, const GroundTruth& truth,
                          double price_per_call, double bin_width) {
  std::set<IriPair> yes, no;
  std::size_t invalid = 0;
  for (const auto& j : judgments) {
    if (!j.valid) {
      ++invalid;
      continue;
    }
    (j.mergeable ? yes : no).insert(normalize_pair(j.pair.a, j.pair.b));
  }
  std::map<IriPair, bool> predicted;
  for (const auto& p : no) predicted[p] = false;
  for (const auto& p : yes) predicted.emplace(p, true);  // a false judgment wins

  EvalReport r = score_predictions(predicted, truth);
  r.invalid = invalid;
  r.latency = latency_histogram(judgments, bin_width);
  r.calls = judgments.size();
  r.total_cost = static_cast<double>(r.calls) * price_per_call;
  return r;
}

GroundTruth adapt_ground_truth_to_groups(const GroundTruth& truth) {
  refine::MergeGraph g;
  for (const auto& [a, b] : truth.positives) {
    g.vertices.insert(a);
    g.vertices.insert(b);
    g.edges.insert({a, b});
  }
  GroundTruth out;
  out.universe = truth.universe;
  for (const auto& clique : refine::maximal_cliques(g)) {
    for (auto i = clique.begin(); i != clique.end(); ++i) {
      for (auto j = std::next(i); j != clique.end(); ++j) out.positives.insert({*i, *j});
    }
  }
  out.universe.insert(out.positives.begin(), out.positives.end());
  return out;
}

EvalReport score_grouping(const std::vector<std::set<std::string>>& groups, const GroundTruth& truth) {
  std::map<std::string, std::size_t> owner;
  std::set<IriPair> within;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    std::vector<std::string> ids;
    for (const auto& m : groups[k]) {
      ids.push_back(normalize_id(m));
      auto [it, fresh] = owner.emplace(ids.back(), k);
      if (!fresh && it->second != k) {
        throw ValidationError("groups " + std::to_string(it->second) + " and " + std::to_string(k) +
                              " overlap on '" + ids.back() + "'");
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        if (ids[i] != ids[j]) within.insert(refine::canonical_pair(ids[i], ids[j]));
      }
    }
  }
  std::map<IriPair, bool> predicted;
  for (const auto& p : truth.universe) predicted[p] = false;
  for (const auto& p : within) {
    if (!truth.universe.contains(p)) {
      throw ValidationError("grouped pair (" + p.first + ", " + p.second +
                            ") is not in the ground-truth universe");
    }
    predicted[p] = true;
  }
  return score_predictions(predicted, truth);
}

std::vector<std::set<std::string>> groups_from_json(const json& j) {
  const json& rows = j.is_object() ? j.at("groups") : j;
  if (!rows.is_array()) throw ParseError("groups: expected an array of name lists");
  std::vector<std::set<std::string>> out;
  for (const auto& row : rows) out.push_back(row.get<std::set<std::string>>());
  return out;
}

json to_json(const EvalReport& r) {
  json bins = json::array();
  for (const auto& [k, n] : r.latency.bins) {
    bins.push_back({{"bin_start_seconds", static_cast<double>(k) * r.latency.bin_width}, {"count", n}});
  }
  return {{"tp", r.tp},
          {"fp", r.fp},
          {"fn", r.fn},
          {"tn", r.tn},
          {"judged_pairs", r.judged_pairs},
          {"invalid_judgments", r.invalid},
          {"unjudged_pairs", r.unjudged},
          {"precision", optional_json(r.metrics.precision)},
          {"recall", optional_json(r.metrics.recall)},
          {"f_score", optional_json(r.metrics.f_score)},
          {"mean_latency_seconds", optional_json(r.latency.mean)},
          {"latency_bin_width_seconds", r.latency.bin_width},
          {"latency_bins", bins},
          {"calls", r.calls},
          {"total_cost", r.total_cost}};
}

}  // namespace ontobuild::eval
