#include <doctest.h>

#include <algorithm>
#include <random>

#include "ontobuild/eval.hpp"

using namespace ontobuild;
using namespace ontobuild::eval;
using refine::Judgment;
using nlohmann::json;

namespace {

Judgment judged(const std::string& a, const std::string& b, bool yes, double latency = 1.0) {
  Judgment j;
  j.pair = refine::make_candidate(a, b, "");
  j.mergeable = yes;
  j.valid = true;
  j.raw_response = yes ? "true" : "false";
  j.latency = latency;
  return j;
}

GroundTruth truth(std::set<IriPair> positives, std::set<IriPair> universe) {
  universe.insert(positives.begin(), positives.end());
  return {positives, universe};
}

std::set<IriPair> all_pairs(const std::vector<std::string>& ids) {
  std::set<IriPair> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) out.insert(refine::canonical_pair(ids[i], ids[j]));
  }
  return out;
}

}  // namespace

TEST_CASE("f-score arithmetic") {
  CHECK(std::abs(*f_score(0.2596, 0.925) - 0.4055) <= 0.0005);
  CHECK(std::abs(*f_score(0.763, 0.197) - 0.3131) <= 0.01);
  CHECK(std::abs(*f_score(0.3676, 0.525) - 0.4324) <= 0.0005);
  CHECK_FALSE(f_score(std::nullopt, 0.5).has_value());
  CHECK_FALSE(f_score(0.0, 0.0).has_value());

  auto m = metrics(74, 211, 6);
  CHECK(*m.precision == doctest::Approx(74.0 / 285.0));
  CHECK(*m.recall == doctest::Approx(0.925));
  CHECK(std::abs(*m.f_score - 0.4055) <= 0.0005);

  auto none = metrics(0, 0, 0);
  CHECK_FALSE(none.precision.has_value());
  CHECK_FALSE(none.recall.has_value());
  CHECK_FALSE(none.f_score.has_value());

  // harmonic mean lies between its inputs
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int k = 0; k < 1000; ++k) {
    double p = u(rng), r = u(rng);
    double f = *f_score(p, r);
    CHECK(f >= std::min(p, r) - 1e-12);
    CHECK(f <= std::max(p, r) + 1e-12);
  }
}

TEST_CASE("pairwise scoring") {
  auto t = truth({{"a", "b"}, {"c", "d"}}, {{"a", "c"}, {"b", "d"}});
  std::vector<Judgment> js{judged("a", "b", true, 3), judged("c", "d", false, 14), judged("a", "c", true, 19),
                           judged("b", "d", false, 4)};
  Judgment broken = judged("a", "d", false);
  broken.valid = false;
  broken.raw_response = "perhaps";
  js.push_back(broken);

  auto r = score_pairwise(js, t, 0.01);
  CHECK(r.tp == 1);
  CHECK(r.fn == 1);
  CHECK(r.fp == 1);
  CHECK(r.tn == 1);
  CHECK(r.invalid == 1);
  CHECK(r.unjudged == 0);
  CHECK(*r.metrics.precision == 0.5);
  CHECK(*r.metrics.recall == 0.5);
  CHECK(r.calls == 5);
  CHECK(r.total_cost == doctest::Approx(0.05));

  auto reordered = js;
  std::reverse(reordered.begin(), reordered.end());
  CHECK(to_json(score_pairwise(reordered, t, 0.01)) == to_json(r));

  SUBCASE("IRIs reduce to fragments") {
    std::vector<Judgment> iri_js{judged("http://x/o#a", "http://x/o#b", true)};
    CHECK(score_pairwise(iri_js, t).tp == 1);
  }
  SUBCASE("pair outside the universe is an error") {
    CHECK_THROWS_WITH_AS(score_pairwise({judged("a", "z", true)}, t), doctest::Contains("not in the ground-truth"),
                         ValidationError);
  }
  SUBCASE("conflicting duplicates count as negative") {
    auto dup = score_pairwise({judged("a", "b", true), judged("b", "a", false)}, t);
    CHECK(dup.tp == 0);
    CHECK(dup.fn == 1);
    CHECK(dup.judged_pairs == 1);
  }
}

TEST_CASE("cost accounting") {
  std::vector<Judgment> js;
  std::vector<std::string> ids;
  for (int k = 0; k < 204; ++k) ids.push_back("n" + std::to_string(k));
  GroundTruth t;
  for (int k = 0; k < 20680; ++k) {
    auto a = ids[k % 204], b = ids[(k / 204 + k % 204 + 1) % 204];
    if (a == b) b = ids[(k % 204 + 7) % 204];
    js.push_back(judged(a, b, false));
    t.universe.insert(refine::canonical_pair(a, b));
  }
  auto r = score_pairwise(js, t, 0.724 / 20680);
  CHECK(r.calls == 20680);
  CHECK(r.total_cost == doctest::Approx(0.724).epsilon(1e-12));
}

TEST_CASE("ground truth adaptation") {
  auto triangle = truth({{"A", "B"}, {"B", "C"}, {"A", "C"}}, {});
  CHECK(adapt_ground_truth_to_groups(triangle).positives == triangle.positives);

  auto path = truth({{"A", "B"}, {"B", "C"}}, {});
  CHECK(adapt_ground_truth_to_groups(path).positives == path.positives);

  auto k4_minus = truth({{"A", "B"}, {"A", "C"}, {"A", "D"}, {"B", "C"}, {"B", "D"}}, {});
  auto adapted = adapt_ground_truth_to_groups(k4_minus);
  CHECK(adapted.positives.size() == 5);
  CHECK_FALSE(adapted.positives.contains({"C", "D"}));

  std::mt19937 rng(11);
  for (int run = 0; run < 50; ++run) {
    GroundTruth t;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        IriPair p{"v" + std::to_string(i), "v" + std::to_string(j)};
        t.universe.insert(p);
        if (std::bernoulli_distribution(0.4)(rng)) t.positives.insert(p);
      }
    }
    auto once = adapt_ground_truth_to_groups(t);
    auto twice = adapt_ground_truth_to_groups(once);
    CHECK(once.positives == twice.positives);
    CHECK(once.universe == twice.universe);
  }
}

TEST_CASE("grouping scoring") {
  auto t = truth({{"A", "B"}}, {{"A", "C"}});
  auto r = score_grouping({{"A", "B"}}, t);
  CHECK(*r.metrics.precision == 1.0);
  CHECK(*r.metrics.recall == 1.0);

  auto all3 = truth({{"A", "B"}}, all_pairs({"A", "B", "C"}));
  auto r3 = score_grouping({{"A", "B", "C"}}, all3);
  CHECK(r3.tp == 1);
  CHECK(r3.fp == 2);
  CHECK(*r3.metrics.precision == doctest::Approx(1.0 / 3.0));

  auto empty = score_grouping({}, all3);
  CHECK(empty.tp == 0);
  CHECK(empty.fp == 0);
  CHECK(*empty.metrics.recall == 0.0);

  CHECK_THROWS_AS(score_grouping({{"A", "B"}, {"B", "C"}}, all3), ValidationError);
  CHECK_THROWS_AS(score_grouping({{"A", "Z"}}, all3), ValidationError);

  // equivalence with pairwise scoring of the implied judgments
  std::mt19937 rng(5);
  std::vector<std::string> ids{"a", "b", "c", "d", "e", "f", "g"};
  for (int run = 0; run < 50; ++run) {
    GroundTruth t2;
    t2.universe = all_pairs(ids);
    for (const auto& p : t2.universe) {
      if (std::bernoulli_distribution(0.3)(rng)) t2.positives.insert(p);
    }
    auto shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<std::set<std::string>> groups;
    for (std::size_t k = 0; k < shuffled.size();) {
      std::size_t size = 1 + rng() % 3;
      groups.emplace_back(shuffled.begin() + k, shuffled.begin() + std::min(shuffled.size(), k + size));
      k += size;
    }
    std::set<IriPair> within;
    for (const auto& g : groups) {
      auto ps = all_pairs({g.begin(), g.end()});
      within.insert(ps.begin(), ps.end());
    }
    std::vector<Judgment> js;
    for (const auto& p : t2.universe) js.push_back(judged(p.first, p.second, within.contains(p)));
    auto by_group = score_grouping(groups, t2);
    auto by_pair = score_pairwise(js, t2);
    CHECK(by_group.tp == by_pair.tp);
    CHECK(by_group.fp == by_pair.fp);
    CHECK(by_group.fn == by_pair.fn);
    CHECK(by_group.tn == by_pair.tn);
  }

  CHECK(groups_from_json(json::parse(R"({"groups":[["a","b"],["c"]]})")).size() == 2);
  CHECK(groups_from_json(json::parse(R"([["a","b"]])")).size() == 1);
}

TEST_CASE("latency histogram") {
  auto h = latency_histogram({judged("a", "b", true, 3), judged("a", "c", true, 14), judged("b", "c", false, 19)}, 5);
  CHECK(h.bins == std::map<long, std::size_t>{{0, 1}, {2, 1}, {3, 1}});
  CHECK(*h.mean == doctest::Approx(12.0));
  CHECK(h.csv() == "bin_start_seconds,count\n0,1\n10,1\n15,1\n");

  auto empty = latency_histogram({}, 5);
  CHECK(empty.bins.empty());
  CHECK_FALSE(empty.mean.has_value());
  CHECK_THROWS_AS(latency_histogram({}, 0), ValidationError);

  // descriptive only: synthetic latencies of a few seconds
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(2.5, 20.0);
  std::vector<Judgment> js;
  for (int k = 0; k < 500; ++k) js.push_back(judged("a", "b", false, u(rng)));
  auto s = latency_histogram(js, 1.0);
  CHECK(*s.mean > 2.5);
  CHECK(*s.mean < 20.0);
}

TEST_CASE("ground truth json") {
  auto t = ground_truth_from_json(json::parse(
      R"({"universe":[["b","a"],["http://x/o#c","d"]],"positives":[["a","b"]]})"));
  CHECK(t.universe == std::set<IriPair>{{"a", "b"}, {"c", "d"}});
  CHECK(t.positives == std::set<IriPair>{{"a", "b"}});
  CHECK(ground_truth_from_json(to_json(t)).universe == t.universe);
  CHECK_THROWS_AS(ground_truth_from_json(json::parse(R"({"universe":[],"positives":[["a","b"]]})")),
                  ValidationError);
  CHECK_THROWS_AS(ground_truth_from_json(json::parse(R"({"positives":[]})")), ParseError);
}
