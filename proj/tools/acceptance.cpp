// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Every value compared here comes from an oracle written in this file, from a
// fixture generated by an independent script, or is pinned below.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ontobuild/classgen.hpp"
#include "ontobuild/cli.hpp"
#include "ontobuild/eval.hpp"
#include "ontobuild/instancegen.hpp"
#include "ontobuild/rdfio.hpp"
#include "ontobuild/refine.hpp"
#include "ontobuild/schema.hpp"
#include "ontobuild/vault.hpp"
#include "test_support.hpp"

using namespace ontobuild;
using nlohmann::json;
using ontobuild::testing::fixture;
using ontobuild::testing::read_fixture;
using ontobuild::testing::ScratchDir;
using ontobuild::testing::slurp;
using ontobuild::testing::write_file;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances
constexpr double kFTightTol = 0.0005;
constexpr double kFLooseTol = 0.01;  // 0.763/0.197 gives 0.3131 only to two places
constexpr double kFRuntimeLimit = 1.0;
constexpr int kCliqueGraphs = 200;
constexpr std::size_t kCliqueMaxVertices = 12;
constexpr double kCliqueRuntimeLimit = 30.0;
constexpr double kDuplicateShareTarget = 0.30;
constexpr double kDuplicateShareTol = 0.01;
constexpr double kReductionTarget = 0.26;
constexpr double kReductionTol = 0.01;
constexpr int kMergePlans = 100;
constexpr int kRandomOntologies = 100;
constexpr int kPageRankGraphs = 50;
constexpr std::size_t kPageRankMaxNodes = 30;
constexpr double kPageRankTol = 1e-8;
constexpr double kPageRankSumTol = 1e-9;
constexpr double kEndToEndLimit = 5.0;

constexpr const char* kBase = "http://example.org/ontobuild";

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

struct Corpus {
  schema::SchemaModel model;
  OntologyGraph classes;
  instancegen::Population population;
};

Corpus build(const std::string& xsd, const std::string& xml) {
  Corpus c;
  c.model = schema::parse_schema(read_fixture(xsd));
  c.classes = classgen::generate_schema_ontology(c.model, kBase);
  c.population = instancegen::populate_instances(c.classes, read_fixture(xml), c.model);
  return c;
}

const Corpus& main_corpus() {
  static const Corpus c = build("schema/requirements.xsd", "corpus/corpus.xml");
  return c;
}

const Corpus& cve_corpus() {
  static const Corpus c = build("corpus/requirements_cve.xsd", "corpus/corpus_cve.xml");
  return c;
}

// ---- 1

Verdict f_scores() {
  struct Case {
    double p, r, f, tol;
  };
  const Case cases[] = {{0.2596, 0.925, 0.4055, kFTightTol},
                        {0.763, 0.197, 0.3131, kFLooseTol},
                        {0.3676, 0.525, 0.4324, kFTightTol}};
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    auto f = eval::f_score(c.p, c.r);
    bool ok = f && std::abs(*f - c.f) <= c.tol;
    v.pass &= ok;
    v.detail += fmt(c.p) + "/" + fmt(c.r) + " -> " + (f ? fmt(*f) : "none") + "; ";
  }
  double t = seconds_since(t0);
  v.pass &= t < kFRuntimeLimit;
  v.detail += "runtime " + fmt(t, 6) + " s";
  return v;
}

// ---- 2

std::vector<std::set<std::string>> brute_force_cliques(const refine::MergeGraph& g) {
  std::vector<std::string> vs(g.vertices.begin(), g.vertices.end());
  const std::size_t n = vs.size();
  auto adjacent = [&](std::size_t i, std::size_t j) { return g.edges.contains(refine::canonical_pair(vs[i], vs[j])); };
  auto is_clique = [&](unsigned mask) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((mask >> i & 1) && (mask >> j & 1) && !adjacent(i, j)) return false;
      }
    }
    return true;
  };
  std::vector<std::set<std::string>> out;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) < 2 || !is_clique(mask)) continue;
    bool maximal = true;
    for (std::size_t k = 0; k < n && maximal; ++k) {
      if (!(mask >> k & 1) && is_clique(mask | (1u << k))) maximal = false;
    }
    if (!maximal) continue;
    std::set<std::string> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) members.insert(vs[i]);
    }
    out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Verdict cliques() {
  std::mt19937 rng(1403);
  int mismatches = 0;
  std::size_t total = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int run = 0; run < kCliqueGraphs; ++run) {
    refine::MergeGraph g;
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, kCliqueMaxVertices)(rng);
    double density = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    for (std::size_t i = 0; i < n; ++i) g.vertices.insert("v" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::bernoulli_distribution(density)(rng)) {
          g.edges.insert(refine::canonical_pair("v" + std::to_string(i), "v" + std::to_string(j)));
        }
      }
    }
    auto got = refine::maximal_cliques(g);
    std::sort(got.begin(), got.end());
    auto want = brute_force_cliques(g);
    total += want.size();
    if (got != want) ++mismatches;
  }
  double t = seconds_since(t0);
  return {mismatches == 0 && t < kCliqueRuntimeLimit,
          std::to_string(kCliqueGraphs) + " graphs, " + std::to_string(total) + " cliques, " +
              std::to_string(mismatches) + " mismatches, " + fmt(t, 3) + " s"};
}

// ---- 3

Verdict dedup_counts() {
  auto expected = json::parse(read_fixture("corpus/expected_counts.json"));
  const auto& r = main_corpus().population.report;
  double share = static_cast<double>(r.duplicates_referenced) / static_cast<double>(r.elements_seen);
  bool ok = r.instances_created + r.duplicates_referenced == r.elements_seen &&
            r.instances_created == expected["unique_fingerprints"].get<std::size_t>() &&
            r.elements_seen == expected["elements_seen"].get<std::size_t>() &&
            std::abs(share - kDuplicateShareTarget) <= kDuplicateShareTol;
  return {ok, "seen " + std::to_string(r.elements_seen) + ", created " + std::to_string(r.instances_created) +
                  " (hand count " + std::to_string(expected["unique_fingerprints"].get<std::size_t>()) +
                  "), duplicates " + std::to_string(r.duplicates_referenced) + ", share " + fmt(share)};
}

// ---- 4, 5

// Random disjoint same-class cliques over the individuals of `g`.
std::vector<refine::Clique> random_plan(const OntologyGraph& g, std::mt19937& rng) {
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [ind, cls] : g.instances) by_class[cls].push_back(ind);
  std::vector<refine::Clique> plan;
  for (auto& [cls, inds] : by_class) {
    std::shuffle(inds.begin(), inds.end(), rng);
    std::size_t pos = 0;
    while (pos + 2 <= inds.size() && std::bernoulli_distribution(0.5)(rng)) {
      std::size_t size = std::min<std::size_t>(inds.size() - pos, 2 + rng() % 4);
      std::set<std::string> members(inds.begin() + pos, inds.begin() + pos + size);
      pos += size;
      plan.push_back({members, refine::select_representative(members, g)});
    }
  }
  return plan;
}

Verdict merge_bookkeeping() {
  const auto& g = main_corpus().population.ontology;
  std::mt19937 rng(26);
  int bad = 0;
  for (int run = 0; run < 50; ++run) {
    auto plan = random_plan(g, rng);
    std::size_t drop = 0;
    for (const auto& c : plan) drop += c.members.size() - 1;
    refine::MergeLog log;
    auto merged = refine::apply_merges(g, plan, log);
    if (g.instances.size() - merged.instances.size() != drop) ++bad;
  }

  // stub-oracle pipeline on the corpus engineered for about a quarter reduction
  auto stub = refine::StubOracle::from_json(json::parse(read_fixture("corpus/stub_oracle.json")));
  auto pairs = refine::enumerate_candidates(g, {});
  auto judgments = refine::judge_all(stub, pairs, g, 4, {1, 0.0, {}});
  auto resolved = refine::resolve_overlaps(refine::maximal_cliques(refine::build_merge_graph(judgments)));
  std::vector<refine::Clique> plan;
  std::size_t drop = 0;
  for (const auto& c : resolved.cliques) {
    plan.push_back({c, refine::select_representative(c, g)});
    drop += c.size() - 1;
  }
  refine::MergeLog log;
  auto merged = refine::apply_merges(g, plan, log);
  double ratio = refine::reduction_ratio(g, merged);
  bool ok = bad == 0 && g.instances.size() - merged.instances.size() == drop &&
            std::abs(ratio - kReductionTarget) <= kReductionTol;
  return {ok, "50 random plans, " + std::to_string(bad) + " miscounts; stub pipeline " +
                  std::to_string(plan.size()) + " cliques retire " + std::to_string(drop) + " of " +
                  std::to_string(g.instances.size()) + ", ratio " + fmt(ratio)};
}

Verdict reversibility() {
  std::mt19937 rng(5);
  int runs = 0, bad = 0;
  std::size_t merged_total = 0;
  for (const Corpus* c : {&main_corpus(), &cve_corpus()}) {
    const auto& g = c->population.ontology;
    for (int k = 0; k < kMergePlans; ++k, ++runs) {
      auto plan = random_plan(g, rng);
      refine::MergeLog log;
      auto back = refine::apply_merges(g, plan, log);
      merged_total += plan.size();
      // newest first: a later clique may rewrite assertions an earlier one produced
      for (std::size_t i = log.entries.size(); i-- > 0;) back = refine::revert(back, log, i);
      if (!rdfio::equal(back, g)) ++bad;
    }
  }
  return {bad == 0, std::to_string(runs) + " plans over two fixtures (" + std::to_string(merged_total) +
                        " cliques), " + std::to_string(bad) + " not restored"};
}

// ---- 6

OntologyGraph random_ontology(std::mt19937& rng) {
  const std::vector<std::string> names = {"A", "Risk", "x.y", "a-b", "u_v", "caf%C3%A9", "Z9", "t~x"};
  const std::vector<std::string> texts = {"",        "plain",  "q \" b \\ s", "two\nlines", "tab\there",
                                          "<a> & b", "caf\xC3\xA9", "'s'",       "\"\"\"x\"\"\""};
  auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const std::vector<LiteralType> types = {LiteralType::Boolean, LiteralType::String, LiteralType::AnyUri};

  OntologyGraph g;
  g.base_iri = chance(0.5) ? kBase : "http://example.org/other/";
  std::vector<std::string> classes, ops, dps, inds;
  for (const auto& n : names) {
    if (chance(0.5)) g.classes.insert(classes.emplace_back(g.vocabulary_iri("C" + n)));
  }
  if (classes.empty()) g.classes.insert(classes.emplace_back(g.vocabulary_iri("Thing")));
  for (const auto& c : classes) {
    if (chance(0.25)) g.subclass_axioms.emplace(c, pick(classes));
  }
  for (const auto& n : names) {
    if (chance(0.4)) {
      auto& d = g.object_properties[ops.emplace_back(g.vocabulary_iri("o" + n))];
      if (chance(0.7)) d.domains.insert(pick(classes));
      if (chance(0.7)) d.ranges.insert(pick(classes));
    }
    if (chance(0.4)) {
      auto& d = g.data_properties[dps.emplace_back(g.vocabulary_iri("d" + n))];
      if (chance(0.7)) d.domains.insert(pick(classes));
      d.ranges.insert(pick(types));
    }
  }
  int n = std::uniform_int_distribution<int>(0, 10)(rng);
  for (int k = 0; k < n; ++k) g.instances[inds.emplace_back(g.vocabulary_iri("i" + std::to_string(k)))] = pick(classes);
  if (!inds.empty()) {
    for (int k = 0; k < 10; ++k) {
      if (!ops.empty()) g.object_assertions.insert({pick(inds), pick(ops), pick(inds)});
      if (!dps.empty()) {
        auto t = pick(types);
        std::string lex = t == LiteralType::Boolean ? (chance(0.5) ? "true" : "false")
                          : t == LiteralType::AnyUri ? "http://example.org/d?a=1&b=2"
                                                     : pick(texts);
        g.data_assertions.insert({pick(inds), pick(dps), {lex, t}});
      }
    }
    if (chance(0.4)) g.merged_into[g.vocabulary_iri("gone" + std::to_string(rng() % 100))] = pick(inds);
  }
  return g;
}

Verdict round_trip() {
  std::vector<std::pair<std::string, OntologyGraph>> cases = {
      {"classes", main_corpus().classes},
      {"corpus", main_corpus().population.ontology},
      {"cve classes", cve_corpus().classes},
      {"cve corpus", cve_corpus().population.ontology},
  };
  {
    // a merged ontology exercises mergedInto
    const auto& g = main_corpus().population.ontology;
    std::mt19937 rng(8);
    refine::MergeLog log;
    cases.emplace_back("merged corpus", refine::apply_merges(g, random_plan(g, rng), log));
  }
  std::mt19937 rng(6);
  for (int k = 0; k < kRandomOntologies; ++k) cases.emplace_back("random " + std::to_string(k), random_ontology(rng));

  std::vector<std::string> failures;
  for (const auto& [name, g] : cases) {
    for (auto f : {rdfio::Format::Turtle, rdfio::Format::RdfXml}) {
      bool ok = false;
      try {
        ok = rdfio::equal(rdfio::parse(rdfio::serialize(g, f), f), g);
      } catch (const std::exception&) {
      }
      if (!ok) failures.push_back(name + " (" + rdfio::to_string(f) + ")");
    }
  }
  std::string detail = std::to_string(cases.size()) + " ontologies x 2 formats, " +
                       std::to_string(failures.size()) + " failures";
  if (!failures.empty()) detail += ": " + failures.front();
  return {failures.empty(), detail};
}

// ---- 7

Verdict rule_enforcement() {
  const std::pair<const char*, schema::Rule> cases[] = {
      {"schema/rule1_nameless_type.xsd", schema::Rule::NamelessType},
      {"schema/rule2_unnamed_choice.xsd", schema::Rule::UnnamedChoice},
      {"schema/rule3_root_not_list.xsd", schema::Rule::RootNotList},
  };
  Verdict v;
  for (const auto& [file, rule] : cases) {
    auto model = schema::parse_schema(read_fixture(file));
    auto violations = schema::validate_authoring_rules(model);
    bool rejected = false;
    try {
      classgen::generate_schema_ontology(model, kBase);
    } catch (const classgen::AuthoringRuleError&) {
      rejected = true;
    }
    bool ok = violations.size() == 1 && violations[0].rule == rule && rejected;
    v.pass &= ok;
    v.detail += fs::path(file).stem().string() + " -> ";
    for (const auto& x : violations) v.detail += std::string(schema::to_string(x.rule)) + " ";
    v.detail += "; ";
  }
  auto clean = schema::validate_authoring_rules(schema::parse_schema(read_fixture("schema/requirements.xsd")));
  v.pass &= clean.empty();
  v.detail += "clean schema -> " + std::to_string(clean.size()) + " violations";
  return v;
}

// ---- 8

// Dense column-stochastic matrix with uniform columns for dangling nodes,
// iterated far past the library's tolerance.
std::vector<double> dense_pagerank(std::size_t n, const std::set<std::pair<std::size_t, std::size_t>>& edges, double d) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  std::vector<std::size_t> outdeg(n, 0);
  for (auto [u, v] : edges) ++outdeg[u];
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) m[v][u] = outdeg[u] == 0 ? 1.0 / n : 0.0;
  }
  for (auto [u, v] : edges) m[v][u] += 1.0 / outdeg[u];
  std::vector<double> r(n, 1.0 / n), next(n);
  for (int it = 0; it < 5000; ++it) {
    for (std::size_t v = 0; v < n; ++v) {
      double s = 0.0;
      for (std::size_t u = 0; u < n; ++u) s += m[v][u] * r[u];
      next[v] = (1.0 - d) / n + d * s;
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff += std::abs(next[k] - r[k]);
    r.swap(next);
    if (diff < 1e-15) break;
  }
  return r;
}

Verdict pagerank() {
  std::mt19937 rng(85);
  double worst = 0.0, worst_sum = 0.0;
  for (int run = 0; run < kPageRankGraphs; ++run) {
    std::size_t n = std::uniform_int_distribution<std::size_t>(1, kPageRankMaxNodes)(rng);
    double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    std::set<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (std::bernoulli_distribution(density)(rng)) es.emplace(u, v);
      }
    }
    auto got = vault::pagerank(n, {es.begin(), es.end()}, {});
    auto want = dense_pagerank(n, es, 0.85);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max(worst, std::abs(got[k] - want[k]));
      sum += got[k];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  double cycle_dev = 0.0;
  for (std::size_t n : {2, 3, 7, 30}) {
    std::vector<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t k = 0; k < n; ++k) es.emplace_back(k, (k + 1) % n);
    for (double s : vault::pagerank(n, es, {})) cycle_dev = std::max(cycle_dev, std::abs(s - 1.0 / n));
  }
  bool ok = worst <= kPageRankTol && worst_sum <= kPageRankSumTol && cycle_dev <= kPageRankTol;
  std::ostringstream d;
  d << kPageRankGraphs << " graphs, max deviation " << worst << ", max |sum-1| " << worst_sum
    << ", cycle deviation " << cycle_dev;
  return {ok, d.str()};
}

// ---- 9

// Drops whitespace outside JSON strings.
std::string squeeze(const std::string& s) {
  std::string out;
  bool in_string = false, escaped = false;
  for (char c : s) {
    if (in_string) {
      out += c;
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
      out += c;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      out += c;
    }
  }
  return out;
}

Verdict prompt_conformance() {
  const std::string figure = R"({
  "messages": [
    {"role": "system", "content": "You only answer with true or false."},
    {"role": "user", "content": "Can I merge instances \"decommissioning procedure\" and \"issue addressing plan\"?"}
  ]
})";
  httplib::Server server;
  std::mutex mu;
  std::string body, content_type;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    body = req.body;
    content_type = req.get_header_value("Content-Type");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"true"}}]})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) return {false, "mock server could not bind"};
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  refine::HttpOracle oracle({"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "", "", 5.0});
  auto pair = refine::make_candidate(std::string(kBase) + "#a", std::string(kBase) + "#b", "k");
  auto j = refine::judge_pair(oracle, pair, "decommissioning procedure", "issue addressing plan", {0, 0.0, {}});
  server.stop();
  listener.join();

  std::lock_guard lock(mu);
  bool ok = j.valid && j.mergeable && squeeze(body) == squeeze(figure) &&
            content_type.starts_with("application/json");
  return {ok, "received " + body};
}

// ---- 10

Verdict end_to_end() {
  ScratchDir dir("acceptance-e2e");
  auto f = [](const std::string& rel) { return fixture(rel).generic_string(); };
  auto config = dir.path() / "pipeline.toml";
  write_file(config, "schema_path = \"" + f("schema/requirements.xsd") + "\"\n" +
                         "xml_path = \"" + f("corpus/corpus.xml") + "\"\n" +
                         "output_dir = \"out\"\n"
                         "[oracle]\nkind = \"stub\"\nstub_table = \"" + f("corpus/stub_oracle.json") + "\"\n" +
                         "retries = 1\nbackoff_seconds = 0\nprice_per_call = 0.000035\n" +
                         "[eval]\nground_truth = \"" + f("corpus/ground_truth.json") + "\"\n");
  const std::vector<std::vector<std::string>> steps = {
      {"build", "all"},      {"refine", "candidates"}, {"refine", "judge"},  {"refine", "cliques"},
      {"refine", "review-export", "--approve-all"},   {"refine", "apply"}, {"eval", "pairwise"},
  };
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);

  std::vector<std::map<std::string, std::string>> snapshots;
  std::vector<double> times;
  std::string failure;
  for (int round = 0; round < 2 && failure.empty(); ++round) {
    fs::remove_all(dir.path() / "out");
    auto t0 = std::chrono::steady_clock::now();
    for (auto args : steps) {
      args.insert(args.begin(), {"--config", config.string()});
      std::ostringstream out, err;
      if (cli::run(args, out, err) != cli::kExitOk) {
        failure = args[2] + " " + args[3] + ": " + err.str();
        break;
      }
    }
    times.push_back(seconds_since(t0));
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir.path() / "out")) {
      if (!e.is_regular_file() || e.path().filename() == "build_timing.json") continue;
      files[fs::relative(e.path(), dir.path()).generic_string()] = slurp(e.path());
    }
    snapshots.push_back(std::move(files));
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
  if (!failure.empty()) return {false, failure};

  std::size_t differing = 0;
  for (const auto& [name, bytes] : snapshots[0]) {
    auto it = snapshots[1].find(name);
    if (it == snapshots[1].end() || it->second != bytes) ++differing;
  }
  differing += snapshots[1].size() > snapshots[0].size() ? snapshots[1].size() - snapshots[0].size() : 0;
  double slowest = std::max(times[0], times[1]);
  return {differing == 0 && slowest < kEndToEndLimit,
          std::to_string(snapshots[0].size()) + " artifacts, " + std::to_string(differing) +
              " differ between runs; slowest run " + fmt(slowest, 3) + " s"};
}

// ---- 11

Verdict extensibility() {
  auto expected = json::parse(read_fixture("corpus/expected_refine.json"))["cve_assertions"];
  const std::string rdf_type = std::string(rdfio::vocab::kRdf) + "type";
  const std::string owl_dp = std::string(rdfio::vocab::kOwl) + "DatatypeProperty";

  auto query = [&](const OntologyGraph& g) {
    auto triples = rdfio::read_turtle(rdfio::serialize(g, rdfio::Format::Turtle));
    std::string prop;
    for (const auto& t : triples) {
      if (t.predicate == rdf_type && t.object.value == owl_dp && local_part(t.subject.value) == "invalidating_cve") {
        prop = t.subject.value;
      }
    }
    std::map<std::string, std::set<std::string>> found;
    for (const auto& t : triples) {
      if (!prop.empty() && t.predicate == prop && t.object.kind == rdfio::Term::Kind::Literal) {
        found[local_part(t.subject.value)].insert(t.object.value);
      }
    }
    return std::make_pair(prop, found);
  };

  auto [before_prop, before] = query(main_corpus().population.ontology);
  auto [prop, found] = query(cve_corpus().population.ontology);
  std::map<std::string, std::set<std::string>> want;
  for (const auto& [req, cves] : expected.items()) want[req] = cves.get<std::set<std::string>>();
  std::size_t n = 0;
  for (const auto& [req, cves] : found) n += cves.size();
  bool ok = before_prop.empty() && !prop.empty() && found == want;
  return {ok, (prop.empty() ? std::string("no invalidating_cve property") : "property " + prop) + ", " +
                  std::to_string(n) + " assertions on " + std::to_string(found.size()) + " requirements"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"f-score arithmetic", f_scores},
      {"clique oracle equivalence", cliques},
      {"dedup counting", dedup_counts},
      {"merge bookkeeping", merge_bookkeeping},
      {"reversibility", reversibility},
      {"round trip", round_trip},
      {"rule enforcement", rule_enforcement},
      {"pagerank", pagerank},
      {"prompt conformance", prompt_conformance},
      {"end to end", end_to_end},
      {"extensibility", extensibility},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << criteria[k].first << ": " << v.detail
              << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
