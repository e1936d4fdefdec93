#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include "ontobuild/refine.hpp"

using namespace ontobuild;
using namespace ontobuild::refine;
using nlohmann::json;

namespace {

constexpr const char* kBase = "http://example.org/iomt";

std::string iri(const std::string& local) { return std::string(kBase) + "#" + local; }

// Graph with one class per name in `classes`, a `name` data property and a
// `rel` object property.
OntologyGraph scaffold(const std::vector<std::string>& classes = {"Concept"}) {
  OntologyGraph g;
  g.base_iri = kBase;
  for (const auto& c : classes) g.classes.insert(iri(c));
  g.data_properties[iri("name")].ranges.insert(LiteralType::String);
  g.object_properties[iri("rel")];
  return g;
}

std::string add(OntologyGraph& g, const std::string& local, const std::string& name,
                const std::string& cls = "Concept") {
  g.instances[iri(local)] = iri(cls);
  g.data_assertions.insert({iri(local), iri("name"), {name, LiteralType::String}});
  return iri(local);
}

void link(OntologyGraph& g, const std::string& s, const std::string& o) {
  g.object_assertions.insert({s, iri("rel"), o});
}

Judgment verdict(const std::string& a, const std::string& b, bool yes, bool valid = true) {
  Judgment j;
  j.pair = make_candidate(a, b, "test");
  j.mergeable = yes;
  j.valid = valid;
  j.raw_response = yes ? "true" : "false";
  return j;
}

// Brute force: every vertex subset that is complete and cannot be extended.
std::vector<std::set<std::string>> brute_force_cliques(const MergeGraph& g) {
  std::vector<std::string> v(g.vertices.begin(), g.vertices.end());
  auto adjacent = [&](const std::string& a, const std::string& b) {
    return g.edges.contains(a < b ? IriPair{a, b} : IriPair{b, a});
  };
  std::size_t n = v.size();
  std::vector<bool> complete(std::size_t{1} << n, false);
  for (std::size_t mask = 0; mask < complete.size(); ++mask) {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      for (std::size_t j = i + 1; j < n && ok; ++j) {
        if ((mask >> j & 1) && !adjacent(v[i], v[j])) ok = false;
      }
    }
    complete[mask] = ok;
  }
  std::vector<std::set<std::string>> out;
  for (std::size_t mask = 0; mask < complete.size(); ++mask) {
    if (!complete[mask] || std::popcount(mask) < 2) continue;
    bool maximal = true;
    for (std::size_t i = 0; i < n && maximal; ++i) {
      if (!(mask >> i & 1) && complete[mask | (std::size_t{1} << i)]) maximal = false;
    }
    if (!maximal) continue;
    std::set<std::string> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) members.insert(v[i]);
    }
    out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MergeGraph random_graph(std::mt19937& rng, std::size_t max_vertices) {
  MergeGraph g;
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_vertices)(rng);
  double density = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
  for (std::size_t i = 0; i < n; ++i) g.vertices.insert("v" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::bernoulli_distribution(density)(rng)) {
        g.edges.insert(canonical_pair("v" + std::to_string(i), "v" + std::to_string(j)));
      }
    }
  }
  return g;
}

class FlakyOracle : public Oracle {
 public:
  explicit FlakyOracle(int failures) : failures_(failures) {}
  OracleReply ask(std::string_view, std::string_view) override {
    if (calls_++ < failures_) throw OracleUnavailable("connection refused");
    return {"TRUE", 1.5};
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  int calls_ = 0;
};

}  // namespace

TEST_CASE("candidate pairs") {
  SUBCASE("class-only blocking gives all pairs within a class") {
    auto g = scaffold({"Concept", "Actor"});
    add(g, "a", "alpha");
    add(g, "b", "beta");
    add(g, "c", "gamma");
    add(g, "m", "manufacturer", "Actor");
    auto pairs = enumerate_candidates(g, {});
    CHECK(pairs.size() == 3);
    for (const auto& p : pairs) {
      CHECK(p.a < p.b);
      CHECK(p.block_key == "class=Concept");
    }
  }
  SUBCASE("token overlap keeps device variants") {
    auto g = scaffold();
    add(g, "device", "device");
    add(g, "medical_device", "medical device");
    add(g, "IoT_device", "IoT device");
    BlockingConfig b;
    b.token_overlap = 1;
    auto pairs = enumerate_candidates(g, b);
    CHECK(pairs.size() == 3);
    CHECK(pairs.front().block_key == "class=Concept;shared=device");
  }
  SUBCASE("token overlap drops disjoint names") {
    auto g = scaffold();
    add(g, "manufacturer", "manufacturer");
    add(g, "benefit", "benefit");
    BlockingConfig b;
    b.token_overlap = 1;
    CHECK(enumerate_candidates(g, b).empty());
    CHECK(enumerate_candidates(g, {}).size() == 1);
  }
  SUBCASE("skipped classes") {
    auto g = scaffold();
    add(g, "a", "x");
    add(g, "b", "y");
    BlockingConfig b;
    b.skip_classes = {"Concept"};
    CHECK(enumerate_candidates(g, b).empty());
  }
  CHECK_THROWS_AS(make_candidate("x", "x", ""), ValidationError);
  CHECK(name_tokens("IoT-Device (v2)") == std::set<std::string>{"iot", "device", "v2"});
}

TEST_CASE("prompt and verdict parsing") {
  CHECK(user_prompt("decommissioning procedure", "issue addressing plan") ==
        "Can I merge instances \"decommissioning procedure\" and \"issue addressing plan\"?");
  auto body = request_body("a", "b");
  CHECK(body.dump() ==
        R"({"messages":[{"role":"system","content":"You only answer with true or false."},)"
        R"({"role":"user","content":"Can I merge instances \"a\" and \"b\"?"}]})");
  CHECK_FALSE(body.contains("model"));
  CHECK(request_body("a", "b", "llama3")["model"] == "llama3");

  CHECK(parse_verdict("False.") == false);
  CHECK(parse_verdict("  TRUE!\n") == true);
  CHECK(parse_verdict("true") == true);
  CHECK_FALSE(parse_verdict("yes").has_value());
  CHECK_FALSE(parse_verdict("true, they are the same").has_value());
  CHECK_FALSE(parse_verdict("").has_value());

  CHECK(extract_answer(R"({"choices":[{"message":{"role":"assistant","content":"False."}}]})") == "False.");
  CHECK(extract_answer(R"({"completion_message":{"content":{"type":"text","text":"true"}}})") == "true");
  CHECK(extract_answer("true") == "true");
}

TEST_CASE("judging") {
  std::map<IriPair, std::string> table{{{"device", "medical device"}, "True"}};
  StubOracle stub(table, "false", 2.0);
  auto pair = make_candidate(iri("a"), iri("b"), "k");

  auto j = judge_pair(stub, pair, "medical device", "device");
  CHECK(j.valid);
  CHECK(j.mergeable);
  CHECK(j.latency == 2.0);

  auto n = judge_pair(stub, pair, "device", "benefit");
  CHECK(n.valid);
  CHECK_FALSE(n.mergeable);

  StubOracle odd({{{"x", "y"}, "maybe"}}, "false", 0);
  auto bad = judge_pair(odd, pair, "x", "y");
  CHECK_FALSE(bad.valid);
  CHECK(bad.raw_response == "maybe");

  RetryPolicy fast{2, 0.0, 0.5};
  FlakyOracle recovers(2);
  auto r = judge_pair(recovers, pair, "x", "y", fast);
  CHECK(recovers.calls() == 3);
  CHECK(r.valid);
  CHECK(r.mergeable);
  CHECK(r.cost_estimate == 0.5);

  FlakyOracle down(3);
  auto d = judge_pair(down, pair, "x", "y", fast);
  CHECK(down.calls() == 3);
  CHECK_FALSE(d.valid);
  CHECK(d.error.find("connection refused") != std::string::npos);

  auto back = judgment_from_json(to_json(j));
  CHECK(back.pair == j.pair);
  CHECK(back.mergeable == j.mergeable);
  CHECK(back.latency == j.latency);
}

TEST_CASE("judge_all keeps input order under parallelism") {
  auto g = scaffold();
  std::vector<std::string> ids;
  for (int k = 0; k < 12; ++k) ids.push_back(add(g, "n" + std::to_string(k), "name " + std::to_string(k)));
  auto pairs = enumerate_candidates(g, {});
  StubOracle stub({{{"name 1", "name 2"}, "true"}}, "false", 0.1);
  auto serial = judge_all(stub, pairs, g, 1);
  auto parallel = judge_all(stub, pairs, g, 8);
  REQUIRE(serial.size() == pairs.size());
  CHECK(stub.calls() == 2 * pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(to_json(serial[k]) == to_json(parallel[k]));
    CHECK(serial[k].pair == pairs[k]);
  }
}

TEST_CASE("merge graph") {
  std::string A = "A", B = "B", C = "C";
  auto g = build_merge_graph({verdict(A, B, true), verdict(B, C, true), verdict(A, C, false)});
  CHECK(g.vertices == std::set<std::string>{"A", "B", "C"});
  CHECK(g.edges == std::set<IriPair>{{"A", "B"}, {"B", "C"}});

  CHECK(build_merge_graph({verdict(A, B, false), verdict(B, C, false)}).edges.empty());

  // conflicting duplicates: no edge; invalid judgments ignored
  CHECK(build_merge_graph({verdict(A, B, true), verdict(B, A, false)}).edges.empty());
  CHECK(build_merge_graph({verdict(A, B, true), verdict(A, B, false, false)}).edges.size() == 1);

  std::vector<Judgment> js;
  std::mt19937 rng(7);
  for (int k = 0; k < 40; ++k) {
    js.push_back(verdict("v" + std::to_string(k % 7), "w" + std::to_string(k % 5),
                         std::bernoulli_distribution(0.6)(rng)));
  }
  auto reference = build_merge_graph(js);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(js.begin(), js.end(), rng);
    auto again = build_merge_graph(js);
    CHECK(again.edges == reference.edges);
    CHECK(again.vertices == reference.vertices);
  }
}

TEST_CASE("maximal cliques") {
  MergeGraph triangle{{"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"A", "C"}}};
  CHECK(maximal_cliques(triangle) == std::vector<std::set<std::string>>{{"A", "B", "C"}});

  MergeGraph path{{"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}};
  CHECK(maximal_cliques(path) == std::vector<std::set<std::string>>{{"A", "B"}, {"B", "C"}});

  MergeGraph isolated{{"A", "B"}, {}};
  CHECK(maximal_cliques(isolated).empty());

  std::mt19937 rng(42);
  for (int run = 0; run < 200; ++run) {
    auto g = random_graph(rng, 12);
    auto got = maximal_cliques(g);
    for (std::size_t k = 1; k < got.size(); ++k) {
      CHECK((got[k - 1].size() > got[k].size() ||
             (got[k - 1].size() == got[k].size() && got[k - 1] < got[k])));
    }
    std::sort(got.begin(), got.end());
    CHECK(got == brute_force_cliques(g));
  }
}

TEST_CASE("overlap resolution keeps the larger clique") {
  auto r = resolve_overlaps({{"A", "B", "C"}, {"C", "D"}, {"D", "E"}});
  CHECK(r.cliques == std::vector<std::set<std::string>>{{"A", "B", "C"}, {"D", "E"}});
  CHECK(r.dropped.at("C").size() == 1);
}

TEST_CASE("representative") {
  auto g = scaffold();
  auto device = add(g, "device", "device");
  auto iot = add(g, "IoT_device", "IoT device");
  auto medical = add(g, "medical_device", "medical device");
  std::vector<std::string> others;
  for (int k = 0; k < 6; ++k) others.push_back(add(g, "o" + std::to_string(k), "other"));
  for (int k = 0; k < 6; ++k) link(g, others[k], device);
  link(g, iot, others[0]);
  REQUIRE(assertion_degree(g, device) == 7);
  REQUIRE(assertion_degree(g, iot) == 2);
  CHECK(select_representative({device, iot}, g) == device);

  auto h = scaffold();
  auto d2 = add(h, "device", "device");
  auto m2 = add(h, "medical_device", "medical device");
  CHECK(select_representative({d2, m2}, h) == d2);
  (void)medical;

  CHECK_THROWS_AS(select_representative({d2}, h), ValidationError);
  CHECK_THROWS_AS(select_representative({d2, iri("ghost")}, h), ValidationError);
}

TEST_CASE("apply merges") {
  auto g = scaffold();
  auto A = add(g, "A", "a");
  auto B = add(g, "B", "b");
  auto Q = add(g, "Q", "q");
  link(g, Q, B);
  link(g, Q, A);

  MergeLog log;
  auto merged = apply_merges(g, {{{A, B}, A}}, log);
  CHECK(merged.instances.size() == g.instances.size() - 1);
  CHECK(merged.object_assertions.contains({Q, iri("rel"), A}));
  CHECK_FALSE(merged.object_assertions.contains({Q, iri("rel"), B}));
  CHECK(merged.object_assertions.size() == 1);  // collapsed duplicate
  CHECK(merged.merged_into.at(B) == A);
  CHECK(check_invariants(merged).empty());
  // B's name moved to A
  CHECK(merged.data_assertions.contains({A, iri("name"), {"b", LiteralType::String}}));
  REQUIRE(log.entries.size() == 1);
  CHECK(log.entries[0].retired.at(B) == iri("Concept"));
  CHECK(log.entries[0].object_added.empty());

  SUBCASE("k members drop k-1") {
    auto h = scaffold();
    std::set<std::string> members;
    for (int k = 0; k < 5; ++k) members.insert(add(h, "m" + std::to_string(k), "m"));
    add(h, "keep", "keep");
    MergeLog l;
    auto out = apply_merges(h, {{members, *members.begin()}}, l);
    CHECK(out.instances.size() == 2);
  }
  SUBCASE("errors") {
    MergeLog l;
    CHECK_THROWS_WITH_AS(apply_merges(g, {{{A, B}, A}, {{B, Q}, Q}}, l), doctest::Contains("overlapping"),
                         ValidationError);
    CHECK_THROWS_AS(apply_merges(g, {{{A, B}, Q}}, l), ValidationError);
    CHECK_THROWS_AS(apply_merges(g, {{{A, iri("nobody")}, A}}, l), ValidationError);
    CHECK(l.entries.empty());
  }
}

TEST_CASE("revert") {
  auto g = scaffold();
  auto A = add(g, "A", "a");
  auto B = add(g, "B", "b");
  auto C = add(g, "C", "c");
  auto D = add(g, "D", "d");
  auto Q = add(g, "Q", "q");
  link(g, Q, B);
  link(g, D, Q);
  g.fingerprint_index["fpB"] = B;

  SUBCASE("single round trip") {
    MergeLog log;
    auto merged = apply_merges(g, {{{A, B}, A}}, log);
    CHECK(merged.fingerprint_index.at("fpB") == A);
    auto back = revert(merged, log, 0);
    CHECK(same_graph(back, g));
    CHECK(back.fingerprint_index == g.fingerprint_index);
    CHECK(log.entries[0].reverted);
    CHECK_THROWS_AS(revert(back, log, 0), ValidationError);
  }
  SUBCASE("bad index") {
    MergeLog log;
    auto merged = apply_merges(g, {{{A, B}, A}}, log);
    CHECK_THROWS_WITH_AS(revert(merged, log, 3), doctest::Contains("no merge journal entry 3"),
                         ValidationError);
  }
  SUBCASE("independent cliques") {
    MergeLog log;
    auto merged = apply_merges(g, {{{A, B}, A}, {{C, D}, C}}, log);
    auto partial = revert(merged, log, 0);
    CHECK(partial.instances.contains(B));
    CHECK_FALSE(partial.instances.contains(D));
    CHECK(partial.merged_into.at(D) == C);
    CHECK(partial.object_assertions.contains({C, iri("rel"), Q}));
    auto full = revert(partial, log, 1);
    CHECK(same_graph(full, g));
  }
  SUBCASE("dependent entry blocks revert") {
    MergeLog log;
    auto once = apply_merges(g, {{{A, B}, A}}, log);
    auto twice = apply_merges(once, {{{A, C}, C}}, log);
    CHECK_THROWS_WITH_AS(revert(twice, log, 0), doctest::Contains("revert entry 1 first"), ValidationError);
    auto back = revert(revert(twice, log, 1), log, 0);
    CHECK(same_graph(back, g));
  }
  SUBCASE("journal survives JSON") {
    MergeLog log;
    auto merged = apply_merges(g, {{{A, B}, A}, {{C, D}, D}}, log);
    auto reloaded = merge_log_from_json(json::parse(to_json(log).dump()));
    CHECK(to_json(reloaded) == to_json(log));
    auto back = revert(revert(merged, reloaded, 1), reloaded, 0);
    CHECK(same_graph(back, g));
  }
}

TEST_CASE("merge substitution property on random plans") {
  std::mt19937 rng(99);
  for (int run = 0; run < 100; ++run) {
    auto g = scaffold();
    int n = std::uniform_int_distribution<int>(4, 16)(rng);
    std::vector<std::string> ids;
    for (int k = 0; k < n; ++k) ids.push_back(add(g, "i" + std::to_string(k), "n" + std::to_string(k % 3)));
    for (int k = 0; k < 2 * n; ++k) {
      link(g, ids[rng() % ids.size()], ids[rng() % ids.size()]);
    }
    auto shuffled = ids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<Clique> plan;
    std::size_t pos = 0;
    std::size_t expected_drop = 0;
    while (pos + 2 <= shuffled.size() && std::bernoulli_distribution(0.7)(rng)) {
      std::size_t size = std::min<std::size_t>(shuffled.size() - pos, 2 + rng() % 3);
      std::set<std::string> members(shuffled.begin() + pos, shuffled.begin() + pos + size);
      pos += size;
      plan.push_back({members, select_representative(members, g)});
      expected_drop += size - 1;
    }

    MergeLog log;
    auto merged = apply_merges(g, plan, log);
    CHECK(g.instances.size() - merged.instances.size() == expected_drop);
    CHECK(check_invariants(merged).empty());

    std::map<std::string, std::string> sub;
    for (const auto& c : plan) {
      for (const auto& m : c.members) sub[m] = c.representative;
    }
    auto s = [&](const std::string& x) { return sub.contains(x) ? sub[x] : x; };
    std::set<ObjectAssertion> expected;
    for (const auto& a : g.object_assertions) expected.insert({s(a.subject), a.property, s(a.object)});
    CHECK(merged.object_assertions == expected);
    std::set<DataAssertion> expected_data;
    for (const auto& a : g.data_assertions) expected_data.insert({s(a.subject), a.property, a.value});
    CHECK(merged.data_assertions == expected_data);

    auto back = merged;
    for (std::size_t k = log.entries.size(); k-- > 0;) back = revert(back, log, k);
    CHECK(same_graph(back, g));
  }
}

TEST_CASE("review file") {
  auto g = scaffold();
  auto A = add(g, "A", "alpha");
  auto B = add(g, "B", "beta");
  std::vector<ReviewEntry> entries{{{A, B}, A, false, "check"}};
  auto j = review_to_json(entries, g);
  CHECK(j[0]["labels"] == json::array({"alpha", "beta"}));
  auto back = review_from_json(j);
  REQUIRE(back.size() == 1);
  CHECK(back[0].members == entries[0].members);
  CHECK_FALSE(back[0].approved);
  CHECK_THROWS_AS(review_from_json(json::object()), ParseError);
}

TEST_CASE("journal timestamp honours SOURCE_DATE_EPOCH") {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(journal_timestamp() == "2023-11-14T22:13:20Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(journal_timestamp().size() == 20);
}

TEST_CASE("http oracle against a mock server") {
  httplib::Server server;
  std::mutex mu;
  std::vector<std::string> bodies;
  std::vector<std::string> auth;
  int failures_left = 0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    bodies.push_back(req.body);
    auth.push_back(req.get_header_value("Authorization"));
    if (failures_left > 0) {
      --failures_left;
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"index":0,"message":{"role":"assistant","content":"False."}}]})",
                    "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("ONTOBUILD_TEST_KEY", "sekret", 1);
  HttpOracle oracle({"http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "",
                     "ONTOBUILD_TEST_KEY", 5.0});
  auto pair = make_candidate(iri("x"), iri("y"), "k");
  auto j = judge_pair(oracle, pair, "decommissioning procedure", "issue addressing plan");
  CHECK(j.valid);
  CHECK_FALSE(j.mergeable);
  CHECK(j.raw_response == "False.");
  CHECK(j.latency > 0.0);
  {
    std::lock_guard lock(mu);
    REQUIRE(bodies.size() == 1);
    auto expected = json::parse(R"({"messages":[
      {"role":"system","content":"You only answer with true or false."},
      {"role":"user","content":"Can I merge instances \"decommissioning procedure\" and \"issue addressing plan\"?"}]})");
    CHECK(json::parse(bodies[0]) == expected);
    CHECK(auth[0] == "Bearer sekret");
    failures_left = 1;
  }
  auto retried = judge_pair(oracle, pair, "a", "b", {2, 0.0, {}});
  CHECK(retried.valid);
  {
    std::lock_guard lock(mu);
    CHECK(bodies.size() == 3);
    failures_left = 5;
  }
  auto failed = judge_pair(oracle, pair, "a", "b", {2, 0.0, {}});
  CHECK_FALSE(failed.valid);
  CHECK(failed.error.find("503") != std::string::npos);

  server.stop();
  listener.join();

  unsetenv("ONTOBUILD_MISSING_KEY");
  CHECK_THROWS_AS(HttpOracle({"http://127.0.0.1:1/x", "", "ONTOBUILD_MISSING_KEY", 1.0}), Error);
  CHECK_THROWS_AS(HttpOracle({"ftp://host/x", "", "", 1.0}), Error);

  HttpOracle unreachable({"http://127.0.0.1:1/none", "", "", 0.5});
  auto down = judge_pair(unreachable, pair, "a", "b", {1, 0.0, {}});
  CHECK_FALSE(down.valid);
}
