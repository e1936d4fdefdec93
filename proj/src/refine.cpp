#include "ontobuild/refine.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <ctime>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace ontobuild::refine {

using nlohmann::json;

IriPair canonical_pair(std::string a, std::string b) {
  if (a == b) throw ValidationError("a pair needs two distinct instances, got <" + a + "> twice");
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

CandidatePair make_candidate(std::string a, std::string b, std::string block_key) {
  auto [x, y] = canonical_pair(std::move(a), std::move(b));
  return {std::move(x), std::move(y), std::move(block_key)};
}

std::set<std::string> name_tokens(std::string_view label) {
  std::set<std::string> tokens;
  std::string current;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      tokens.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(std::move(current));
  return tokens;
}

std::vector<CandidatePair> enumerate_candidates(const OntologyGraph& ontology,
                                                const BlockingConfig& blocking) {
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [individual, cls] : ontology.instances) {
    if (blocking.skip_classes.contains(local_part(cls))) continue;
    by_class[cls].push_back(individual);
  }

  std::vector<CandidatePair> pairs;
  for (const auto& [cls, members] : by_class) {
    std::vector<std::set<std::string>> tokens;
    if (blocking.token_overlap) {
      for (const auto& m : members) tokens.push_back(name_tokens(label_of(ontology, m)));
    }
    const std::string class_key = "class=" + local_part(cls);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (!blocking.token_overlap) {
          pairs.push_back(make_candidate(members[i], members[j], class_key));
          continue;
        }
        std::vector<std::string> shared;
        std::set_intersection(tokens[i].begin(), tokens[i].end(), tokens[j].begin(),
                              tokens[j].end(), std::back_inserter(shared));
        if (shared.size() < *blocking.token_overlap) continue;
        std::string key = class_key + ";shared=";
        for (std::size_t k = 0; k < shared.size(); ++k) key += (k ? " " : "") + shared[k];
        pairs.push_back(make_candidate(members[i], members[j], key));
      }
    }
  }
  return pairs;
}

// ------------------------------------------------------------------ oracle

std::string user_prompt(std::string_view a_name, std::string_view b_name) {
  return "Can I merge instances \"" + std::string(a_name) + "\" and \"" + std::string(b_name) + "\"?";
}

nlohmann::ordered_json request_body(std::string_view a_name, std::string_view b_name, std::string_view model) {
  nlohmann::ordered_json body = nlohmann::ordered_json::object();
  if (!model.empty()) body["model"] = model;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", kSystemPrompt}},
      {{"role", "user"}, {"content", user_prompt(a_name, b_name)}},
  });
  return body;
}

std::string extract_answer(std::string_view response_body) {
  json j = json::parse(response_body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string(response_body);
  auto text_at = [&](const json::json_pointer& ptr) -> std::optional<std::string> {
    if (j.contains(ptr) && j.at(ptr).is_string()) return j.at(ptr).get<std::string>();
    return std::nullopt;
  };
  for (const char* path : {"/choices/0/message/content", "/choices/0/text",
                           "/completion_message/content/text", "/completion_message/content",
                           "/message/content", "/response", "/content", "/text"}) {
    if (auto t = text_at(json::json_pointer(path))) return *t;
  }
  return std::string(response_body);
}

HttpOracle::HttpOracle(HttpOracleConfig config) : config_(std::move(config)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw Error("oracle endpoint '" + config_.endpoint + "' is not an http(s) URL");
  }
  scheme_host_port_ = m[1];
  path_ = m[2].matched ? std::string(m[2]) : "/";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error("environment variable " + config_.api_key_env + " (oracle API key) is not set");
    }
    api_key_ = key;
  }
}

OracleReply HttpOracle::ask(std::string_view a_name, std::string_view b_name) {
  httplib::Client client(scheme_host_port_);
  auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client.set_connection_timeout(micros);
  client.set_read_timeout(micros);
  client.set_write_timeout(micros);

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  std::string body = request_body(a_name, b_name, config_.model).dump();

  auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, body, "application/json");
  double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!res) throw OracleUnavailable("oracle request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw OracleUnavailable("oracle returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error("oracle returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return {extract_answer(res->body), latency};
}

StubOracle::StubOracle(std::map<IriPair, std::string> table, std::string default_answer,
                       double latency)
    : default_answer_(std::move(default_answer)),
      latency_(latency),
      calls_(std::make_shared<std::atomic<std::size_t>>(0)) {
  for (auto& [names, answer] : table) {
    auto [a, b] = names.first < names.second ? names : IriPair{names.second, names.first};
    table_[{a, b}] = answer;
  }
}

StubOracle StubOracle::from_json(const json& spec) {
  std::map<IriPair, std::string> table;
  for (const auto& row : spec.value("pairs", json::array())) {
    if (!row.is_array() || row.size() != 3) {
      throw ParseError("stub oracle: each pair row must be [name, name, answer]");
    }
    table[canonical_pair(row[0].get<std::string>(), row[1].get<std::string>())] = row[2].get<std::string>();
  }
  return StubOracle(std::move(table), spec.value("default", std::string("false")),
                    spec.value("latency_seconds", 0.0));
}

OracleReply StubOracle::ask(std::string_view a_name, std::string_view b_name) {
  ++*calls_;
  std::string a(a_name), b(b_name);
  if (b < a) std::swap(a, b);
  auto it = table_.find({a, b});
  return {it == table_.end() ? default_answer_ : it->second, latency_};
}

std::size_t StubOracle::calls() const { return *calls_; }

std::optional<bool> parse_verdict(std::string_view raw) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::string s(raw);
  auto trim = [&] {
    while (!s.empty() && is_space(s.back())) s.pop_back();
    std::size_t k = 0;
    while (k < s.size() && is_space(s[k])) ++k;
    s.erase(0, k);
  };
  trim();
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();
  trim();
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

Judgment judge_pair(Oracle& oracle, const CandidatePair& pair, std::string_view a_name,
                    std::string_view b_name, const RetryPolicy& policy) {
  Judgment j;
  j.pair = pair;
  double backoff = policy.initial_backoff_seconds;
  for (int attempt = 0;; ++attempt) {
    try {
      OracleReply reply = oracle.ask(a_name, b_name);
      j.raw_response = std::move(reply.text);
      j.latency = reply.latency;
      j.cost_estimate = policy.price_per_call;
      break;
    } catch (const OracleUnavailable& e) {
      if (attempt >= policy.retries) {
        j.error = std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)";
        return j;
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2;
    } catch (const Error& e) {
      j.error = e.what();
      return j;
    }
  }
  auto verdict = parse_verdict(j.raw_response);
  j.valid = verdict.has_value();
  j.mergeable = verdict.value_or(false);
  if (!j.valid) j.error = "unparseable response";
  return j;
}

std::vector<Judgment> judge_all(Oracle& oracle, const std::vector<CandidatePair>& pairs,
                                const OntologyGraph& ontology, std::size_t max_parallel,
                                const RetryPolicy& policy) {
  std::vector<Judgment> out(pairs.size());
  std::vector<std::pair<std::string, std::string>> names;
  names.reserve(pairs.size());
  for (const auto& p : pairs) names.emplace_back(label_of(ontology, p.a), label_of(ontology, p.b));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < pairs.size();) {
      out[k] = judge_pair(oracle, pairs[k], names[k].first, names[k].second, policy);
    }
  };
  std::size_t n = std::clamp<std::size_t>(max_parallel, 1, std::max<std::size_t>(pairs.size(), 1));
  if (n == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

json to_json(const Judgment& j) {
  json out = {{"a", j.pair.a},
              {"b", j.pair.b},
              {"block_key", j.pair.block_key},
              {"mergeable", j.mergeable},
              {"valid", j.valid},
              {"raw_response", j.raw_response},
              {"latency_seconds", j.latency}};
  out["cost_estimate"] = j.cost_estimate ? json(*j.cost_estimate) : json(nullptr);
  if (!j.error.empty()) out["error"] = j.error;
  return out;
}

Judgment judgment_from_json(const json& j) {
  Judgment out;
  out.pair = make_candidate(j.at("a").get<std::string>(), j.at("b").get<std::string>(),
                            j.value("block_key", std::string()));
  out.mergeable = j.value("mergeable", false);
  out.valid = j.value("valid", true);
  out.raw_response = j.value("raw_response", std::string());
  out.latency = j.value("latency_seconds", 0.0);
  if (j.contains("cost_estimate") && j["cost_estimate"].is_number()) {
    out.cost_estimate = j["cost_estimate"].get<double>();
  }
  out.error = j.value("error", std::string());
  return out;
}

// ------------------------------------------------------------------ graph

MergeGraph build_merge_graph(const std::vector<Judgment>& judgments) {
  MergeGraph g;
  std::set<IriPair> yes, no;
  for (const auto& j : judgments) {
    g.vertices.insert(j.pair.a);
    g.vertices.insert(j.pair.b);
    if (!j.valid) continue;
    (j.mergeable ? yes : no).insert(canonical_pair(j.pair.a, j.pair.b));
  }
  std::set_difference(yes.begin(), yes.end(), no.begin(), no.end(),
                      std::inserter(g.edges, g.edges.end()));
  return g;
}

namespace {

using Ids = std::vector<int>;  // sorted

Ids intersect(const Ids& a, const Ids& b) {
  Ids out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Bron-Kerbosch with Tomita pivoting.
class BronKerbosch {
 public:
  explicit BronKerbosch(std::vector<Ids> adjacency) : adj_(std::move(adjacency)) {}

  std::vector<Ids> run() {
    Ids all(adj_.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    Ids r;
    expand(r, all, {});
    return std::move(found_);
  }

 private:
  void expand(Ids& r, Ids p, Ids x) {
    if (p.empty()) {
      if (x.empty() && r.size() >= 2) {
        Ids clique = r;
        std::sort(clique.begin(), clique.end());
        found_.push_back(std::move(clique));
      }
      return;
    }
    int pivot = -1;
    std::size_t best = 0;
    for (const Ids* side : {&p, &x}) {
      for (int u : *side) {
        std::size_t n = intersect(p, adj_[u]).size();
        if (pivot < 0 || n > best) {
          pivot = u;
          best = n;
        }
      }
    }
    Ids candidates;
    std::set_difference(p.begin(), p.end(), adj_[pivot].begin(), adj_[pivot].end(),
                        std::back_inserter(candidates));
    for (int v : candidates) {
      r.push_back(v);
      expand(r, intersect(p, adj_[v]), intersect(x, adj_[v]));
      r.pop_back();
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  std::vector<Ids> adj_;
  std::vector<Ids> found_;
};

}  // namespace

std::vector<std::set<std::string>> maximal_cliques(const MergeGraph& graph) {
  std::vector<std::string> names(graph.vertices.begin(), graph.vertices.end());
  auto index = [&](const std::string& v) {
    auto it = std::lower_bound(names.begin(), names.end(), v);
    if (it == names.end() || *it != v) throw ValidationError("edge endpoint <" + v + "> is not a vertex");
    return static_cast<int>(it - names.begin());
  };
  std::vector<Ids> adj(names.size());
  for (const auto& [a, b] : graph.edges) {
    if (a == b) throw ValidationError("self-loop on <" + a + ">");
    int i = index(a), j = index(b);
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }

  std::vector<std::set<std::string>> cliques;
  for (const auto& ids : BronKerbosch(std::move(adj)).run()) {
    std::set<std::string> members;
    for (int id : ids) members.insert(names[id]);
    cliques.push_back(std::move(members));
  }
  std::sort(cliques.begin(), cliques.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return cliques;
}

OverlapResolution resolve_overlaps(const std::vector<std::set<std::string>>& cliques) {
  OverlapResolution out;
  std::map<std::string, std::size_t> owner;  // vertex -> index into the input
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    std::set<std::string> kept;
    for (const auto& v : cliques[k]) {
      if (owner.contains(v)) {
        std::string desc;
        for (const auto& m : cliques[k]) desc += (desc.empty() ? "" : ", ") + local_part(m);
        out.dropped[v].push_back("{" + desc + "}");
      } else {
        kept.insert(v);
      }
    }
    if (kept.size() < 2) continue;
    for (const auto& v : kept) owner[v] = k;
    out.cliques.push_back(std::move(kept));
  }
  return out;
}

std::string select_representative(const std::set<std::string>& members,
                                  const OntologyGraph& ontology) {
  if (members.size() < 2) throw ValidationError("a clique needs at least two members");
  struct Score {
    std::size_t degree;
    std::string label;
    std::string iri;
  };
  std::optional<Score> best;
  for (const auto& m : members) {
    if (!ontology.instances.contains(m)) {
      throw ValidationError("clique member <" + m + "> is not an active instance");
    }
    Score s{assertion_degree(ontology, m), label_of(ontology, m), m};
    bool better = !best || s.degree > best->degree ||
                  (s.degree == best->degree &&
                   (s.label.size() < best->label.size() ||
                    (s.label.size() == best->label.size() &&
                     std::tie(s.label, s.iri) < std::tie(best->label, best->iri))));
    if (better) best = std::move(s);
  }
  return best->iri;
}

// ------------------------------------------------------------------ review

json review_to_json(const std::vector<ReviewEntry>& entries, const OntologyGraph& ontology) {
  json out = json::array();
  for (const auto& e : entries) {
    json labels = json::array();
    for (const auto& m : e.members) labels.push_back(label_of(ontology, m));
    out.push_back({{"members", e.members},
                   {"labels", labels},
                   {"representative", e.representative},
                   {"approved", e.approved},
                   {"note", e.note}});
  }
  return out;
}

std::vector<ReviewEntry> review_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("review file must hold a JSON array");
  std::vector<ReviewEntry> out;
  for (const auto& row : j) {
    ReviewEntry e;
    e.members = row.at("members").get<std::set<std::string>>();
    e.representative = row.at("representative").get<std::string>();
    e.approved = row.value("approved", false);
    e.note = row.value("note", std::string());
    out.push_back(std::move(e));
  }
  return out;
}

// ------------------------------------------------------------------ merging

namespace {

json to_json(const ObjectAssertion& a) { return {{"s", a.subject}, {"p", a.property}, {"o", a.object}}; }

json to_json(const DataAssertion& a) {
  return {{"s", a.subject}, {"p", a.property}, {"value", a.value.lexical}, {"type", to_string(a.value.type)}};
}

ObjectAssertion object_from_json(const json& j) {
  return {j.at("s").get<std::string>(), j.at("p").get<std::string>(), j.at("o").get<std::string>()};
}

DataAssertion data_from_json(const json& j) {
  auto type = literal_type_from_xsd(j.at("type").get<std::string>());
  if (!type) throw ParseError("merge log: unknown literal type " + j.at("type").dump());
  return {j.at("s").get<std::string>(), j.at("p").get<std::string>(),
          make_literal(j.at("value").get<std::string>(), *type)};
}

}  // namespace

json to_json(const MergeLog& log) {
  json entries = json::array();
  for (const auto& e : log.entries) {
    json object_rewrites = json::array(), data_rewrites = json::array();
    for (const auto& [before, after] : e.object_rewrites) {
      object_rewrites.push_back({{"before", to_json(before)}, {"after", to_json(after)}});
    }
    for (const auto& [before, after] : e.data_rewrites) {
      data_rewrites.push_back({{"before", to_json(before)}, {"after", to_json(after)}});
    }
    json object_added = json::array(), data_added = json::array();
    for (const auto& a : e.object_added) object_added.push_back(to_json(a));
    for (const auto& a : e.data_added) data_added.push_back(to_json(a));
    entries.push_back({{"members", e.clique.members},
                       {"representative", e.clique.representative},
                       {"retired", e.retired},
                       {"object_rewrites", object_rewrites},
                       {"data_rewrites", data_rewrites},
                       {"object_added", object_added},
                       {"data_added", data_added},
                       {"fingerprints", e.fingerprints},
                       {"timestamp", e.timestamp},
                       {"reverted", e.reverted}});
  }
  return {{"entries", entries}};
}

MergeLog merge_log_from_json(const json& j) {
  MergeLog log;
  for (const auto& row : j.at("entries")) {
    MergeEntry e;
    e.clique.members = row.at("members").get<std::set<std::string>>();
    e.clique.representative = row.at("representative").get<std::string>();
    e.retired = row.at("retired").get<std::map<std::string, std::string>>();
    for (const auto& r : row.at("object_rewrites")) {
      e.object_rewrites.emplace_back(object_from_json(r.at("before")), object_from_json(r.at("after")));
    }
    for (const auto& r : row.at("data_rewrites")) {
      e.data_rewrites.emplace_back(data_from_json(r.at("before")), data_from_json(r.at("after")));
    }
    for (const auto& a : row.at("object_added")) e.object_added.insert(object_from_json(a));
    for (const auto& a : row.at("data_added")) e.data_added.insert(data_from_json(a));
    e.fingerprints = row.value("fingerprints", std::map<std::string, std::string>{});
    e.timestamp = row.value("timestamp", std::string());
    e.reverted = row.value("reverted", false);
    log.entries.push_back(std::move(e));
  }
  return log;
}

std::string journal_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OntologyGraph apply_merges(OntologyGraph g, const std::vector<Clique>& cliques, MergeLog& log) {
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> overlaps;
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    const auto& c = cliques[k];
    if (c.members.size() < 2) throw ValidationError("clique " + std::to_string(k) + " has fewer than two members");
    if (!c.members.contains(c.representative)) {
      throw ValidationError("representative <" + c.representative + "> is not a member of clique " +
                            std::to_string(k));
    }
    for (const auto& m : c.members) {
      if (!g.instances.contains(m)) throw ValidationError("clique member <" + m + "> is not an active instance");
      auto [it, fresh] = seen.emplace(m, k);
      if (!fresh) {
        overlaps.push_back("<" + m + "> in cliques " + std::to_string(it->second) + " and " +
                           std::to_string(k));
      }
    }
  }
  if (!overlaps.empty()) {
    std::string msg = "overlapping cliques:";
    for (const auto& o : overlaps) msg += " " + o;
    throw ValidationError(msg);
  }

  for (const auto& c : cliques) {
    MergeEntry e;
    e.clique = c;
    e.timestamp = journal_timestamp();
    std::set<std::string> retired = c.members;
    retired.erase(c.representative);
    auto sub = [&](const std::string& x) -> const std::string& {
      return retired.contains(x) ? c.representative : x;
    };

    for (const auto& a : g.object_assertions) {
      if (retired.contains(a.subject) || retired.contains(a.object)) {
        e.object_rewrites.emplace_back(a, ObjectAssertion{sub(a.subject), a.property, sub(a.object)});
      }
    }
    for (const auto& a : g.data_assertions) {
      if (retired.contains(a.subject)) {
        e.data_rewrites.emplace_back(a, DataAssertion{c.representative, a.property, a.value});
      }
    }
    for (const auto& [before, _] : e.object_rewrites) g.object_assertions.erase(before);
    for (const auto& [before, _] : e.data_rewrites) g.data_assertions.erase(before);
    for (const auto& [_, after] : e.object_rewrites) {
      if (g.object_assertions.insert(after).second) e.object_added.insert(after);
    }
    for (const auto& [_, after] : e.data_rewrites) {
      if (g.data_assertions.insert(after).second) e.data_added.insert(after);
    }

    for (const auto& r : retired) {
      e.retired[r] = g.instances.at(r);
      g.instances.erase(r);
      g.merged_into[r] = c.representative;
    }
    for (auto& [fp, owner] : g.fingerprint_index) {
      if (retired.contains(owner)) {
        e.fingerprints[fp] = owner;
        owner = c.representative;
      }
    }
    log.entries.push_back(std::move(e));
  }
  return g;
}

OntologyGraph revert(OntologyGraph g, MergeLog& log, std::size_t index) {
  if (index >= log.entries.size()) {
    throw ValidationError("no merge journal entry " + std::to_string(index) + " (journal has " +
                          std::to_string(log.entries.size()) + ")");
  }
  MergeEntry& e = log.entries[index];
  if (e.reverted) throw ValidationError("merge journal entry " + std::to_string(index) + " is already reverted");

  for (std::size_t k = index + 1; k < log.entries.size(); ++k) {
    const auto& later = log.entries[k];
    if (later.reverted) continue;
    bool dependent = std::any_of(later.clique.members.begin(), later.clique.members.end(),
                                 [&](const std::string& m) { return e.clique.members.contains(m); });
    for (const auto& [before, after] : later.object_rewrites) {
      dependent = dependent || e.object_added.contains(before) || e.object_added.contains(after);
    }
    for (const auto& [before, after] : later.data_rewrites) {
      dependent = dependent || e.data_added.contains(before) || e.data_added.contains(after);
    }
    if (dependent) {
      throw ValidationError("merge journal entry " + std::to_string(index) + " cannot be reverted while entry " +
                            std::to_string(k) + " depends on it; revert entry " + std::to_string(k) + " first");
    }
  }

  if (!g.instances.contains(e.clique.representative)) {
    throw ValidationError("representative <" + e.clique.representative + "> is not active; ontology does not match the journal");
  }
  for (const auto& [r, _] : e.retired) {
    if (g.instances.contains(r)) {
      throw ValidationError("retired <" + r + "> is active; ontology does not match the journal");
    }
  }

  for (const auto& a : e.object_added) g.object_assertions.erase(a);
  for (const auto& a : e.data_added) g.data_assertions.erase(a);
  for (const auto& [before, _] : e.object_rewrites) g.object_assertions.insert(before);
  for (const auto& [before, _] : e.data_rewrites) g.data_assertions.insert(before);
  for (const auto& [r, cls] : e.retired) {
    g.instances[r] = cls;
    g.merged_into.erase(r);
  }
  for (const auto& [fp, owner] : e.fingerprints) g.fingerprint_index[fp] = owner;
  e.reverted = true;
  return g;
}

double reduction_ratio(const OntologyGraph& before, const OntologyGraph& after) {
  if (before.instances.empty()) return 0.0;
  return (static_cast<double>(before.instances.size()) - static_cast<double>(after.instances.size())) /
         static_cast<double>(before.instances.size());
}

}  // namespace ontobuild::refine
