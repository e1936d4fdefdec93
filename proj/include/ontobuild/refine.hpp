#pragma once

// Instance refinement: candidate blocking, true/false oracle judgments, the
// mergeability graph, maximal cliques and journaled, reversible merges.

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ontobuild/error.hpp"
#include "ontobuild/ontology.hpp"

namespace ontobuild::refine {

using IriPair = std::pair<std::string, std::string>;  // always first < second

/// Orders two distinct IRIs; throws ValidationError when they are equal.
IriPair canonical_pair(std::string a, std::string b);

struct CandidatePair {
  std::string a;
  std::string b;
  std::string block_key;

  IriPair key() const { return {a, b}; }
  auto operator<=>(const CandidatePair&) const = default;
};

CandidatePair make_candidate(std::string a, std::string b, std::string block_key);

struct BlockingConfig {
  // Same-class blocking always applies; when set, pairs must also share at
  // least this many name tokens.
  std::optional<std::size_t> token_overlap;
  // Classes (local names) whose instances are never paired.
  std::set<std::string> skip_classes;
};

/// Lowercased alphanumeric runs of a label.
std::set<std::string> name_tokens(std::string_view label);

std::vector<CandidatePair> enumerate_candidates(const OntologyGraph& ontology,
                                                const BlockingConfig& blocking);

// ------------------------------------------------------------------ oracle

/// Raised by an oracle for failures worth retrying (network, timeout, 5xx).
class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

struct OracleReply {
  std::string text;
  double latency = 0.0;  // seconds
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  /// Must be safe to call from several threads at once.
  virtual OracleReply ask(std::string_view a_name, std::string_view b_name) = 0;
};

inline constexpr std::string_view kSystemPrompt = "You only answer with true or false.";

/// `Can I merge instances "<a>" and "<b>"?`
std::string user_prompt(std::string_view a_name, std::string_view b_name);

/// Chat request body: a system and a user message, plus `model` when given.
/// Key order is kept as written (role before content).
nlohmann::ordered_json request_body(std::string_view a_name, std::string_view b_name,
                            std::string_view model = {});

/// Pulls the answer text out of a chat-completion response. Understands
/// OpenAI-style `choices[0].message.content`, Llama-API-style
/// `completion_message.content.text`, and falls back to the raw body.
std::string extract_answer(std::string_view response_body);

struct HttpOracleConfig {
  std::string endpoint;     // http(s)://host[:port]/path
  std::string model;        // omitted from the body when empty
  std::string api_key_env;  // name of the environment variable holding the key
  double timeout_seconds = 60.0;
};

class HttpOracle : public Oracle {
 public:
  explicit HttpOracle(HttpOracleConfig config);
  OracleReply ask(std::string_view a_name, std::string_view b_name) override;

 private:
  HttpOracleConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

/// Table-driven oracle keyed by unordered name pairs; reports a fixed latency
/// and never sleeps, so runs are reproducible.
class StubOracle : public Oracle {
 public:
  StubOracle(std::map<IriPair, std::string> table, std::string default_answer, double latency);

  /// {"default": "false", "latency_seconds": 0.5, "pairs": [["a", "b", "true"], ...]}
  static StubOracle from_json(const nlohmann::json& spec);

  OracleReply ask(std::string_view a_name, std::string_view b_name) override;
  std::size_t calls() const;

 private:
  std::map<IriPair, std::string> table_;
  std::string default_answer_;
  double latency_;
  mutable std::shared_ptr<std::atomic<std::size_t>> calls_;
};

/// Trimmed, lowercased, trailing punctuation stripped; nullopt unless the
/// result is exactly "true" or "false".
std::optional<bool> parse_verdict(std::string_view raw);

struct Judgment {
  CandidatePair pair;
  bool mergeable = false;
  bool valid = false;  // false when the reply was unparseable or the oracle kept failing
  std::string raw_response;
  double latency = 0.0;
  std::optional<double> cost_estimate;
  std::string error;
};

struct RetryPolicy {
  int retries = 2;
  double initial_backoff_seconds = 0.5;  // doubled after each failed attempt
  std::optional<double> price_per_call;
};

Judgment judge_pair(Oracle& oracle, const CandidatePair& pair, std::string_view a_name,
                    std::string_view b_name, const RetryPolicy& policy = {});

/// Judges every pair with at most `max_parallel` requests in flight. Output
/// order follows the input order regardless of completion order.
std::vector<Judgment> judge_all(Oracle& oracle, const std::vector<CandidatePair>& pairs,
                                const OntologyGraph& ontology, std::size_t max_parallel,
                                const RetryPolicy& policy = {});

nlohmann::json to_json(const Judgment& judgment);
Judgment judgment_from_json(const nlohmann::json& j);

// ------------------------------------------------------------------ graph

struct MergeGraph {
  std::set<std::string> vertices;
  std::set<IriPair> edges;
};

/// An edge needs at least one true and no false valid judgment for the pair.
MergeGraph build_merge_graph(const std::vector<Judgment>& judgments);

/// Maximal cliques of size >= 2, largest first, ties in lexicographic order.
std::vector<std::set<std::string>> maximal_cliques(const MergeGraph& graph);

struct OverlapResolution {
  std::vector<std::set<std::string>> cliques;          // pairwise disjoint
  std::map<std::string, std::vector<std::string>> dropped;  // vertex -> cliques it was removed from
};

/// Walks the cliques in order; a vertex stays in the first (largest) clique
/// that claims it and is dropped from later ones. Cliques left with fewer
/// than two members vanish.
OverlapResolution resolve_overlaps(const std::vector<std::set<std::string>>& cliques);

/// Highest assertion degree, then shortest label, then lexicographic label
/// and IRI.
std::string select_representative(const std::set<std::string>& members,
                                  const OntologyGraph& ontology);

// ------------------------------------------------------------------ review

struct ReviewEntry {
  std::set<std::string> members;
  std::string representative;
  bool approved = false;
  std::string note;
};

nlohmann::json review_to_json(const std::vector<ReviewEntry>& entries, const OntologyGraph& ontology);
std::vector<ReviewEntry> review_from_json(const nlohmann::json& j);

// ------------------------------------------------------------------ merging

struct Clique {
  std::set<std::string> members;
  std::string representative;
};

struct MergeEntry {
  Clique clique;
  std::map<std::string, std::string> retired;  // retired individual -> its class
  std::vector<std::pair<ObjectAssertion, ObjectAssertion>> object_rewrites;  // before -> after
  std::vector<std::pair<DataAssertion, DataAssertion>> data_rewrites;
  std::set<ObjectAssertion> object_added;  // afters that were not already asserted
  std::set<DataAssertion> data_added;
  std::map<std::string, std::string> fingerprints;  // fingerprint -> retired owner
  std::string timestamp;
  bool reverted = false;
};

struct MergeLog {
  std::vector<MergeEntry> entries;
};

nlohmann::json to_json(const MergeLog& log);
MergeLog merge_log_from_json(const nlohmann::json& j);

/// UTC ISO-8601; honours SOURCE_DATE_EPOCH for reproducible journals.
std::string journal_timestamp();

/// Applies each clique in turn and appends one journal entry per clique.
/// Throws ValidationError for overlapping cliques, unknown members or a
/// representative outside its clique.
OntologyGraph apply_merges(OntologyGraph ontology, const std::vector<Clique>& cliques,
                           MergeLog& log);

/// Undoes one journal entry and marks it reverted. Throws ValidationError
/// for a bad index, an already reverted entry, or a later unreverted entry
/// that depends on this one.
OntologyGraph revert(OntologyGraph ontology, MergeLog& log, std::size_t index);

/// Fraction of active instances removed between two graphs.
double reduction_ratio(const OntologyGraph& before, const OntologyGraph& after);

}  // namespace ontobuild::refine
