#pragma once

// Pipeline configuration: a small TOML subset (tables, scalar key/value
// pairs, string arrays, `#` comments). Relative paths resolve against the
// directory holding the config file.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ontobuild::config {

enum class OracleKind { Stub, Http };

struct OracleSettings {
  OracleKind kind = OracleKind::Stub;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "ONTOBUILD_API_KEY";
  std::size_t max_parallel = 4;
  double timeout_seconds = 60.0;
  int retries = 2;
  double backoff_seconds = 0.5;
  std::optional<double> price_per_call;
  std::filesystem::path stub_table;  // stub oracle answers (JSON)
};

struct BlockingSettings {
  std::optional<std::size_t> token_overlap;
  std::set<std::string> skip_classes;
};

struct PageRankSettings {
  double damping = 0.85;
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

struct EvalSettings {
  std::filesystem::path ground_truth;
  std::filesystem::path groups;  // optional grouping to score; default is the approved review
  double latency_bin_seconds = 5.0;
};

struct PipelineConfig {
  std::filesystem::path vault_root;
  std::filesystem::path schema_path;
  std::filesystem::path xml_path;
  std::string base_iri = "http://example.org/ontobuild";
  std::filesystem::path output_dir = "out";
  std::filesystem::path review_file;  // defaults to <output_dir>/review.json
  OracleSettings oracle;
  BlockingSettings blocking;
  PageRankSettings pagerank;
  EvalSettings eval;
};

/// Parses config text. `base_dir` anchors relative paths. Throws ParseError
/// with line numbers for syntax problems, unknown keys and wrong value
/// types, ValidationError for out-of-range values.
PipelineConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});

PipelineConfig load(const std::filesystem::path& file);

nlohmann::json to_json(const PipelineConfig& config);

}  // namespace ontobuild::config
