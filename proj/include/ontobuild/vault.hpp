#pragma once

// Markdown note vault: clause notes (tagged #spec/<id>/<clause>) and concept
// notes joined by [[wikilinks]]; population of concept notes, PageRank and
// context retrieval for oracle prompts.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ontobuild/error.hpp"

namespace ontobuild::vault {

enum class NoteKind { Clause, Concept };

const char* to_string(NoteKind kind) noexcept;

struct ClauseTag {
  std::string spec_id;
  std::string clause_path;

  auto operator<=>(const ClauseTag&) const = default;
};

struct Note {
  std::string id;
  std::string path;  // relative to the vault root, '/' separated
  std::string body;
  std::vector<std::string> tags;  // without '#', document order, unique
  std::vector<ClauseTag> clauses;
  NoteKind kind = NoteKind::Concept;
};

struct LinkRef {
  std::string source;
  std::string target;
  std::optional<std::string> alias;
};

struct NoteGraph {
  std::map<std::string, Note> notes;
  std::vector<LinkRef> links;  // every resolved occurrence, duplicates kept
  std::set<std::pair<std::string, std::string>> edges;
  std::vector<Diagnostic> diagnostics;
};

/// Trimmed, ASCII-lowercased note name.
std::string normalize_id(std::string_view name);

struct Link {
  std::string target;  // as written
  std::optional<std::string> alias;

  bool operator==(const Link&) const = default;
};

/// Wikilinks outside ``` fences, in document order. Unterminated `[[` is
/// skipped and, when `diagnostics` is given, reported as a warning.
std::vector<Link> extract_links(std::string_view body, std::vector<Diagnostic>* diagnostics = nullptr);

/// Inline `#tag` tokens outside fences (headings are not tags).
std::vector<std::string> extract_tags(std::string_view body);

/// `spec/<spec_id>/<clause_path>` with both parts non-empty.
std::optional<ClauseTag> parse_clause_tag(std::string_view tag);

/// Maximal runs of non-blank lines outside fences; clause tags are removed
/// from the text and lines left empty by that are dropped.
std::vector<std::string> paragraphs(std::string_view body);

/// Builds a note from its text; `path` is only recorded.
Note make_note(std::string_view path, std::string body);

/// Resolves links of already-built notes into a graph.
NoteGraph link_notes(std::vector<Note> notes);

/// Reads every .md file below root (hidden directories skipped). Throws
/// ValidationError on two files with the same normalized id.
NoteGraph scan_vault(const std::filesystem::path& root);

struct PopulationReport {
  std::size_t notes_touched = 0;
  std::size_t sections_appended = 0;
  std::size_t notes_created = 0;
  std::vector<Diagnostic> diagnostics;
};

/// `## <spec_id> <clause_path>\n\n<paragraph>\n`
std::string section_text(const ClauseTag& tag, std::string_view paragraph);

/// Appends each clause paragraph to every concept note it links to, under a
/// heading naming its clause. Re-running appends nothing.
PopulationReport populate_concept_notes(const NoteGraph& graph, const std::filesystem::path& root);

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;
  bool undirected = false;
};

struct RankTable {
  std::map<std::string, double> scores;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on nodes 0..n-1 with uniform teleport; dangling nodes
/// spread their mass uniformly. Duplicate edges count once.
std::vector<double> pagerank(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             const PageRankParams& params, std::size_t* iterations = nullptr,
                             bool* converged = nullptr);

RankTable pagerank(const NoteGraph& graph, const PageRankParams& params = {});

struct ContextSection {
  std::string spec_id;
  std::string clause_path;
  std::string text;
  std::string note;  // where it was found
  std::size_t depth = 0;
};

struct ContextBundle {
  std::string concept_id;
  std::vector<ContextSection> sections;

  /// Heading + text blocks ready to paste into a prompt.
  std::string text() const;
};

/// Breadth-first over links in both directions. Notes at distance < max_depth
/// contribute their clause sections; depth 0 yields nothing, depth 1 the
/// concept's own sections.
ContextBundle collect_context(const NoteGraph& graph, std::string_view concept_id, std::size_t max_depth);

nlohmann::json to_json(const NoteGraph& graph);
nlohmann::json to_json(const PopulationReport& report);
nlohmann::json to_json(const RankTable& table);
nlohmann::json to_json(const ContextBundle& bundle);
nlohmann::json to_json(const std::vector<Diagnostic>& diagnostics);

/// `note_id,score` rows, highest score first.
std::string rank_csv(const RankTable& table);

}  // namespace ontobuild::vault
