#include "ontobuild/vault.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>

#include "ontobuild/fsutil.hpp"

namespace ontobuild::vault {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(NoteKind kind) noexcept { return kind == NoteKind::Clause ? "clause" : "concept"; }

namespace {

std::string_view trim(std::string_view s) {
  auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    auto line = body.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (end == body.size()) break;
    start = end + 1;
  }
  return out;
}

bool is_fence(std::string_view line) { return trim(line).starts_with("```"); }

bool is_tag_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '/' || c == '.' ||
         static_cast<unsigned char>(c) >= 0x80;
}

struct TagToken {
  std::size_t begin;  // position of '#'
  std::size_t end;
  std::string text;   // without '#'
};

std::vector<TagToken> tag_tokens(std::string_view line) {
  std::vector<TagToken> out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '#') continue;
    if (i > 0 && !std::isspace(static_cast<unsigned char>(line[i - 1]))) continue;
    std::size_t j = i + 1;
    while (j < line.size() && is_tag_char(line[j])) ++j;
    std::string text(line.substr(i + 1, j - i - 1));
    while (!text.empty() && (text.back() == '.' || text.back() == '/')) text.pop_back();
    bool numeric = std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (!text.empty() && !numeric) out.push_back({i, i + 1 + text.size(), std::move(text)});
    i = j;
  }
  return out;
}

// Normalized id a link target points at: heading/block suffix and folders
// dropped. Empty for same-note links like [[#heading]].
std::string resolve_target(std::string_view target) {
  auto cut = target.find_first_of("#^");
  if (cut != std::string_view::npos) target = target.substr(0, cut);
  auto slash = target.rfind('/');
  if (slash != std::string_view::npos) target = target.substr(slash + 1);
  if (target.size() > 3 && target.substr(target.size() - 3) == ".md") target.remove_suffix(3);
  return normalize_id(target);
}

std::string display_target(std::string_view target) {
  auto cut = target.find_first_of("#^");
  if (cut != std::string_view::npos) target = target.substr(0, cut);
  auto slash = target.rfind('/');
  if (slash != std::string_view::npos) target = target.substr(slash + 1);
  return std::string(trim(target));
}

// `## <spec> <clause>` sections of a populated concept note.
std::vector<std::pair<ClauseTag, std::string>> populated_sections(std::string_view body) {
  std::vector<std::pair<ClauseTag, std::string>> out;
  std::optional<ClauseTag> current;
  std::vector<std::string_view> text;
  auto flush = [&] {
    if (current) {
      while (!text.empty() && trim(text.back()).empty()) text.pop_back();
      std::size_t first = 0;
      while (first < text.size() && trim(text[first]).empty()) ++first;
      std::string joined;
      for (std::size_t k = first; k < text.size(); ++k) {
        if (k > first) joined += '\n';
        joined += text[k];
      }
      if (!joined.empty()) out.emplace_back(*current, std::move(joined));
    }
    current.reset();
    text.clear();
  };
  for (auto line : lines_of(body)) {
    if (line.starts_with("## ") || line.starts_with("# ")) {
      flush();
      if (line.starts_with("## ")) {
        auto rest = trim(line.substr(3));
        auto space = rest.find(' ');
        if (space != std::string_view::npos) {
          ClauseTag tag{std::string(rest.substr(0, space)), std::string(trim(rest.substr(space + 1)))};
          if (!tag.clause_path.empty()) current = std::move(tag);
        }
      }
      continue;
    }
    if (current) text.push_back(line);
  }
  flush();
  return out;
}

std::vector<std::pair<ClauseTag, std::string>> note_sections(const Note& note) {
  if (note.kind == NoteKind::Concept) return populated_sections(note.body);
  std::vector<std::pair<ClauseTag, std::string>> out;
  for (auto& p : paragraphs(note.body)) out.emplace_back(note.clauses.front(), std::move(p));
  return out;
}

bool contains_section(const std::string& body, const std::string& section) {
  for (auto pos = body.find(section); pos != std::string::npos; pos = body.find(section, pos + 1)) {
    bool starts = pos == 0 || body[pos - 1] == '\n';
    bool ends = pos + section.size() == body.size() || body[pos + section.size()] == '\n';
    if (starts && ends) return true;
  }
  return false;
}

}  // namespace

std::string normalize_id(std::string_view name) {
  std::string out(trim(name));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Link> extract_links(std::string_view body, std::vector<Diagnostic>* diagnostics) {
  std::vector<Link> out;
  bool fenced = false;
  std::size_t line_no = 0;
  for (auto line : lines_of(body)) {
    ++line_no;
    if (is_fence(line)) {
      fenced = !fenced;
      continue;
    }
    if (fenced) continue;
    for (std::size_t pos = line.find("[["); pos != std::string_view::npos; pos = line.find("[[", pos)) {
      auto close = line.find("]]", pos + 2);
      if (close == std::string_view::npos) {
        if (diagnostics) {
          diagnostics->push_back({Severity::Warning, "unterminated-link", "line " + std::to_string(line_no),
                                  "'[[' without closing ']]' ignored"});
        }
        break;
      }
      auto inner = line.substr(pos + 2, close - pos - 2);
      pos = close + 2;
      Link link;
      if (auto bar = inner.find('|'); bar != std::string_view::npos) {
        link.target = std::string(trim(inner.substr(0, bar)));
        link.alias = std::string(inner.substr(bar + 1));
      } else {
        link.target = std::string(trim(inner));
      }
      if (!link.target.empty()) out.push_back(std::move(link));
    }
  }
  return out;
}

std::vector<std::string> extract_tags(std::string_view body) {
  std::vector<std::string> out;
  bool fenced = false;
  for (auto line : lines_of(body)) {
    if (is_fence(line)) {
      fenced = !fenced;
      continue;
    }
    if (fenced) continue;
    for (auto& t : tag_tokens(line)) {
      if (std::find(out.begin(), out.end(), t.text) == out.end()) out.push_back(std::move(t.text));
    }
  }
  return out;
}

std::optional<ClauseTag> parse_clause_tag(std::string_view tag) {
  if (!tag.starts_with("spec/")) return std::nullopt;
  tag.remove_prefix(5);
  auto slash = tag.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 >= tag.size()) return std::nullopt;
  return ClauseTag{std::string(tag.substr(0, slash)), std::string(tag.substr(slash + 1))};
}

std::vector<std::string> paragraphs(std::string_view body) {
  std::vector<std::string> out;
  std::string current;
  bool fenced = false;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (auto line : lines_of(body)) {
    if (is_fence(line)) {
      flush();
      fenced = !fenced;
      continue;
    }
    if (fenced) continue;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    std::string text(line);
    auto tokens = tag_tokens(line);
    bool had_clause_tag = false;
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
      if (!parse_clause_tag(it->text)) continue;
      had_clause_tag = true;
      std::size_t begin = it->begin;
      if (begin > 0 && text[begin - 1] == ' ') --begin;
      text.erase(begin, it->end - begin);
    }
    if (had_clause_tag) {
      auto t = trim(text);
      if (t.empty()) continue;
      text = std::string(t);
    }
    if (!current.empty()) current += '\n';
    current += text;
  }
  flush();
  return out;
}

Note make_note(std::string_view path, std::string body) {
  Note n;
  n.path = std::string(path);
  n.id = normalize_id(fs::path(n.path).stem().string());
  n.body = std::move(body);
  n.tags = extract_tags(n.body);
  for (const auto& t : n.tags) {
    if (auto c = parse_clause_tag(t)) n.clauses.push_back(std::move(*c));
  }
  n.kind = n.clauses.empty() ? NoteKind::Concept : NoteKind::Clause;
  return n;
}

NoteGraph link_notes(std::vector<Note> notes) {
  NoteGraph g;
  for (auto& n : notes) {
    auto [it, fresh] = g.notes.emplace(n.id, n);
    if (!fresh) {
      throw ValidationError("duplicate note id '" + n.id + "': " + it->second.path + " and " + n.path);
    }
  }
  for (const auto& [id, note] : g.notes) {
    std::vector<Diagnostic> local;
    auto links = extract_links(note.body, &local);
    for (auto& d : local) {
      d.location = note.path + ":" + d.location.substr(5);
      g.diagnostics.push_back(std::move(d));
    }
    for (const auto& link : links) {
      std::string target = resolve_target(link.target);
      if (target.empty() || target == id) {
        g.diagnostics.push_back({Severity::Warning, "self-link", note.path,
                                 "link [[" + link.target + "]] points at its own note; no edge added"});
        continue;
      }
      if (!g.notes.contains(target)) {
        g.diagnostics.push_back({Severity::Violation, "unresolved-link", note.path,
                                 "link target [[" + link.target + "]] does not match any note"});
        continue;
      }
      g.links.push_back({id, target, link.alias});
      g.edges.emplace(id, target);
    }
  }
  return g;
}

NoteGraph scan_vault(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("vault root " + root.string() + " is not a directory");
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    const auto name = it->path().filename().string();
    if (it->is_directory() && name.starts_with(".")) {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".md") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Note> notes;
  std::vector<Diagnostic> diagnostics;
  for (const auto& f : files) {
    std::string rel = fs::relative(f, root).generic_string();
    try {
      notes.push_back(make_note(rel, fsutil::read_file(f)));
    } catch (const Error& e) {
      diagnostics.push_back({Severity::Error, "unreadable", rel, e.what()});
    }
  }
  NoteGraph g = link_notes(std::move(notes));
  g.diagnostics.insert(g.diagnostics.begin(), diagnostics.begin(), diagnostics.end());
  return g;
}

std::string section_text(const ClauseTag& tag, std::string_view paragraph) {
  return "## " + tag.spec_id + " " + tag.clause_path + "\n\n" + std::string(paragraph) + "\n";
}

PopulationReport populate_concept_notes(const NoteGraph& graph, const fs::path& root) {
  PopulationReport report;
  struct Pending {
    fs::path file;
    std::string body;
    bool created = false;
    bool changed = false;
  };
  std::map<std::string, Pending> pending;

  auto target_note = [&](const Link& link) -> Pending* {
    std::string id = resolve_target(link.target);
    if (id.empty()) return nullptr;
    if (auto it = pending.find(id); it != pending.end()) return &it->second;
    if (auto it = graph.notes.find(id); it != graph.notes.end()) {
      if (it->second.kind == NoteKind::Clause) return nullptr;
      return &pending.emplace(id, Pending{root / it->second.path, it->second.body}).first->second;
    }
    // Concept note missing on disk: create it next to the vault root.
    return &pending.emplace(id, Pending{root / (display_target(link.target) + ".md"), "", true}).first->second;
  };

  for (const auto& [id, note] : graph.notes) {
    if (note.kind != NoteKind::Clause) continue;
    const ClauseTag& tag = note.clauses.front();
    for (const auto& para : paragraphs(note.body)) {
      std::set<std::string> done;
      for (const auto& link : extract_links(para)) {
        std::string target = resolve_target(link.target);
        if (target == id || !done.insert(target).second) continue;
        Pending* p = target_note(link);
        if (!p) continue;
        std::string section = section_text(tag, para);
        if (contains_section(p->body, section)) continue;
        if (!p->body.empty()) {
          if (p->body.back() != '\n') p->body += '\n';
          if (!p->body.ends_with("\n\n")) p->body += '\n';
        }
        p->body += section;
        p->changed = true;
        ++report.sections_appended;
      }
    }
  }

  for (auto& [id, p] : pending) {
    if (!p.changed) continue;
    try {
      fsutil::write_file_atomic(p.file, p.body);
      ++report.notes_touched;
      if (p.created) ++report.notes_created;
    } catch (const Error& e) {
      report.diagnostics.push_back({Severity::Error, "write-failed", p.file.string(), e.what()});
    }
  }
  return report;
}

std::vector<double> pagerank(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             const PageRankParams& params, std::size_t* iterations, bool* converged) {
  if (n == 0) throw ValidationError("pagerank: graph is empty");
  if (!(params.damping > 0.0 && params.damping < 1.0)) throw ValidationError("pagerank: damping must be in (0,1)");
  if (!(params.tolerance > 0.0)) throw ValidationError("pagerank: tolerance must be positive");

  std::vector<std::vector<std::size_t>> out(n);
  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw ValidationError("pagerank: edge endpoint out of range");
    unique.emplace(u, v);
    if (params.undirected) unique.emplace(v, u);
  }
  for (auto [u, v] : unique) out[u].push_back(v);

  const double d = params.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  std::size_t it = 0;
  bool done = false;
  while (it < params.max_iterations && !done) {
    ++it;
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (out[u].empty()) dangling += rank[u];
    }
    std::fill(next.begin(), next.end(), (1.0 - d) * inv_n + d * dangling * inv_n);
    for (std::size_t u = 0; u < n; ++u) {
      if (out[u].empty()) continue;
      double share = d * rank[u] / static_cast<double>(out[u].size());
      for (auto v : out[u]) next[v] += share;
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff += std::abs(next[k] - rank[k]);
    rank.swap(next);
    done = diff < params.tolerance;
  }
  double sum = 0.0;
  for (double r : rank) sum += r;
  for (double& r : rank) r /= sum;
  if (iterations) *iterations = it;
  if (converged) *converged = done;
  return rank;
}

RankTable pagerank(const NoteGraph& graph, const PageRankParams& params) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : graph.notes) ids.push_back(id);
  auto index = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [a, b] : graph.edges) edges.emplace_back(index(a), index(b));
  RankTable t;
  auto scores = pagerank(ids.size(), edges, params, &t.iterations, &t.converged);
  for (std::size_t k = 0; k < ids.size(); ++k) t.scores[ids[k]] = scores[k];
  return t;
}

std::string ContextBundle::text() const {
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += '\n';
    out += section_text({s.spec_id, s.clause_path}, s.text);
  }
  return out;
}

ContextBundle collect_context(const NoteGraph& graph, std::string_view concept_id, std::size_t max_depth) {
  std::string start = normalize_id(concept_id);
  if (!graph.notes.contains(start)) throw ValidationError("unknown note '" + std::string(concept_id) + "'");

  std::map<std::string, std::set<std::string>> adjacent;
  for (const auto& [a, b] : graph.edges) {
    adjacent[a].insert(b);
    adjacent[b].insert(a);
  }

  ContextBundle bundle;
  bundle.concept_id = start;
  std::set<std::tuple<std::string, std::string, std::string>> seen_sections;
  std::set<std::string> visited{start};
  std::vector<std::string> layer{start};
  for (std::size_t depth = 0; depth < max_depth && !layer.empty(); ++depth) {
    std::set<std::string> next;
    for (const auto& id : layer) {
      for (auto& [tag, text] : note_sections(graph.notes.at(id))) {
        if (!seen_sections.emplace(tag.spec_id, tag.clause_path, text).second) continue;
        bundle.sections.push_back({tag.spec_id, tag.clause_path, std::move(text), id, depth});
      }
      for (const auto& n : adjacent[id]) {
        if (!visited.contains(n)) next.insert(n);
      }
    }
    visited.insert(next.begin(), next.end());
    layer.assign(next.begin(), next.end());
  }
  return bundle;
}

json to_json(const std::vector<Diagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics) {
    out.push_back({{"severity", to_string(d.severity)}, {"code", d.code}, {"location", d.location}, {"message", d.message}});
  }
  return out;
}

json to_json(const NoteGraph& graph) {
  json notes = json::array();
  for (const auto& [id, n] : graph.notes) {
    json clauses = json::array();
    for (const auto& c : n.clauses) clauses.push_back({{"spec_id", c.spec_id}, {"clause_path", c.clause_path}});
    notes.push_back({{"id", id}, {"path", n.path}, {"kind", to_string(n.kind)}, {"tags", n.tags}, {"clauses", clauses}});
  }
  json edges = json::array();
  for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
  std::size_t violations = std::count_if(graph.diagnostics.begin(), graph.diagnostics.end(),
                                         [](const Diagnostic& d) { return d.severity != Severity::Warning; });
  return {{"note_count", graph.notes.size()},
          {"link_count", graph.links.size()},
          {"edge_count", graph.edges.size()},
          {"violation_count", violations},
          {"notes", notes},
          {"edges", edges},
          {"diagnostics", to_json(graph.diagnostics)}};
}

json to_json(const PopulationReport& r) {
  return {{"notes_touched", r.notes_touched},
          {"sections_appended", r.sections_appended},
          {"notes_created", r.notes_created},
          {"diagnostics", to_json(r.diagnostics)}};
}

json to_json(const RankTable& t) {
  json scores = json::object();
  for (const auto& [id, s] : t.scores) scores[id] = s;
  return {{"iterations", t.iterations}, {"converged", t.converged}, {"scores", scores}};
}

json to_json(const ContextBundle& b) {
  json sections = json::array();
  for (const auto& s : b.sections) {
    sections.push_back({{"spec_id", s.spec_id}, {"clause_path", s.clause_path}, {"text", s.text}, {"note", s.note}, {"depth", s.depth}});
  }
  return {{"concept", b.concept_id}, {"sections", sections}};
}

std::string rank_csv(const RankTable& t) {
  std::vector<std::pair<std::string, double>> rows(t.scores.begin(), t.scores.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out = "note_id,score\n";
  char buf[64];
  for (const auto& [id, s] : rows) {
    std::string cell = id;
    if (cell.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : cell) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      cell = q + "\"";
    }
    std::snprintf(buf, sizeof buf, ",%.12g\n", s);
    out += cell + buf;
  }
  return out;
}

}  // namespace ontobuild::vault
