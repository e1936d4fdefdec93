#include "ontobuild/config.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <variant>
#include <vector>

#include "ontobuild/error.hpp"
#include "ontobuild/fsutil.hpp"

namespace ontobuild::config {

namespace fs = std::filesystem;

namespace {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

struct Entry {
  Value value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::string_view text, int line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_of_line() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError("config: " + what, line_, static_cast<int>(pos_) + 1); }

  std::string bare_key() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string string_value() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= s_.size()) break;
      switch (char e = s_[pos_++]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: --pos_; fail(std::string("unknown escape \\") + e);
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value value() {
    skip_ws();
    char c = peek();
    if (c == '"') return string_value();
    if (c == '[') {
      ++pos_;
      std::vector<std::string> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      for (;;) {
        skip_ws();
        if (peek() != '"') fail("arrays hold strings only");
        items.push_back(string_value());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
          if (peek() == ']') break;  // trailing comma
          continue;
        }
        if (peek() == ']') break;
        fail("expected ',' or ']'");
      }
      ++pos_;
      return items;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '#') ++pos_;
    std::string_view word = s_.substr(start, pos_ - start);
    if (word == "true") return true;
    if (word == "false") return false;
    std::string digits;
    for (char ch : word) {
      if (ch != '_') digits += ch;
    }
    if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
    double d = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
      pos_ = start;
      fail("expected a string, number, boolean or string array");
    }
    return d;
  }

  std::size_t pos_ = 0;

 private:
  std::string_view s_;
  int line_;
};

const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "string";
    case 1: return "number";
    case 2: return "boolean";
    default: return "array";
  }
}

class Binder {
 public:
  Binder(std::map<std::string, Entry> entries, fs::path base) : entries_(std::move(entries)), base_(std::move(base)) {}

  template <class T>
  const T* get(const std::string& key, const char* expected) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    const T* v = std::get_if<T>(&it->second.value);
    if (!v) {
      throw ParseError("config: " + key + " must be a " + expected + ", got " + type_name(it->second.value),
                       it->second.line);
    }
    return v;
  }

  void string(const std::string& key, std::string& out) {
    if (auto v = get<std::string>(key, "string")) out = *v;
  }
  void path(const std::string& key, fs::path& out) {
    if (auto v = get<std::string>(key, "string")) out = v->empty() ? fs::path() : (base_ / *v).lexically_normal();
  }
  void number(const std::string& key, double& out) {
    if (auto v = get<double>(key, "number")) out = *v;
  }
  template <class Int>
  void count(const std::string& key, Int& out, long long min) {
    if (auto v = get<double>(key, "number")) {
      if (*v != static_cast<double>(static_cast<long long>(*v)) || *v < static_cast<double>(min)) {
        throw ValidationError("config: " + key + " must be an integer >= " + std::to_string(min));
      }
      out = static_cast<Int>(*v);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = get<bool>(key, "boolean")) out = *v;
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_) {
      if (!used_.contains(key)) throw ParseError("config: unknown key '" + key + "'", entry.line);
    }
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
  fs::path base_;
};

}  // namespace

PipelineConfig parse(std::string_view text, const fs::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string table;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    Reader r(line, line_no);
    if (!r.at_end_of_line()) {
      if (r.peek() == '[') {
        ++r.pos_;
        r.skip_ws();
        table = r.bare_key();
        r.skip_ws();
        if (r.peek() != ']') r.fail("expected ']'");
        ++r.pos_;
      } else {
        std::string key = r.bare_key();
        r.skip_ws();
        if (r.peek() != '=') r.fail("expected '='");
        ++r.pos_;
        Value v = r.value();
        std::string full = table.empty() ? key : table + "." + key;
        if (key == "api_key" || key == "apikey" || key == "token") {
          throw ValidationError("config: line " + std::to_string(line_no) +
                                ": secrets are read from the environment variable named by oracle.api_key_env, "
                                "not from the config file");
        }
        if (!entries.emplace(full, Entry{std::move(v), line_no}).second) {
          throw ParseError("config: duplicate key '" + full + "'", line_no);
        }
      }
      if (!r.at_end_of_line()) r.fail("unexpected text after value");
    }
    if (end == text.size()) break;
  }

  PipelineConfig c;
  Binder b(std::move(entries), base_dir);
  b.path("vault_root", c.vault_root);
  b.path("schema_path", c.schema_path);
  b.path("xml_path", c.xml_path);
  b.string("base_iri", c.base_iri);
  c.output_dir = (base_dir / "out").lexically_normal();
  b.path("output_dir", c.output_dir);
  b.path("review_file", c.review_file);

  std::string kind = "stub";
  b.string("oracle.kind", kind);
  if (kind == "stub") {
    c.oracle.kind = OracleKind::Stub;
  } else if (kind == "http") {
    c.oracle.kind = OracleKind::Http;
  } else {
    throw ValidationError("config: oracle.kind must be \"stub\" or \"http\", got \"" + kind + "\"");
  }
  b.string("oracle.endpoint", c.oracle.endpoint);
  b.string("oracle.model", c.oracle.model);
  b.string("oracle.api_key_env", c.oracle.api_key_env);
  b.count("oracle.max_parallel", c.oracle.max_parallel, 1);
  b.number("oracle.timeout_seconds", c.oracle.timeout_seconds);
  b.count("oracle.retries", c.oracle.retries, 0);
  b.number("oracle.backoff_seconds", c.oracle.backoff_seconds);
  if (auto v = b.get<double>("oracle.price_per_call", "number")) c.oracle.price_per_call = *v;
  b.path("oracle.stub_table", c.oracle.stub_table);

  bool same_class = true;
  b.boolean("blocking.same_class", same_class);
  if (!same_class) throw ValidationError("config: blocking.same_class cannot be disabled");
  if (b.get<double>("blocking.token_overlap", "number")) {
    std::size_t t = 0;
    b.count("blocking.token_overlap", t, 1);
    c.blocking.token_overlap = t;
  }
  if (auto v = b.get<std::vector<std::string>>("blocking.skip_classes", "string array")) {
    c.blocking.skip_classes = {v->begin(), v->end()};
  }

  b.number("pagerank.damping", c.pagerank.damping);
  b.number("pagerank.tolerance", c.pagerank.tolerance);
  b.count("pagerank.max_iterations", c.pagerank.max_iterations, 1);

  b.path("eval.ground_truth", c.eval.ground_truth);
  b.path("eval.groups", c.eval.groups);
  b.number("eval.latency_bin_seconds", c.eval.latency_bin_seconds);

  b.reject_unused();

  if (!(c.pagerank.damping > 0.0 && c.pagerank.damping < 1.0)) throw ValidationError("config: pagerank.damping must be in (0,1)");
  if (!(c.pagerank.tolerance > 0.0)) throw ValidationError("config: pagerank.tolerance must be positive");
  if (!(c.oracle.timeout_seconds > 0.0)) throw ValidationError("config: oracle.timeout_seconds must be positive");
  if (c.oracle.backoff_seconds < 0.0) throw ValidationError("config: oracle.backoff_seconds must not be negative");
  if (c.oracle.price_per_call && *c.oracle.price_per_call < 0.0) throw ValidationError("config: oracle.price_per_call must not be negative");
  if (!(c.eval.latency_bin_seconds > 0.0)) throw ValidationError("config: eval.latency_bin_seconds must be positive");
  if (c.oracle.kind == OracleKind::Http && c.oracle.endpoint.empty()) {
    throw ValidationError("config: oracle.endpoint is required for the http oracle");
  }
  if (c.review_file.empty()) c.review_file = c.output_dir / "review.json";
  return c;
}

PipelineConfig load(const fs::path& file) {
  return parse(fsutil::read_file(file), file.has_parent_path() ? file.parent_path() : fs::path("."));
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json oracle = {{"kind", c.oracle.kind == OracleKind::Http ? "http" : "stub"},
                           {"endpoint", c.oracle.endpoint},
                           {"model", c.oracle.model},
                           {"api_key_env", c.oracle.api_key_env},
                           {"max_parallel", c.oracle.max_parallel},
                           {"timeout_seconds", c.oracle.timeout_seconds},
                           {"retries", c.oracle.retries},
                           {"backoff_seconds", c.oracle.backoff_seconds},
                           {"stub_table", c.oracle.stub_table.generic_string()}};
  oracle["price_per_call"] = c.oracle.price_per_call ? nlohmann::json(*c.oracle.price_per_call) : nlohmann::json();
  nlohmann::json blocking = {{"same_class", true}, {"skip_classes", c.blocking.skip_classes}};
  blocking["token_overlap"] = c.blocking.token_overlap ? nlohmann::json(*c.blocking.token_overlap) : nlohmann::json();
  return {{"vault_root", c.vault_root.generic_string()},
          {"schema_path", c.schema_path.generic_string()},
          {"xml_path", c.xml_path.generic_string()},
          {"base_iri", c.base_iri},
          {"output_dir", c.output_dir.generic_string()},
          {"review_file", c.review_file.generic_string()},
          {"oracle", oracle},
          {"blocking", blocking},
          {"pagerank", {{"damping", c.pagerank.damping}, {"tolerance", c.pagerank.tolerance}, {"max_iterations", c.pagerank.max_iterations}}},
          {"eval", {{"ground_truth", c.eval.ground_truth.generic_string()}, {"groups", c.eval.groups.generic_string()}, {"latency_bin_seconds", c.eval.latency_bin_seconds}}}};
}

}  // namespace ontobuild::config
