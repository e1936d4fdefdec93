#include "ontobuild/rdfio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

#include "ontobuild/error.hpp"
#include "ontobuild/xml.hpp"

namespace ontobuild::rdfio {
namespace {

using namespace std::string_literals;

const std::string kRdfType = std::string(vocab::kRdf) + "type";
const std::string kSubClassOf = std::string(vocab::kRdfs) + "subClassOf";
const std::string kDomain = std::string(vocab::kRdfs) + "domain";
const std::string kRange = std::string(vocab::kRdfs) + "range";
const std::string kOwlOntology = std::string(vocab::kOwl) + "Ontology";
const std::string kOwlClass = std::string(vocab::kOwl) + "Class";
const std::string kOwlObjectProperty = std::string(vocab::kOwl) + "ObjectProperty";
const std::string kOwlDatatypeProperty = std::string(vocab::kOwl) + "DatatypeProperty";
const std::string kOwlAnnotationProperty = std::string(vocab::kOwl) + "AnnotationProperty";
const std::string kOwlNamedIndividual = std::string(vocab::kOwl) + "NamedIndividual";

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

void require_consistent(const OntologyGraph& g) {
  std::vector<std::string> problems;
  if (g.base_iri.empty()) problems.push_back("base IRI is empty");
  auto more = check_invariants(g);
  problems.insert(problems.end(), more.begin(), more.end());
  if (problems.empty()) return;
  std::string msg = "cannot serialize inconsistent ontology:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationError(msg);
}

// Resolution of relative references; covers what the writers of either
// format produce, not the full RFC 3986 algorithm (no dot segments).
std::string resolve(const std::string& base, const std::string& ref) {
  std::size_t k = 0;
  while (k < ref.size() && (is_alnum(ref[k]) || ref[k] == '+' || ref[k] == '-' || ref[k] == '.')) {
    ++k;
  }
  if (k > 0 && k < ref.size() && ref[k] == ':' && std::isalpha(static_cast<unsigned char>(ref[0]))) {
    return ref;
  }
  if (base.empty()) return ref;
  std::string stem = base.substr(0, base.find('#'));
  if (ref.empty()) return stem;
  if (ref[0] == '#') return stem + ref;
  auto slash = stem.rfind('/');
  return (slash == std::string::npos ? stem : stem.substr(0, slash + 1)) + ref;
}

// Subject -> predicate -> rendered objects, in output order.
struct Block {
  std::string subject;
  std::vector<std::pair<std::string, std::vector<std::string>>> predicates;

  std::vector<std::string>& objects(const std::string& predicate) {
    for (auto& [p, objs] : predicates) {
      if (p == predicate) return objs;
    }
    predicates.emplace_back(predicate, std::vector<std::string>{});
    return predicates.back().second;
  }
};

// ---------------------------------------------------------------- Turtle out

bool safe_pn_local(std::string_view local) {
  if (local.empty() || local.back() == '.') return false;
  for (std::size_t i = 0; i < local.size(); ++i) {
    char c = local[i];
    if (c == '%') {
      if (i + 2 >= local.size() || !is_hex(local[i + 1]) || !is_hex(local[i + 2])) return false;
      i += 2;
      continue;
    }
    if (is_alnum(c) || c == '_') continue;
    if (i > 0 && (c == '-' || c == '.')) continue;
    return false;
  }
  return true;
}

std::string turtle_iri(std::string_view iri) {
  std::string out = "<";
  for (unsigned char c : iri) {
    if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '^' || c == '`' || c == '\\') {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04X", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out + ">";
}

std::string turtle_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

class TurtleWriter {
 public:
  explicit TurtleWriter(const OntologyGraph& g) : g_(g), prefix_(g.vocabulary_iri("")) {}

  std::string run() {
    std::string out;
    out += "@prefix : " + turtle_iri(prefix_) + " .\n";
    out += "@prefix owl: <" + std::string(vocab::kOwl) + "> .\n";
    out += "@prefix rdf: <" + std::string(vocab::kRdf) + "> .\n";
    out += "@prefix rdfs: <" + std::string(vocab::kRdfs) + "> .\n";
    out += "@prefix xsd: <" + std::string(vocab::kXsd) + "> .\n\n";
    out += term(g_.ontology_iri()) + " a owl:Ontology .\n";

    std::vector<Block> classes;
    for (const auto& c : g_.classes) {
      Block b{term(c), {}};
      b.objects("a").push_back("owl:Class");
      for (auto it = g_.subclass_axioms.lower_bound({c, ""});
           it != g_.subclass_axioms.end() && it->first == c; ++it) {
        b.objects("rdfs:subClassOf").push_back(term(it->second));
      }
      classes.push_back(std::move(b));
    }
    section(out, "Classes", classes);

    std::vector<Block> object_props;
    for (const auto& [p, decl] : g_.object_properties) {
      Block b{term(p), {}};
      b.objects("a").push_back("owl:ObjectProperty");
      for (const auto& d : decl.domains) b.objects("rdfs:domain").push_back(term(d));
      for (const auto& r : decl.ranges) b.objects("rdfs:range").push_back(term(r));
      object_props.push_back(std::move(b));
    }
    section(out, "Object properties", object_props);

    std::vector<Block> data_props;
    for (const auto& [p, decl] : g_.data_properties) {
      Block b{term(p), {}};
      b.objects("a").push_back("owl:DatatypeProperty");
      for (const auto& d : decl.domains) b.objects("rdfs:domain").push_back(term(d));
      for (auto r : decl.ranges) b.objects("rdfs:range").push_back("xsd:"s + to_string(r));
      data_props.push_back(std::move(b));
    }
    section(out, "Data properties", data_props);

    if (!g_.merged_into.empty()) {
      Block b{term(g_.merged_into_property()), {}};
      b.objects("a").push_back("owl:AnnotationProperty");
      section(out, "Annotation properties", {b});
    }

    std::map<std::string, std::map<std::string, std::vector<std::string>>> asserted;
    for (const auto& a : g_.object_assertions) asserted[a.subject][a.property].push_back(term(a.object));
    for (const auto& a : g_.data_assertions) asserted[a.subject][a.property].push_back(literal(a.value));
    std::vector<Block> individuals;
    for (const auto& [i, c] : g_.instances) {
      Block b{term(i), {}};
      b.objects("a") = {"owl:NamedIndividual", term(c)};
      if (auto it = asserted.find(i); it != asserted.end()) {
        for (auto& [p, objs] : it->second) b.objects(term(p)) = std::move(objs);
      }
      individuals.push_back(std::move(b));
    }
    section(out, "Individuals", individuals);

    std::vector<Block> provenance;
    for (const auto& [retired, rep] : g_.merged_into) {
      Block b{term(retired), {}};
      b.objects(term(g_.merged_into_property())).push_back(term(rep));
      provenance.push_back(std::move(b));
    }
    section(out, "Merge provenance", provenance);
    return out;
  }

 private:
  std::string term(const std::string& iri) const {
    if (starts_with(iri, prefix_) && safe_pn_local(std::string_view(iri).substr(prefix_.size()))) {
      return ":" + iri.substr(prefix_.size());
    }
    return turtle_iri(iri);
  }

  static std::string literal(const Literal& l) {
    switch (l.type) {
      case LiteralType::Boolean:
        return l.lexical;
      case LiteralType::AnyUri:
        return turtle_string(l.lexical) + "^^xsd:anyURI";
      case LiteralType::String:
        break;
    }
    return turtle_string(l.lexical);
  }

  static void section(std::string& out, const char* title, const std::vector<Block>& blocks) {
    if (blocks.empty()) return;
    out += "\n# "s + title + "\n\n";
    for (const auto& b : blocks) {
      out += b.subject;
      bool first = true;
      for (const auto& [p, objs] : b.predicates) {
        out += first ? " " : " ;\n    ";
        first = false;
        out += p + " ";
        for (std::size_t k = 0; k < objs.size(); ++k) {
          if (k > 0) out += " , ";
          out += objs[k];
        }
      }
      out += " .\n";
    }
  }

  const OntologyGraph& g_;
  std::string prefix_;
};

// --------------------------------------------------------------- RDF/XML out

bool is_ncname_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ncname_char(char c) { return is_alnum(c) || c == '_' || c == '-' || c == '.'; }

bool is_ncname(std::string_view s) {
  if (s.empty() || !is_ncname_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), is_ncname_char);
}

class RdfXmlWriter {
 public:
  explicit RdfXmlWriter(const OntologyGraph& g) : g_(g), prefix_(g.vocabulary_iri("")) {}

  std::string run() {
    std::string out;
    out += "<?xml version=\"1.0\"?>\n";
    out += "<rdf:RDF xmlns=\"" + xml::escape_attribute(prefix_) + "\"\n";
    out += "     xmlns:owl=\"" + std::string(vocab::kOwl) + "\"\n";
    out += "     xmlns:rdf=\"" + std::string(vocab::kRdf) + "\"\n";
    out += "     xmlns:xsd=\"" + std::string(vocab::kXsd) + "\"\n";
    out += "     xmlns:rdfs=\"" + std::string(vocab::kRdfs) + "\">\n";
    out += "    <owl:Ontology rdf:about=\"" + xml::escape_attribute(g_.ontology_iri()) + "\"/>\n";

    comment(out, "Classes", !g_.classes.empty());
    for (const auto& c : g_.classes) {
      std::vector<std::string> body;
      for (auto it = g_.subclass_axioms.lower_bound({c, ""});
           it != g_.subclass_axioms.end() && it->first == c; ++it) {
        body.push_back(resource("rdfs:subClassOf", it->second));
      }
      node(out, "owl:Class", c, body);
    }

    comment(out, "Object properties", !g_.object_properties.empty());
    for (const auto& [p, decl] : g_.object_properties) {
      std::vector<std::string> body;
      for (const auto& d : decl.domains) body.push_back(resource("rdfs:domain", d));
      for (const auto& r : decl.ranges) body.push_back(resource("rdfs:range", r));
      node(out, "owl:ObjectProperty", p, body);
    }

    comment(out, "Data properties", !g_.data_properties.empty());
    for (const auto& [p, decl] : g_.data_properties) {
      std::vector<std::string> body;
      for (const auto& d : decl.domains) body.push_back(resource("rdfs:domain", d));
      for (auto r : decl.ranges) body.push_back(resource("rdfs:range", xsd_iri(r)));
      node(out, "owl:DatatypeProperty", p, body);
    }

    if (!g_.merged_into.empty()) {
      comment(out, "Annotation properties", true);
      node(out, "owl:AnnotationProperty", g_.merged_into_property(), {});
    }

    std::map<std::string, std::vector<std::string>> asserted;
    for (const auto& a : g_.object_assertions) {
      asserted[a.subject].push_back(property_element(a.property, "rdf:resource=\"" +
                                                                     xml::escape_attribute(a.object) +
                                                                     "\"", std::nullopt));
    }
    for (const auto& a : g_.data_assertions) {
      std::string attrs;
      if (a.value.type != LiteralType::String) {
        attrs = "rdf:datatype=\"" + xsd_iri(a.value.type) + "\"";
      }
      asserted[a.subject].push_back(property_element(a.property, attrs, a.value.lexical));
    }
    comment(out, "Individuals", !g_.instances.empty());
    for (const auto& [i, c] : g_.instances) {
      std::vector<std::string> body{resource("rdf:type", c)};
      if (auto it = asserted.find(i); it != asserted.end()) {
        std::sort(it->second.begin(), it->second.end());
        body.insert(body.end(), it->second.begin(), it->second.end());
      }
      node(out, "owl:NamedIndividual", i, body);
    }

    comment(out, "Merge provenance", !g_.merged_into.empty());
    for (const auto& [retired, rep] : g_.merged_into) {
      node(out, "rdf:Description", retired,
           {property_element(g_.merged_into_property(),
                             "rdf:resource=\"" + xml::escape_attribute(rep) + "\"", std::nullopt)});
    }
    out += "</rdf:RDF>\n";
    return out;
  }

 private:
  static void comment(std::string& out, const char* title, bool nonempty) {
    if (nonempty) out += "\n    <!-- "s + title + " -->\n\n";
  }

  static std::string resource(const std::string& qname, const std::string& iri) {
    return "<" + qname + " rdf:resource=\"" + xml::escape_attribute(iri) + "\"/>";
  }

  static void node(std::string& out, const std::string& qname, const std::string& about,
                   const std::vector<std::string>& body) {
    out += "    <" + qname + " rdf:about=\"" + xml::escape_attribute(about) + "\"";
    if (body.empty()) {
      out += "/>\n";
      return;
    }
    out += ">\n";
    for (const auto& line : body) out += "        " + line + "\n";
    out += "    </" + qname + ">\n";
  }

  // Property IRIs under the vocabulary prefix use the default namespace;
  // anything else gets a local namespace declaration split at the longest
  // NCName suffix.
  std::string property_element(const std::string& iri, const std::string& attrs,
                               const std::optional<std::string>& text) const {
    std::string name;
    std::string decl;
    if (starts_with(iri, prefix_) && is_ncname(std::string_view(iri).substr(prefix_.size()))) {
      name = iri.substr(prefix_.size());
    } else {
      std::size_t split = iri.size();
      for (std::size_t k = iri.size(); k-- > 0;) {
        if (!is_ncname_char(iri[k])) break;
        if (is_ncname_start(iri[k])) split = k;
      }
      if (split == iri.size()) {
        throw ValidationError("rdfxml: property <" + iri + "> has no XML-name form");
      }
      name = "p:" + iri.substr(split);
      decl = " xmlns:p=\"" + xml::escape_attribute(iri.substr(0, split)) + "\"";
    }
    for (char c : text.value_or("")) {
      auto u = static_cast<unsigned char>(c);
      if (u < 0x20 && c != '\t' && c != '\n' && c != '\r') {
        throw ValidationError("rdfxml: literal of <" + iri + "> contains a control character");
      }
    }
    std::string out = "<" + name + decl;
    if (!attrs.empty()) out += " " + attrs;
    if (!text) return out + "/>";
    return out + ">" + xml::escape_text(*text) + "</" + name + ">";
  }

  const OntologyGraph& g_;
  std::string prefix_;
};

// ----------------------------------------------------------------- Turtle in

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class TurtleReader {
 public:
  explicit TurtleReader(std::string_view s) : s_(s) {}

  std::vector<Triple> run() {
    for (;;) {
      skip_ws();
      if (eof()) break;
      if (looking_at("@prefix")) {
        advance(7);
        prefix_directive();
        expect('.');
      } else if (looking_at("@base")) {
        advance(5);
        skip_ws();
        base_ = iriref();
        expect('.');
      } else if (keyword_ci("PREFIX")) {
        prefix_directive();
      } else if (keyword_ci("BASE")) {
        skip_ws();
        base_ = iriref();
      } else {
        Term subject = subject_term();
        predicate_object_list(subject);
        expect('.');
      }
    }
    return std::move(out_);
  }

 private:
  bool eof() const { return i_ >= s_.size(); }
  char peek(std::size_t k = 0) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i_ < s_.size(); ++k, ++i_) {
      if (s_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("turtle: " + msg, line_, col_); }
  [[noreturn]] void unsupported(const std::string& what) const {
    throw ValidationError("turtle: " + what + " (line " + std::to_string(line_) + ", column " +
                          std::to_string(col_) + ")");
  }

  bool looking_at(std::string_view word) const { return s_.substr(i_, word.size()) == word; }

  bool keyword_ci(std::string_view word) {
    if (s_.size() - i_ < word.size() + 1) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (std::toupper(static_cast<unsigned char>(s_[i_ + k])) != word[k]) return false;
    }
    if (!std::isspace(static_cast<unsigned char>(s_[i_ + word.size()]))) return false;
    advance(word.size());
    return true;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail("expected '"s + c + "'");
    advance();
  }

  void prefix_directive() {
    skip_ws();
    std::string name;
    while (!eof() && peek() != ':') {
      char c = peek();
      if (!is_alnum(c) && c != '_' && c != '-' && c != '.' && static_cast<unsigned char>(c) < 0x80) {
        fail("bad prefix name");
      }
      name += c;
      advance();
    }
    if (eof()) fail("unterminated prefix name");
    advance();
    skip_ws();
    prefixes_[name] = iriref();
  }

  unsigned long hex_escape(int digits) {
    unsigned long cp = 0;
    for (int k = 0; k < digits; ++k) {
      char c = peek();
      if (!is_hex(c)) fail("bad unicode escape");
      cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(c))
                                                    ? c - '0'
                                                    : std::tolower(c) - 'a' + 10);
      advance();
    }
    return cp;
  }

  std::string iriref() {
    if (peek() != '<') fail("expected IRI");
    advance();
    std::string iri;
    for (;;) {
      if (eof()) fail("unterminated IRI");
      char c = peek();
      if (c == '>') break;
      if (c == '\\') {
        advance();
        char e = peek();
        advance();
        if (e == 'u') {
          append_utf8(iri, hex_escape(4));
        } else if (e == 'U') {
          append_utf8(iri, hex_escape(8));
        } else {
          fail("bad escape in IRI");
        }
        continue;
      }
      if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"') fail("illegal character in IRI");
      iri += c;
      advance();
    }
    advance();
    return resolve(base_, iri);
  }

  static bool name_char(char c) {
    return is_alnum(c) || c == '_' || c == '-' || c == ':' || c == '%' ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  std::string prefixed_name() {
    std::string prefix;
    while (!eof() && peek() != ':') {
      char c = peek();
      if (!is_alnum(c) && c != '_' && c != '-' && c != '.' && static_cast<unsigned char>(c) < 0x80) {
        fail("unexpected character '"s + c + "'");
      }
      prefix += c;
      advance();
    }
    if (eof()) fail("unexpected end of input");
    advance();
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail("undeclared prefix '" + prefix + ":'");
    std::string local;
    while (!eof()) {
      char c = peek();
      if (name_char(c)) {
        local += c;
        advance();
      } else if (c == '.' && name_char(peek(1))) {
        local += c;
        advance();
      } else if (c == '\\') {
        advance();
        if (eof()) fail("dangling escape");
        local += peek();
        advance();
      } else {
        break;
      }
    }
    return it->second + local;
  }

  std::string iri_term() {
    if (peek() == '<') return iriref();
    return prefixed_name();
  }

  void reject_blank() {
    if (peek() == '[') unsupported("blank node '[' (anonymous individual) is not supported");
    if (peek() == '_' && peek(1) == ':') {
      std::string label;
      std::size_t k = 2;
      while (name_char(peek(k))) label += peek(k++);
      unsupported("blank node _:" + label + " (anonymous individual) is not supported");
    }
    if (peek() == '(') unsupported("RDF collections are not supported");
  }

  Term subject_term() {
    skip_ws();
    reject_blank();
    return {Term::Kind::Iri, iri_term(), "", ""};
  }

  std::string verb() {
    skip_ws();
    if (peek() == 'a' && (std::isspace(static_cast<unsigned char>(peek(1))) || peek(1) == '<')) {
      advance();
      return kRdfType;
    }
    return iri_term();
  }

  std::string quoted() {
    char q = peek();
    bool triple = peek(1) == q && peek(2) == q;
    advance(triple ? 3 : 1);
    std::string value;
    for (;;) {
      if (eof()) fail("unterminated string");
      char c = peek();
      if (triple) {
        if (c == q && peek(1) == q && peek(2) == q) {
          advance(3);
          break;
        }
      } else {
        if (c == q) {
          advance();
          break;
        }
        if (c == '\n' || c == '\r') fail("newline in short string");
      }
      if (c == '\\') {
        advance();
        char e = peek();
        advance();
        switch (e) {
          case 't': value += '\t'; break;
          case 'b': value += '\b'; break;
          case 'n': value += '\n'; break;
          case 'r': value += '\r'; break;
          case 'f': value += '\f'; break;
          case '"': value += '"'; break;
          case '\'': value += '\''; break;
          case '\\': value += '\\'; break;
          case 'u': append_utf8(value, hex_escape(4)); break;
          case 'U': append_utf8(value, hex_escape(8)); break;
          default: fail("bad string escape");
        }
        continue;
      }
      value += c;
      advance();
    }
    return value;
  }

  Term object_term() {
    skip_ws();
    reject_blank();
    char c = peek();
    if (c == '"' || c == '\'') {
      Term t{Term::Kind::Literal, quoted(), "", ""};
      if (peek() == '@') {
        advance();
        while (is_alnum(peek()) || peek() == '-') {
          t.language += peek();
          advance();
        }
        if (t.language.empty()) fail("empty language tag");
      } else if (peek() == '^' && peek(1) == '^') {
        advance(2);
        t.datatype = iri_term();
      }
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
      unsupported("numeric literals are not supported");
    }
    for (std::string_view word : {"true", "false"}) {
      if (looking_at(word) && !name_char(peek(word.size()))) {
        advance(word.size());
        return {Term::Kind::Literal, std::string(word), xsd_iri(LiteralType::Boolean), ""};
      }
    }
    return {Term::Kind::Iri, iri_term(), "", ""};
  }

  void predicate_object_list(const Term& subject) {
    for (;;) {
      std::string predicate = verb();
      for (;;) {
        out_.push_back({subject, predicate, object_term()});
        skip_ws();
        if (peek() != ',') break;
        advance();
      }
      skip_ws();
      if (peek() != ';') return;
      while (peek() == ';') {
        advance();
        skip_ws();
      }
      if (peek() == '.') return;
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
  std::vector<Triple> out_;
};

// ---------------------------------------------------------------- RDF/XML in

class RdfXmlReader {
 public:
  std::vector<Triple> run(std::string_view bytes) {
    xml::Element root = xml::parse(bytes);
    if (!root.is(vocab::kRdf, "RDF")) {
      throw ValidationError("rdfxml: root element must be rdf:RDF, found " + root.where());
    }
    std::string base = root.attr(xml::kXmlNamespace, "base").value_or("");
    for (const auto& child : root.children) node(child, base);
    return std::move(out_);
  }

 private:
  static void blank(const xml::Element& e) {
    throw ValidationError("rdfxml: blank node (anonymous individual) at " + e.where() +
                          " is not supported");
  }

  static void whitespace_only(const xml::Element& e) {
    if (e.text.find_first_not_of(" \t\r\n") != std::string::npos) {
      throw ValidationError("rdfxml: unexpected text inside " + e.where());
    }
  }

  void node(const xml::Element& e, std::string base) {
    if (auto b = e.attr(xml::kXmlNamespace, "base")) base = resolve(base, *b);
    Term subject;
    if (auto about = e.attr(vocab::kRdf, "about")) {
      subject = {Term::Kind::Iri, resolve(base, *about), "", ""};
    } else if (auto id = e.attr(vocab::kRdf, "ID")) {
      subject = {Term::Kind::Iri, resolve(base, "#" + *id), "", ""};
    } else {
      blank(e);
    }
    if (e.ns.empty()) throw ValidationError("rdfxml: unqualified node element " + e.where());
    if (!e.is(vocab::kRdf, "Description")) {
      out_.push_back({subject, kRdfType, {Term::Kind::Iri, e.ns + e.local, "", ""}});
    }
    for (const auto& a : e.attributes) {
      if (a.ns == xml::kXmlNamespace) continue;
      if (a.ns == vocab::kRdf && (a.local == "about" || a.local == "ID")) continue;
      if (a.ns == vocab::kRdf && a.local == "type") {
        out_.push_back({subject, kRdfType, {Term::Kind::Iri, resolve(base, a.value), "", ""}});
      } else if (a.ns.empty()) {
        throw ValidationError("rdfxml: unqualified attribute '" + a.local + "' on " + e.where());
      } else {
        out_.push_back({subject, a.ns + a.local, {Term::Kind::Literal, a.value, "", ""}});
      }
    }
    whitespace_only(e);
    for (const auto& p : e.children) property(subject, p, base);
  }

  void property(const Term& subject, const xml::Element& p, std::string base) {
    if (auto b = p.attr(xml::kXmlNamespace, "base")) base = resolve(base, *b);
    if (p.ns.empty()) throw ValidationError("rdfxml: unqualified property element " + p.where());
    std::string predicate = p.ns + p.local;
    if (p.attr(vocab::kRdf, "parseType")) {
      throw ValidationError("rdfxml: rdf:parseType at " + p.where() + " is not supported");
    }
    if (p.attr(vocab::kRdf, "nodeID")) blank(p);
    if (!p.children.empty()) {
      throw ValidationError("rdfxml: nested node element inside " + p.where() + " is not supported");
    }
    Term object;
    if (auto res = p.attr(vocab::kRdf, "resource")) {
      whitespace_only(p);
      object = {Term::Kind::Iri, resolve(base, *res), "", ""};
    } else {
      object = {Term::Kind::Literal, p.text, "", ""};
      if (auto dt = p.attr(vocab::kRdf, "datatype")) object.datatype = resolve(base, *dt);
      if (auto lang = p.attr(xml::kXmlNamespace, "lang")) object.language = *lang;
    }
    for (const auto& a : p.attributes) {
      bool known = a.ns == xml::kXmlNamespace ||
                   (a.ns == vocab::kRdf && (a.local == "resource" || a.local == "datatype"));
      if (!known) {
        throw ValidationError("rdfxml: attribute '" + a.local + "' on property element " +
                              p.where() + " is not supported");
      }
    }
    out_.push_back({subject, predicate, object});
  }

  std::vector<Triple> out_;
};

std::string show(const Term& t) {
  if (t.kind == Term::Kind::Blank) return "_:" + t.value;
  if (t.kind == Term::Kind::Literal) return "\"" + t.value + "\"";
  return "<" + t.value + ">";
}

}  // namespace

const char* to_string(Format format) noexcept {
  return format == Format::Turtle ? "turtle" : "rdfxml";
}

Format format_from_string(std::string_view name) {
  if (name == "turtle" || name == "ttl") return Format::Turtle;
  if (name == "rdfxml" || name == "rdf" || name == "owl" || name == "xml") return Format::RdfXml;
  throw Error("unknown RDF format '" + std::string(name) + "' (expected turtle or rdfxml)");
}

std::string serialize(const OntologyGraph& ontology, Format format) {
  require_consistent(ontology);
  if (format == Format::Turtle) return TurtleWriter(ontology).run();
  return RdfXmlWriter(ontology).run();
}

std::vector<Triple> read_turtle(std::string_view bytes) { return TurtleReader(bytes).run(); }

std::vector<Triple> read_rdfxml(std::string_view bytes) { return RdfXmlReader().run(bytes); }

OntologyGraph interpret(const std::vector<Triple>& triples) {
  std::set<std::string> ontologies, classes, object_props, data_props, annotation_props,
      declared_individuals;
  std::map<std::string, std::set<std::string>> types;

  for (const auto& t : triples) {
    for (const Term* term : {&t.subject, &t.object}) {
      if (term->kind == Term::Kind::Blank) {
        throw ValidationError("blank node _:" + term->value + " (anonymous individual) is not supported");
      }
    }
    if (t.predicate != kRdfType) continue;
    if (t.object.kind != Term::Kind::Iri) {
      throw ValidationError("rdf:type of " + show(t.subject) + " must be an IRI");
    }
    const std::string& s = t.subject.value;
    const std::string& o = t.object.value;
    if (o == kOwlOntology) {
      ontologies.insert(s);
    } else if (o == kOwlClass) {
      classes.insert(s);
    } else if (o == kOwlObjectProperty) {
      object_props.insert(s);
    } else if (o == kOwlDatatypeProperty) {
      data_props.insert(s);
    } else if (o == kOwlAnnotationProperty) {
      annotation_props.insert(s);
    } else if (o == kOwlNamedIndividual) {
      declared_individuals.insert(s);
    } else if (starts_with(o, vocab::kOwl) || starts_with(o, vocab::kRdf) ||
               starts_with(o, vocab::kRdfs) || starts_with(o, vocab::kXsd)) {
      throw ValidationError("unsupported construct: " + show(t.subject) + " a <" + o + ">");
    } else {
      types[s].insert(o);
    }
  }
  if (ontologies.size() != 1) {
    throw ValidationError("expected exactly one owl:Ontology header, found " +
                          std::to_string(ontologies.size()));
  }

  OntologyGraph g;
  g.base_iri = *ontologies.begin();
  const std::string merged = g.merged_into_property();
  g.classes = classes;
  for (const auto& p : object_props) g.object_properties[p];
  for (const auto& p : data_props) g.data_properties[p];
  for (const auto& p : annotation_props) {
    if (p != merged) throw ValidationError("unsupported annotation property <" + p + ">");
  }

  for (const auto& t : triples) {
    if (t.predicate == kRdfType) continue;
    const std::string& s = t.subject.value;
    // Header annotations (comments, version IRIs) carry nothing we model.
    if (s == g.base_iri) continue;
    auto need_iri = [&]() -> const std::string& {
      if (t.object.kind != Term::Kind::Iri) {
        throw ValidationError("<" + t.predicate + "> of <" + s + "> expects an IRI, got " + show(t.object));
      }
      return t.object.value;
    };
    if (t.predicate == kSubClassOf) {
      g.subclass_axioms.emplace(s, need_iri());
    } else if (t.predicate == kDomain || t.predicate == kRange) {
      const std::string& o = need_iri();
      bool domain = t.predicate == kDomain;
      if (auto op = g.object_properties.find(s); op != g.object_properties.end()) {
        (domain ? op->second.domains : op->second.ranges).insert(o);
      } else if (auto dp = g.data_properties.find(s); dp != g.data_properties.end()) {
        if (domain) {
          dp->second.domains.insert(o);
        } else {
          auto type = starts_with(o, vocab::kXsd)
                          ? literal_type_from_xsd(std::string_view(o).substr(vocab::kXsd.size()))
                          : std::nullopt;
          if (!type) throw ValidationError("unsupported datatype range <" + o + "> of <" + s + ">");
          dp->second.ranges.insert(*type);
        }
      } else {
        throw ValidationError("rdfs:" + std::string(domain ? "domain" : "range") +
                              " on undeclared property <" + s + ">");
      }
    } else if (t.predicate == merged) {
      g.merged_into[s] = need_iri();
    } else if (g.object_properties.contains(t.predicate)) {
      g.object_assertions.insert({s, t.predicate, need_iri()});
    } else if (g.data_properties.contains(t.predicate)) {
      if (t.object.kind != Term::Kind::Literal) {
        throw ValidationError("data property <" + t.predicate + "> of <" + s + "> expects a literal");
      }
      if (!t.object.language.empty()) {
        throw ValidationError("language-tagged literal on <" + s + "> is not supported");
      }
      std::optional<LiteralType> type = LiteralType::String;
      if (!t.object.datatype.empty()) {
        type = starts_with(t.object.datatype, vocab::kXsd)
                   ? literal_type_from_xsd(
                         std::string_view(t.object.datatype).substr(vocab::kXsd.size()))
                   : std::nullopt;
      }
      if (!type) throw ValidationError("unsupported datatype <" + t.object.datatype + ">");
      g.data_assertions.insert({s, t.predicate, make_literal(t.object.value, *type)});
    } else {
      throw ValidationError("unsupported predicate <" + t.predicate + "> on <" + s + ">");
    }
  }

  std::set<std::string> individuals = declared_individuals;
  for (const auto& [s, _] : types) individuals.insert(s);
  for (const auto& i : individuals) {
    auto it = types.find(i);
    std::size_t n = it == types.end() ? 0 : it->second.size();
    if (n != 1) {
      throw ValidationError("individual <" + i + "> has " + std::to_string(n) +
                            " classes; exactly one is supported");
    }
    g.instances[i] = *it->second.begin();
  }

  auto problems = check_invariants(g);
  if (!problems.empty()) {
    std::string msg = "parsed ontology is inconsistent:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return g;
}

OntologyGraph parse(std::string_view bytes, Format format) {
  return interpret(format == Format::Turtle ? read_turtle(bytes) : read_rdfxml(bytes));
}

bool equal(const OntologyGraph& a, const OntologyGraph& b) { return same_graph(a, b); }

}  // namespace ontobuild::rdfio
