#include "ontobuild/ontology.hpp"

#include <algorithm>

#include "ontobuild/error.hpp"

namespace ontobuild {

const char* to_string(LiteralType type) noexcept {
  switch (type) {
    case LiteralType::Boolean:
      return "boolean";
    case LiteralType::String:
      return "string";
    case LiteralType::AnyUri:
      return "anyURI";
  }
  return "string";
}

std::optional<LiteralType> literal_type_from_xsd(std::string_view xsd_name) {
  if (xsd_name == "xs:boolean" || xsd_name == "boolean") return LiteralType::Boolean;
  if (xsd_name == "xs:string" || xsd_name == "string") return LiteralType::String;
  if (xsd_name == "xs:anyURI" || xsd_name == "anyURI") return LiteralType::AnyUri;
  return std::nullopt;
}

std::string xsd_iri(LiteralType type) {
  return std::string("http://www.w3.org/2001/XMLSchema#") + to_string(type);
}

Literal make_literal(std::string lexical, LiteralType type) {
  if (type == LiteralType::Boolean) {
    if (lexical == "true" || lexical == "1") return {"true", type};
    if (lexical == "false" || lexical == "0") return {"false", type};
    throw ValidationError("invalid boolean literal '" + lexical + "'");
  }
  return {std::move(lexical), type};
}

std::string OntologyGraph::vocabulary_iri(std::string_view local) const {
  if (!base_iri.empty() && (base_iri.back() == '#' || base_iri.back() == '/')) {
    return base_iri + std::string(local);
  }
  return base_iri + "#" + std::string(local);
}

std::string OntologyGraph::ontology_iri() const { return base_iri; }

bool same_graph(const OntologyGraph& a, const OntologyGraph& b) {
  return a.base_iri == b.base_iri && a.classes == b.classes &&
         a.subclass_axioms == b.subclass_axioms && a.object_properties == b.object_properties &&
         a.data_properties == b.data_properties && a.instances == b.instances &&
         a.object_assertions == b.object_assertions && a.data_assertions == b.data_assertions &&
         a.merged_into == b.merged_into;
}

std::vector<std::string> check_invariants(const OntologyGraph& g) {
  std::vector<std::string> problems;
  const std::string prefix = g.vocabulary_iri("");
  auto in_base = [&](const std::string& iri, const char* what) {
    if (iri.size() <= prefix.size() || iri.compare(0, prefix.size(), prefix) != 0) {
      problems.push_back(std::string(what) + " <" + iri + "> is outside the base IRI");
    }
  };

  for (const auto& c : g.classes) in_base(c, "class");
  for (const auto& [sub, super] : g.subclass_axioms) {
    if (!g.classes.contains(sub) || !g.classes.contains(super)) {
      problems.push_back("subclass axiom <" + sub + "> <" + super + "> names an undeclared class");
    }
  }
  for (const auto& [p, decl] : g.object_properties) {
    in_base(p, "object property");
    if (g.data_properties.contains(p)) {
      problems.push_back("<" + p + "> is declared both as object and data property");
    }
    for (const auto& c : decl.domains) {
      if (!g.classes.contains(c)) problems.push_back("domain <" + c + "> of <" + p + "> undeclared");
    }
    for (const auto& c : decl.ranges) {
      if (!g.classes.contains(c)) problems.push_back("range <" + c + "> of <" + p + "> undeclared");
    }
  }
  for (const auto& [p, decl] : g.data_properties) {
    in_base(p, "data property");
    for (const auto& c : decl.domains) {
      if (!g.classes.contains(c)) problems.push_back("domain <" + c + "> of <" + p + "> undeclared");
    }
  }
  for (const auto& [i, c] : g.instances) {
    in_base(i, "individual");
    if (!g.classes.contains(c)) problems.push_back("individual <" + i + "> has undeclared class");
    if (g.classes.contains(i) || g.object_properties.contains(i) || g.data_properties.contains(i)) {
      problems.push_back("individual <" + i + "> collides with a vocabulary IRI");
    }
  }
  for (const auto& a : g.object_assertions) {
    if (!g.object_properties.contains(a.property)) {
      problems.push_back("assertion uses undeclared object property <" + a.property + ">");
    }
    if (!g.instances.contains(a.subject) || !g.instances.contains(a.object)) {
      problems.push_back("object assertion <" + a.subject + "> <" + a.property + "> <" + a.object +
                         "> references a missing individual");
    }
  }
  for (const auto& a : g.data_assertions) {
    if (!g.data_properties.contains(a.property)) {
      problems.push_back("assertion uses undeclared data property <" + a.property + ">");
    }
    if (!g.instances.contains(a.subject)) {
      problems.push_back("data assertion on missing individual <" + a.subject + ">");
    }
  }
  if (!g.merged_into.empty() && (g.object_properties.contains(g.merged_into_property()) ||
                                 g.data_properties.contains(g.merged_into_property()))) {
    problems.push_back("<" + g.merged_into_property() + "> is reserved for merge provenance");
  }
  for (const auto& [retired, rep] : g.merged_into) {
    in_base(retired, "retired individual");
    if (g.instances.contains(retired)) {
      problems.push_back("retired individual <" + retired + "> is still active");
    }
    if (!g.instances.contains(rep) && !g.merged_into.contains(rep)) {
      problems.push_back("merge target <" + rep + "> is unknown");
    }
  }
  return problems;
}

std::string local_part(std::string_view iri) {
  auto pos = iri.rfind('#');
  if (pos == std::string_view::npos) pos = iri.rfind('/');
  if (pos == std::string_view::npos) return std::string(iri);
  return std::string(iri.substr(pos + 1));
}

std::string display_name(std::string_view iri) {
  auto local = local_part(iri);
  std::string out;
  out.reserve(local.size());
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < local.size(); ++i) {
    char c = local[i];
    if (c == '%' && i + 2 < local.size() && hex(local[i + 1]) >= 0 && hex(local[i + 2]) >= 0) {
      out += static_cast<char>(hex(local[i + 1]) * 16 + hex(local[i + 2]));
      i += 2;
    } else if (c == '_') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string label_of(const OntologyGraph& graph, const std::string& individual) {
  auto it = graph.data_assertions.lower_bound(DataAssertion{individual, "", {}});
  for (; it != graph.data_assertions.end() && it->subject == individual; ++it) {
    if (local_part(it->property) == "name") return it->value.lexical;
  }
  return display_name(individual);
}

std::size_t assertion_degree(const OntologyGraph& graph, const std::string& individual) {
  std::size_t degree = 0;
  for (const auto& a : graph.object_assertions) {
    if (a.subject == individual) ++degree;
    if (a.object == individual) ++degree;
  }
  auto it = graph.data_assertions.lower_bound(DataAssertion{individual, "", {}});
  for (; it != graph.data_assertions.end() && it->subject == individual; ++it) ++degree;
  return degree;
}

}  // namespace ontobuild
