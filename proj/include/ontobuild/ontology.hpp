#pragma once

// In-memory OWL ontology restricted to named nodes: classes, subclass
// axioms, object/data property declarations, typed individuals and their
// property assertions. Every component is an ordered set so that iteration,
// serialization and comparison are deterministic.

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ontobuild {

enum class LiteralType { Boolean, String, AnyUri };

const char* to_string(LiteralType type) noexcept;
std::optional<LiteralType> literal_type_from_xsd(std::string_view xsd_name);
/// Full XML Schema datatype IRI for a literal type.
std::string xsd_iri(LiteralType type);

struct Literal {
  std::string lexical;
  LiteralType type = LiteralType::String;

  auto operator<=>(const Literal&) const = default;
};

/// Booleans are normalized to "true"/"false"; other lexicals pass through.
/// Throws ValidationError for an invalid boolean lexical form.
Literal make_literal(std::string lexical, LiteralType type);

struct ObjectPropertyDecl {
  std::set<std::string> domains;
  std::set<std::string> ranges;

  auto operator<=>(const ObjectPropertyDecl&) const = default;
};

struct DataPropertyDecl {
  std::set<std::string> domains;
  std::set<LiteralType> ranges;

  auto operator<=>(const DataPropertyDecl&) const = default;
};

struct ObjectAssertion {
  std::string subject;
  std::string property;
  std::string object;

  auto operator<=>(const ObjectAssertion&) const = default;
};

struct DataAssertion {
  std::string subject;
  std::string property;
  Literal value;

  auto operator<=>(const DataAssertion&) const = default;
};

struct OntologyGraph {
  std::string base_iri;
  std::set<std::string> classes;
  std::set<std::pair<std::string, std::string>> subclass_axioms;  // (sub, super)
  std::map<std::string, ObjectPropertyDecl> object_properties;
  std::map<std::string, DataPropertyDecl> data_properties;
  std::map<std::string, std::string> instances;  // individual -> class
  std::set<ObjectAssertion> object_assertions;
  std::set<DataAssertion> data_assertions;
  // Retired individual -> the representative it was merged into.
  std::map<std::string, std::string> merged_into;

  // Structural fingerprint -> individual. Build-time index used for
  // deduplication; not part of the RDF graph and ignored by equality.
  std::map<std::string, std::string> fingerprint_index;

  /// base_iri + "#" + local (no "#" added when base ends in '#' or '/').
  std::string vocabulary_iri(std::string_view local) const;
  /// IRI of the ontology header node (the base IRI itself).
  std::string ontology_iri() const;
  std::string merged_into_property() const { return vocabulary_iri("mergedInto"); }
};

/// Semantic equality: compares every RDF-visible component, ignores the
/// fingerprint index.
bool same_graph(const OntologyGraph& a, const OntologyGraph& b);

/// Structural invariant check; returns human-readable problems (empty = ok).
std::vector<std::string> check_invariants(const OntologyGraph& graph);

/// Fragment after the last '#' (or '/' when there is no '#').
std::string local_part(std::string_view iri);
/// Percent-decodes a local part and maps '_' back to spaces.
std::string display_name(std::string_view iri);
/// Human label of an individual: its `name` data value when present,
/// otherwise the decoded local part.
std::string label_of(const OntologyGraph& graph, const std::string& individual);

/// Total number of assertions in which the individual is subject or object.
std::size_t assertion_degree(const OntologyGraph& graph, const std::string& individual);

}  // namespace ontobuild
