#pragma once

// Turtle and RDF/XML (Protégé-style) reading and writing for OntologyGraph.
// Only named nodes are supported; blank nodes are rejected on input.

#include <string>
#include <string_view>
#include <vector>

#include "ontobuild/ontology.hpp"

namespace ontobuild::rdfio {

enum class Format { Turtle, RdfXml };

const char* to_string(Format format) noexcept;
/// "turtle"/"ttl" or "rdfxml"/"rdf"/"owl"; throws Error otherwise.
Format format_from_string(std::string_view name);

/// Throws ValidationError (listing the broken invariants) before producing
/// any output when the graph is inconsistent.
std::string serialize(const OntologyGraph& ontology, Format format);

/// Throws ParseError for malformed syntax and ValidationError for blank
/// nodes or triples outside the supported vocabulary.
OntologyGraph parse(std::string_view bytes, Format format);

bool equal(const OntologyGraph& a, const OntologyGraph& b);

namespace vocab {
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
}  // namespace vocab

// Exposed for tests.
struct Term {
  enum class Kind { Iri, Literal, Blank };
  Kind kind = Kind::Iri;
  std::string value;     // IRI, lexical form or blank label
  std::string datatype;  // literals only; empty = plain
  std::string language;  // literals only

  bool operator==(const Term&) const = default;
};

struct Triple {
  Term subject;
  std::string predicate;
  Term object;
};

std::vector<Triple> read_turtle(std::string_view bytes);
std::vector<Triple> read_rdfxml(std::string_view bytes);

/// Builds a graph from raw triples. The single owl:Ontology subject gives
/// the base IRI.
OntologyGraph interpret(const std::vector<Triple>& triples);

}  // namespace ontobuild::rdfio
