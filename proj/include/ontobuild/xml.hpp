#pragma once

// Small namespace-aware XML DOM on top of expat. Only what the schema,
// instance and RDF/XML readers need: elements, attributes, character data
// and in-scope namespace bindings. Comments and processing instructions are
// dropped.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ontobuild::xml {

inline constexpr std::string_view kXmlNamespace = "http://www.w3.org/XML/1998/namespace";

struct Attribute {
  std::string ns;  // empty for unqualified attributes
  std::string local;
  std::string value;
};

using NamespaceScope = std::map<std::string, std::string>;  // prefix ("" = default) -> uri

struct Element {
  std::string ns;
  std::string local;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;  // character data directly inside this element, concatenated
  int line = 0;
  int column = 0;
  std::shared_ptr<const NamespaceScope> scope;

  /// Unqualified attribute lookup.
  std::optional<std::string> attr(std::string_view local_name) const;
  std::optional<std::string> attr(std::string_view ns_uri, std::string_view local_name) const;

  bool is(std::string_view ns_uri, std::string_view local_name) const {
    return ns == ns_uri && local == local_name;
  }

  /// Splits `prefix:local` and maps the prefix through the in-scope bindings.
  /// Returns nullopt when the prefix is not bound.
  std::optional<std::pair<std::string, std::string>> resolve_qname(std::string_view qname) const;

  /// "name[line:col]" style position for diagnostics.
  std::string where() const;
};

/// Parses a complete document and returns its root element.
/// Throws ParseError carrying expat's line/column on malformed input.
Element parse(std::string_view document);

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

}  // namespace ontobuild::xml
