#pragma once

// Constrained XSD subset: named complex types, single-inheritance extension,
// sequences, annotated choices, element and simple-typed attribute
// declarations over xs:boolean / xs:string / xs:anyURI.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ontobuild::schema {

inline constexpr std::string_view kXsdNamespace = "http://www.w3.org/2001/XMLSchema";

inline constexpr std::string_view kBoolean = "xs:boolean";
inline constexpr std::string_view kString = "xs:string";
inline constexpr std::string_view kAnyUri = "xs:anyURI";

inline constexpr std::uint32_t kUnbounded = std::numeric_limits<std::uint32_t>::max();

bool is_builtin(std::string_view type_name) noexcept;

struct ElementDecl {
  std::string name;
  std::string type_name;  // complex type name, a builtin ("xs:boolean"...), or "" if anonymous
  std::uint32_t min_occurs = 1;
  std::uint32_t max_occurs = 1;  // kUnbounded for "unbounded"
  std::optional<std::string> default_value;
  std::string location;

  bool operator==(const ElementDecl&) const = default;
};

struct ChoiceGroup {
  std::string annotation_name;  // empty when the choice carries no appinfo
  std::vector<ElementDecl> alternatives;
  std::uint32_t min_occurs = 1;
  std::uint32_t max_occurs = 1;
  std::string location;

  bool operator==(const ChoiceGroup&) const = default;
};

struct Particle;
using Sequence = std::vector<Particle>;

struct Particle {
  std::variant<ElementDecl, ChoiceGroup, Sequence> variant;

  bool operator==(const Particle&) const = default;
};

struct AttributeDecl {
  std::string name;
  std::string type_name;  // always a builtin
  bool required = false;
  std::optional<std::string> default_value;

  bool operator==(const AttributeDecl&) const = default;
};

enum class TypeKind { Complex, BuiltinSimple };

struct TypeDef {
  std::string name;  // empty for anonymous inline types
  std::optional<std::string> base;
  std::vector<Particle> particles;
  std::vector<AttributeDecl> attributes;
  TypeKind kind = TypeKind::Complex;
  bool is_abstract = false;
  std::string location;

  /// Child elements declared directly on this type with xs:boolean type.
  std::vector<std::pair<std::string, std::optional<std::string>>> boolean_flags() const;

  bool operator==(const TypeDef&) const = default;
};

struct SchemaModel {
  std::string target_namespace;
  std::map<std::string, TypeDef> types;  // named types, builtins included
  ElementDecl root_element;
  std::vector<TypeDef> anonymous_types;  // inline complex types (Rule 1 offenders)

  const TypeDef* find(std::string_view name) const;
  const TypeDef& at(std::string_view name) const;
  std::size_t complex_type_count() const;

  bool operator==(const SchemaModel&) const = default;
};

enum class Rule { NamelessType, UnnamedChoice, RootNotList };

const char* to_string(Rule rule) noexcept;

struct RuleViolation {
  Rule rule;
  std::string location;
  std::string message;

  bool operator==(const RuleViolation&) const = default;
};

/// Where an element name is declared within a type closure.
struct ElementBinding {
  const ElementDecl* decl = nullptr;
  std::string declaring_type;
  std::optional<std::string> choice_name;  // set when the element is a choice alternative
};

/// Parses XSD bytes. Throws ParseError for ill-formed XML and ValidationError
/// for constructs outside the supported subset or dangling type references.
SchemaModel parse_schema(std::string_view document);

std::vector<RuleViolation> validate_authoring_rules(const SchemaModel& model);

/// Governing type of `element_name` when it appears inside `enclosing_type`.
/// Walks the extension chain from the most-derived type to its bases.
std::string resolve_element_type(const SchemaModel& model, std::string_view element_name,
                                 std::string_view enclosing_type);

/// Same lookup, returning the declaration itself. nullopt when undeclared.
std::optional<ElementBinding> find_element(const SchemaModel& model,
                                           std::string_view element_name,
                                           std::string_view enclosing_type);

/// Element declarations visible from a type, base types first, with their
/// owning choice name. Shadowed base declarations are omitted.
std::vector<ElementBinding> element_closure(const SchemaModel& model, std::string_view type_name);

/// Attribute declarations visible from a type (most-derived wins).
std::vector<AttributeDecl> attribute_closure(const SchemaModel& model,
                                             std::string_view type_name);

/// Extension chain starting at `type_name` and ending at the root base.
std::vector<std::string> extension_chain(const SchemaModel& model, std::string_view type_name);

nlohmann::json to_json(const RuleViolation& violation);
nlohmann::json to_json(const std::vector<RuleViolation>& violations);
/// Structural debug dump; stable for equal models.
nlohmann::json dump(const SchemaModel& model);

}  // namespace ontobuild::schema
