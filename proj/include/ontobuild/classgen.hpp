#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ontobuild/error.hpp"
#include "ontobuild/ontology.hpp"
#include "ontobuild/schema.hpp"

namespace ontobuild::classgen {

enum class IriKind { Class, Property, Instance };

/// Deterministic IRI for a local name: surrounding whitespace trimmed, inner
/// whitespace mapped to '_', everything outside [A-Za-z0-9-._~] percent-encoded.
/// Throws ValidationError for an empty or whitespace-only name.
std::string mint_iri(std::string_view base, std::string_view local, IriKind kind);

/// Raised when the schema breaks an authoring rule; carries every violation.
class AuthoringRuleError : public ValidationError {
 public:
  explicit AuthoringRuleError(std::vector<schema::RuleViolation> violations);
  const std::vector<schema::RuleViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<schema::RuleViolation> violations_;
};

/// Classes and property declarations only; no individuals.
OntologyGraph generate_schema_ontology(const schema::SchemaModel& model, std::string_view base);

nlohmann::json summary(const OntologyGraph& graph);

}  // namespace ontobuild::classgen
