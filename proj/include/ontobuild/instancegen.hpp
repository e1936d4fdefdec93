#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ontobuild/ontology.hpp"
#include "ontobuild/schema.hpp"
#include "ontobuild/xml.hpp"

namespace ontobuild::instancegen {

/// Canonical structural form of an element occurrence. Two occurrences are
/// the same concept iff their canonical forms are equal.
struct Fingerprint {
  std::string canonical;

  /// Short stable hash of the canonical form, for display only.
  std::string digest() const;

  auto operator<=>(const Fingerprint&) const = default;
};

/// Canonical form: governing type; attributes sorted by name; simple-typed
/// children as name=value sorted; complex-typed children as
/// element-name=fingerprint sorted. Values equal to the schema default are
/// left out, booleans are normalized and text is trimmed.
/// Throws ValidationError when a child's type cannot be resolved.
Fingerprint fingerprint(const xml::Element& element, std::string_view governing_type,
                        const schema::SchemaModel& model);

struct NameCollision {
  std::string name;
  std::string assigned_iri;
};

struct BuildReport {
  std::size_t elements_seen = 0;  // complex-typed element occurrences below the root
  std::size_t instances_created = 0;
  std::size_t duplicates_referenced = 0;
  double wall_time = 0.0;  // seconds
  std::map<std::string, double> per_stage_times;
  std::vector<NameCollision> collisions;
};

/// Checks the document against the schema; throws ValidationError naming the
/// offending element path (e.g. /requirements/ensuring_requirement[2]/actor_in_charge).
void validate_document(const xml::Element& root, const schema::SchemaModel& model);

struct Population {
  OntologyGraph ontology;
  BuildReport report;
};

/// Adds one individual per structurally distinct complex element of the
/// document; repeated structures reference the first individual.
Population populate_instances(OntologyGraph ontology, std::string_view document,
                              const schema::SchemaModel& model);

nlohmann::json to_json(const BuildReport& report);

/// `run_index,seconds` rows for plotting a build-time histogram.
std::string timing_csv(const std::vector<double>& samples);

}  // namespace ontobuild::instancegen
