#include "ontobuild/classgen.hpp"

#include <cctype>

namespace ontobuild::classgen {
namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

std::string join_messages(const std::vector<schema::RuleViolation>& violations) {
  std::string msg = "classgen: schema breaks authoring rules:";
  for (const auto& v : violations) {
    msg += std::string("\n  ") + schema::to_string(v.rule) + " at " + v.location;
  }
  return msg;
}

class Generator {
 public:
  Generator(const schema::SchemaModel& model, std::string_view base) : model_(model) {
    graph_.base_iri = std::string(base);
  }

  OntologyGraph run() {
    for (const auto& [name, type] : model_.types) {
      if (type.kind != schema::TypeKind::Complex) continue;
      graph_.classes.insert(class_iri(name));
    }
    for (const auto& [name, type] : model_.types) {
      if (type.kind != schema::TypeKind::Complex) continue;
      if (type.base) graph_.subclass_axioms.emplace(class_iri(name), class_iri(*type.base));
      declare_particles(class_iri(name), type.particles);
      for (const auto& attr : type.attributes) {
        declare_data(class_iri(name), attr.name, attr.type_name);
      }
    }
    return std::move(graph_);
  }

 private:
  std::string class_iri(std::string_view type_name) const {
    return mint_iri(graph_.base_iri, type_name, IriKind::Class);
  }
  std::string property_iri(std::string_view name) const {
    return mint_iri(graph_.base_iri, name, IriKind::Property);
  }

  void declare_particles(const std::string& domain, const std::vector<schema::Particle>& particles) {
    for (const auto& p : particles) {
      if (const auto* e = std::get_if<schema::ElementDecl>(&p.variant)) {
        if (schema::is_builtin(e->type_name)) {
          declare_data(domain, e->name, e->type_name);
        } else {
          declare_object(domain, e->name, {e->type_name});
        }
      } else if (const auto* c = std::get_if<schema::ChoiceGroup>(&p.variant)) {
        std::vector<std::string> ranges;
        for (const auto& alt : c->alternatives) ranges.push_back(alt.type_name);
        declare_object(domain, c->annotation_name, ranges);
      } else {
        declare_particles(domain, std::get<schema::Sequence>(p.variant));
      }
    }
  }

  void declare_object(const std::string& domain, const std::string& name,
                      const std::vector<std::string>& range_types) {
    auto iri = property_iri(name);
    if (graph_.data_properties.contains(iri)) {
      throw ValidationError("classgen: '" + name + "' is used both for a simple and a complex element");
    }
    auto& decl = graph_.object_properties[iri];
    decl.domains.insert(domain);
    for (const auto& t : range_types) decl.ranges.insert(class_iri(t));
  }

  void declare_data(const std::string& domain, const std::string& name,
                    const std::string& type_name) {
    auto iri = property_iri(name);
    if (graph_.object_properties.contains(iri)) {
      throw ValidationError("classgen: '" + name + "' is used both for a simple and a complex element");
    }
    auto& decl = graph_.data_properties[iri];
    decl.domains.insert(domain);
    decl.ranges.insert(*literal_type_from_xsd(type_name));
  }

  const schema::SchemaModel& model_;
  OntologyGraph graph_;
};

}  // namespace

std::string mint_iri(std::string_view base, std::string_view local, IriKind) {
  auto b = local.begin();
  auto e = local.end();
  while (b != e && is_space(static_cast<unsigned char>(*b))) ++b;
  while (e != b && is_space(static_cast<unsigned char>(*(e - 1)))) --e;
  if (b == e) throw ValidationError("cannot mint an IRI from an empty or blank name");

  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string encoded;
  for (auto it = b; it != e; ++it) {
    auto c = static_cast<unsigned char>(*it);
    if (is_space(c)) {
      encoded += '_';
    } else if (is_unreserved(c)) {
      encoded += static_cast<char>(c);
    } else {
      encoded += '%';
      encoded += kHex[c >> 4];
      encoded += kHex[c & 0xF];
    }
  }
  std::string iri(base);
  if (iri.empty() || (iri.back() != '#' && iri.back() != '/')) iri += '#';
  return iri + encoded;
}

AuthoringRuleError::AuthoringRuleError(std::vector<schema::RuleViolation> violations)
    : ValidationError(join_messages(violations)), violations_(std::move(violations)) {}

OntologyGraph generate_schema_ontology(const schema::SchemaModel& model, std::string_view base) {
  if (auto violations = schema::validate_authoring_rules(model); !violations.empty()) {
    throw AuthoringRuleError(std::move(violations));
  }
  return Generator(model, base).run();
}

nlohmann::json summary(const OntologyGraph& graph) {
  return {{"base_iri", graph.base_iri},
          {"classes", graph.classes.size()},
          {"subclass_axioms", graph.subclass_axioms.size()},
          {"object_properties", graph.object_properties.size()},
          {"data_properties", graph.data_properties.size()},
          {"properties", graph.object_properties.size() + graph.data_properties.size()},
          {"instances", graph.instances.size()},
          {"object_assertions", graph.object_assertions.size()},
          {"data_assertions", graph.data_assertions.size()}};
}

}  // namespace ontobuild::classgen
