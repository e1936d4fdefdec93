#include "ontobuild/instancegen.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>

#include "ontobuild/classgen.hpp"
#include "ontobuild/error.hpp"

namespace ontobuild::instancegen {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool has_text(const xml::Element& el) {
  return el.text.find_first_not_of(" \t\r\n") != std::string::npos;
}

// Normalized simple value, or nullopt when it equals the declared default.
std::optional<std::string> simple_value(std::string_view raw, std::string_view type_name,
                                        const std::optional<std::string>& default_value) {
  auto value = trim(raw);
  if (type_name == schema::kBoolean) value = make_literal(value, LiteralType::Boolean).lexical;
  if (default_value && value == *default_value) return std::nullopt;
  return value;
}

std::string child_path(const std::string& parent, const xml::Element& child, int index) {
  return parent + "/" + child.local + "[" + std::to_string(index) + "]";
}

// Sibling index (1-based) of each child among same-named siblings.
std::vector<int> sibling_indices(const xml::Element& el) {
  std::map<std::string, int> counts;
  std::vector<int> out;
  out.reserve(el.children.size());
  for (const auto& c : el.children) out.push_back(++counts[c.local]);
  return out;
}

bool is_foreign_attribute(const xml::Attribute& a) { return !a.ns.empty(); }

class Validator {
 public:
  explicit Validator(const schema::SchemaModel& model) : model_(model) {}

  void check_root(const xml::Element& root) {
    const auto& decl = model_.root_element;
    if (root.local != decl.name) {
      throw ValidationError("document root is <" + root.local + ">, schema expects <" + decl.name +
                            ">");
    }
    if (decl.type_name.empty() || schema::is_builtin(decl.type_name)) {
      throw ValidationError("schema root element has no named complex type");
    }
    check_complex(root, decl.type_name, "/" + root.local);
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& why) {
    throw ValidationError("invalid document at " + path + ": " + why);
  }

  void check_simple(const xml::Element& el, const std::string& type_name, const std::string& path) {
    if (!el.children.empty()) fail(path, "simple-typed element has child elements");
    for (const auto& a : el.attributes) {
      if (!is_foreign_attribute(a)) fail(path, "simple-typed element has attribute '" + a.local + "'");
    }
    if (type_name == schema::kBoolean) {
      auto v = trim(el.text);
      if (v != "true" && v != "false" && v != "1" && v != "0") {
        fail(path, "'" + v + "' is not a boolean");
      }
    }
  }

  void check_complex(const xml::Element& el, const std::string& type_name,
                     const std::string& path) {
    if (has_text(el)) fail(path, "unexpected text in complex-typed element");

    auto attrs = schema::attribute_closure(model_, type_name);
    for (const auto& a : el.attributes) {
      if (is_foreign_attribute(a)) continue;
      auto it = std::find_if(attrs.begin(), attrs.end(),
                             [&](const auto& d) { return d.name == a.local; });
      if (it == attrs.end()) fail(path, "undeclared attribute '" + a.local + "'");
      if (it->type_name == schema::kBoolean) {
        auto v = trim(a.value);
        if (v != "true" && v != "false" && v != "1" && v != "0") {
          fail(path + "/@" + a.local, "'" + v + "' is not a boolean");
        }
      }
    }
    for (const auto& d : attrs) {
      if (d.required && !el.attr(d.name)) fail(path, "missing required attribute '" + d.name + "'");
    }

    std::map<std::string, std::uint32_t> counts;
    auto indices = sibling_indices(el);
    for (std::size_t i = 0; i < el.children.size(); ++i) {
      const auto& child = el.children[i];
      auto cpath = child_path(path, child, indices[i]);
      auto binding = schema::find_element(model_, child.local, type_name);
      if (!binding) {
        std::string candidates;
        for (const auto& b : schema::element_closure(model_, type_name)) {
          candidates += (candidates.empty() ? "" : ", ") + b.decl->name;
        }
        fail(cpath, "element not declared in type '" + type_name + "' (expected one of: " +
                        candidates + ")");
      }
      ++counts[child.local];
      const auto& child_type = binding->decl->type_name;
      if (child_type.empty()) fail(cpath, "element has an anonymous type");
      if (schema::is_builtin(child_type)) {
        check_simple(child, child_type, cpath);
      } else {
        check_complex(child, child_type, cpath);
      }
    }

    // Occurrence constraints. Choice alternatives are counted per choice group.
    std::map<std::pair<std::string, std::string>, std::uint32_t> choice_totals;
    auto closure = schema::element_closure(model_, type_name);
    for (const auto& b : closure) {
      auto n = counts.contains(b.decl->name) ? counts.at(b.decl->name) : 0u;
      if (b.choice_name) {
        choice_totals[{b.declaring_type, *b.choice_name}] += n;
        continue;
      }
      if (n < b.decl->min_occurs) {
        fail(path, "expected at least " + std::to_string(b.decl->min_occurs) + " <" +
                       b.decl->name + ">, found " + std::to_string(n));
      }
      if (b.decl->max_occurs != schema::kUnbounded && n > b.decl->max_occurs) {
        fail(path, "expected at most " + std::to_string(b.decl->max_occurs) + " <" +
                       b.decl->name + ">, found " + std::to_string(n));
      }
    }
    for (const auto& [key, total] : choice_totals) {
      const auto* group = find_choice(key.first, key.second);
      if (!group) continue;
      std::uint32_t min_total = group->min_occurs;
      for (const auto& alt : group->alternatives) {
        min_total = std::min(min_total, group->min_occurs * alt.min_occurs);
      }
      if (total < min_total) {
        fail(path, "choice '" + key.second + "' requires one of its alternatives");
      }
      bool bounded = group->max_occurs != schema::kUnbounded;
      std::uint32_t alt_max = 0;
      for (const auto& alt : group->alternatives) {
        if (alt.max_occurs == schema::kUnbounded) bounded = false;
        alt_max = std::max(alt_max, alt.max_occurs);
      }
      if (bounded && total > group->max_occurs * alt_max) {
        fail(path, "choice '" + key.second + "' allows at most " +
                       std::to_string(group->max_occurs * alt_max) + " alternatives, found " +
                       std::to_string(total));
      }
    }
  }

  const schema::ChoiceGroup* find_choice(const std::string& type_name, const std::string& choice) {
    const schema::ChoiceGroup* found = nullptr;
    std::function<void(const std::vector<schema::Particle>&)> walk =
        [&](const std::vector<schema::Particle>& ps) {
          for (const auto& p : ps) {
            if (const auto* c = std::get_if<schema::ChoiceGroup>(&p.variant)) {
              if (c->annotation_name == choice && !found) found = c;
            } else if (const auto* s = std::get_if<schema::Sequence>(&p.variant)) {
              walk(*s);
            }
          }
        };
    walk(model_.at(type_name).particles);
    return found;
  }

  const schema::SchemaModel& model_;
};

struct Parts {
  std::vector<std::pair<std::string, std::string>> attributes;  // declared, non-default
  std::vector<std::pair<std::string, std::string>> simple;       // (element, value)
  std::vector<std::pair<std::string, std::string>> complex;      // (element, child canonical)
};

std::string canonical_form(const std::string& type_name, Parts parts) {
  std::sort(parts.attributes.begin(), parts.attributes.end());
  std::sort(parts.simple.begin(), parts.simple.end());
  std::sort(parts.complex.begin(), parts.complex.end());
  nlohmann::json form = nlohmann::json::array();
  form.push_back(type_name);
  form.push_back(parts.attributes);
  form.push_back(parts.simple);
  form.push_back(parts.complex);
  return form.dump();
}

void collect_attributes(const xml::Element& el, const std::string& type_name,
                        const schema::SchemaModel& model,
                        std::vector<std::pair<std::string, std::string>>& out) {
  auto decls = schema::attribute_closure(model, type_name);
  for (const auto& d : decls) {
    auto raw = el.attr(d.name);
    if (!raw) continue;
    if (auto v = simple_value(*raw, d.type_name, d.default_value)) out.emplace_back(d.name, *v);
  }
}

schema::ElementBinding require_binding(const schema::SchemaModel& model, const xml::Element& child,
                                       std::string_view type_name) {
  auto binding = schema::find_element(model, child.local, type_name);
  if (!binding) {
    // Produces the error listing candidates.
    schema::resolve_element_type(model, child.local, type_name);
  }
  return *binding;
}

class Populator {
 public:
  Populator(OntologyGraph& ontology, const schema::SchemaModel& model, BuildReport& report)
      : graph_(ontology), model_(model), report_(report) {}

  void run(const xml::Element& root) {
    auto indices = sibling_indices(root);
    for (std::size_t i = 0; i < root.children.size(); ++i) {
      const auto& child = root.children[i];
      auto binding = require_binding(model_, child, model_.root_element.type_name);
      if (schema::is_builtin(binding.decl->type_name)) continue;
      visit(child, binding.decl->type_name);
    }
  }

 private:
  struct Visit {
    std::string iri;
    std::string canonical;
  };

  Visit visit(const xml::Element& el, const std::string& type_name) {
    Parts parts;
    collect_attributes(el, type_name, model_, parts.attributes);

    std::vector<std::pair<std::string, std::string>> object_links;  // (property, child iri)
    std::vector<std::tuple<std::string, std::string, LiteralType>> data_values;
    std::optional<std::string> name_value;

    for (const auto& child : el.children) {
      auto binding = require_binding(model_, child, type_name);
      const auto& child_type = binding.decl->type_name;
      if (schema::is_builtin(child_type)) {
        auto v = simple_value(child.text, child_type, binding.decl->default_value);
        if (!v) continue;
        parts.simple.emplace_back(child.local, *v);
        data_values.emplace_back(child.local, *v, *literal_type_from_xsd(child_type));
        if (child.local == "name" && !v->empty()) name_value = *v;
      } else {
        auto sub = visit(child, child_type);
        parts.complex.emplace_back(child.local, sub.canonical);
        object_links.emplace_back(binding.choice_name.value_or(child.local), sub.iri);
      }
    }
    for (const auto& [n, v] : parts.attributes) {
      auto decls = schema::attribute_closure(model_, type_name);
      auto it = std::find_if(decls.begin(), decls.end(), [&](const auto& d) { return d.name == n; });
      data_values.emplace_back(n, v, *literal_type_from_xsd(it->type_name));
    }

    auto canonical = canonical_form(type_name, std::move(parts));
    ++report_.elements_seen;
    if (auto it = graph_.fingerprint_index.find(canonical); it != graph_.fingerprint_index.end()) {
      ++report_.duplicates_referenced;
      return {it->second, canonical};
    }

    auto iri = assign_iri(type_name, name_value);
    graph_.instances[iri] = vocab(type_name);
    for (const auto& [prop, value, type] : data_values) {
      graph_.data_assertions.insert({iri, vocab(prop), make_literal(value, type)});
    }
    for (const auto& [prop, target] : object_links) {
      graph_.object_assertions.insert({iri, vocab(prop), target});
    }
    graph_.fingerprint_index.emplace(canonical, iri);
    ++report_.instances_created;
    return {iri, canonical};
  }

  std::string vocab(std::string_view local) const {
    return classgen::mint_iri(graph_.base_iri, local, classgen::IriKind::Class);
  }

  bool taken(const std::string& iri) const {
    return graph_.instances.contains(iri) || graph_.classes.contains(iri) ||
           graph_.object_properties.contains(iri) || graph_.data_properties.contains(iri) ||
           graph_.merged_into.contains(iri);
  }

  std::string assign_iri(const std::string& type_name, const std::optional<std::string>& name) {
    std::string base_name;
    if (name) {
      base_name = *name;
    } else {
      base_name = type_name + " " + std::to_string(++ordinals_[type_name]);
    }
    auto iri = classgen::mint_iri(graph_.base_iri, base_name, classgen::IriKind::Instance);
    if (!taken(iri)) return iri;
    for (int k = 2;; ++k) {
      auto candidate = iri + "_" + std::to_string(k);
      if (!taken(candidate)) {
        report_.collisions.push_back({base_name, candidate});
        return candidate;
      }
    }
  }

  OntologyGraph& graph_;
  const schema::SchemaModel& model_;
  BuildReport& report_;
  std::map<std::string, int> ordinals_;
};

std::string canonical_of(const xml::Element& el, const std::string& type_name,
                         const schema::SchemaModel& model) {
  Parts parts;
  collect_attributes(el, type_name, model, parts.attributes);
  for (const auto& child : el.children) {
    auto binding = require_binding(model, child, type_name);
    const auto& child_type = binding.decl->type_name;
    if (schema::is_builtin(child_type)) {
      if (auto v = simple_value(child.text, child_type, binding.decl->default_value)) {
        parts.simple.emplace_back(child.local, *v);
      }
    } else {
      parts.complex.emplace_back(child.local, canonical_of(child, child_type, model));
    }
  }
  return canonical_form(type_name, std::move(parts));
}

}  // namespace

std::string Fingerprint::digest() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Fingerprint fingerprint(const xml::Element& element, std::string_view governing_type,
                        const schema::SchemaModel& model) {
  const auto* type = model.find(governing_type);
  if (!type || type->kind != schema::TypeKind::Complex) {
    throw ValidationError("cannot fingerprint <" + element.local + ">: '" +
                          std::string(governing_type) + "' is not a complex type");
  }
  return {canonical_of(element, std::string(governing_type), model)};
}

void validate_document(const xml::Element& root, const schema::SchemaModel& model) {
  Validator(model).check_root(root);
}

Population populate_instances(OntologyGraph ontology, std::string_view document,
                              const schema::SchemaModel& model) {
  BuildReport report;
  auto start = Clock::now();

  auto t = Clock::now();
  auto root = xml::parse(document);
  report.per_stage_times["parse"] = seconds_since(t);

  t = Clock::now();
  validate_document(root, model);
  report.per_stage_times["validate"] = seconds_since(t);

  t = Clock::now();
  Populator(ontology, model, report).run(root);
  report.per_stage_times["populate"] = seconds_since(t);

  report.wall_time = seconds_since(start);
  return {std::move(ontology), std::move(report)};
}

nlohmann::json to_json(const BuildReport& report) {
  auto collisions = nlohmann::json::array();
  for (const auto& c : report.collisions) {
    collisions.push_back({{"name", c.name}, {"assigned_iri", c.assigned_iri}});
  }
  return {{"elements_seen", report.elements_seen},
          {"instances_created", report.instances_created},
          {"duplicates_referenced", report.duplicates_referenced},
          {"wall_time", report.wall_time},
          {"per_stage_times", report.per_stage_times},
          {"name_collisions", collisions}};
}

std::string timing_csv(const std::vector<double>& samples) {
  std::string out = "run_index,seconds\n";
  char buf[64];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9f\n", i, samples[i]);
    out += buf;
  }
  return out;
}

}  // namespace ontobuild::instancegen
