#include "ontobuild/schema.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "ontobuild/error.hpp"
#include "ontobuild/xml.hpp"

namespace ontobuild::schema {
namespace {

using xml::Element;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void unsupported(const Element& el, const std::string& path, const std::string& what) {
  throw ValidationError("schema: unsupported construct " + what + " at " + path + " (line " +
                        std::to_string(el.line) + ")");
}

bool is_xsd(const Element& el, std::string_view local) { return el.is(kXsdNamespace, local); }

std::uint32_t parse_occurs(const Element& el, const std::string& path, std::string_view attr,
                           std::uint32_t fallback) {
  auto value = el.attr(attr);
  if (!value) return fallback;
  auto text = trim(*value);
  if (text == "unbounded") {
    if (attr == "minOccurs") unsupported(el, path, "minOccurs=\"unbounded\"");
    return kUnbounded;
  }
  std::uint32_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    unsupported(el, path, std::string(attr) + "=\"" + text + "\"");
  }
  return n;
}

void check_attributes(const Element& el, const std::string& path,
                      std::initializer_list<std::string_view> allowed) {
  for (const auto& a : el.attributes) {
    if (!a.ns.empty()) continue;  // foreign-namespace attributes are ignored
    if (std::find(allowed.begin(), allowed.end(), a.local) == allowed.end()) {
      unsupported(el, path, "attribute '" + a.local + "' on xs:" + el.local);
    }
  }
}

class SchemaReader {
 public:
  SchemaModel read(const Element& root) {
    if (!is_xsd(root, "schema")) {
      throw ValidationError("schema: document root is not xs:schema");
    }
    model_.target_namespace = root.attr("targetNamespace").value_or("");
    for (auto name : {kBoolean, kString, kAnyUri}) {
      TypeDef t;
      t.name = std::string(name);
      t.kind = TypeKind::BuiltinSimple;
      model_.types.emplace(t.name, std::move(t));
    }

    int element_count = 0;
    for (const auto& child : root.children) {
      if (is_xsd(child, "annotation")) continue;
      if (is_xsd(child, "complexType")) {
        auto name = child.attr("name");
        std::string path = "/schema/complexType[@name='" + name.value_or("") + "']";
        if (!name || trim(*name).empty()) {
          unsupported(child, "/schema/complexType", "global complexType without name");
        }
        TypeDef type = read_complex_type(child, path);
        type.name = trim(*name);
        if (model_.types.contains(type.name)) {
          throw ValidationError("schema: duplicate type '" + type.name + "' at " + path);
        }
        model_.types.emplace(type.name, std::move(type));
        continue;
      }
      if (is_xsd(child, "element")) {
        ++element_count;
        std::string path = "/schema/element[@name='" + child.attr("name").value_or("") + "']";
        if (element_count > 1) unsupported(child, path, "second global element");
        model_.root_element = read_element(child, path);
        continue;
      }
      unsupported(child, "/schema/" + child.local, "xs:" + child.local);
    }
    if (element_count == 0) {
      throw ValidationError("schema: no global root element declared");
    }
    check_references();
    return std::move(model_);
  }

 private:
  TypeDef read_complex_type(const Element& el, const std::string& path) {
    check_attributes(el, path, {"name", "abstract", "mixed"});
    if (auto mixed = el.attr("mixed"); mixed && trim(*mixed) != "false") {
      unsupported(el, path, "mixed content");
    }
    TypeDef type;
    type.location = path;
    type.is_abstract = trim(el.attr("abstract").value_or("false")) == "true";
    for (const auto& child : el.children) {
      if (is_xsd(child, "annotation")) continue;
      if (is_xsd(child, "complexContent")) {
        read_complex_content(child, path + "/complexContent", type);
        continue;
      }
      read_content_particle(child, path, type);
    }
    return type;
  }

  void read_complex_content(const Element& el, const std::string& path, TypeDef& type) {
    check_attributes(el, path, {});
    bool seen = false;
    for (const auto& child : el.children) {
      if (is_xsd(child, "annotation")) continue;
      if (!is_xsd(child, "extension") || seen) unsupported(child, path, "xs:" + child.local);
      seen = true;
      std::string ext_path = path + "/extension";
      check_attributes(child, ext_path, {"base"});
      auto base = child.attr("base");
      if (!base) unsupported(child, ext_path, "extension without base");
      auto base_name = resolve_type(child, ext_path, *base);
      if (is_builtin(base_name)) unsupported(child, ext_path, "extension of a simple type");
      type.base = base_name;
      for (const auto& grand : child.children) {
        if (is_xsd(grand, "annotation")) continue;
        read_content_particle(grand, ext_path, type);
      }
    }
    if (!seen) unsupported(el, path, "empty xs:complexContent");
  }

  // sequence / choice / attribute directly under a type (or its extension).
  void read_content_particle(const Element& el, const std::string& path, TypeDef& type) {
    if (is_xsd(el, "sequence")) {
      auto seq = read_sequence(el, path + "/sequence");
      for (auto& p : seq) type.particles.push_back(std::move(p));
      return;
    }
    if (is_xsd(el, "choice")) {
      int index = ++choice_counter_[path];
      type.particles.push_back(
          {read_choice(el, path + "/choice[" + std::to_string(index) + "]")});
      return;
    }
    if (is_xsd(el, "attribute")) {
      type.attributes.push_back(read_attribute(el, path));
      return;
    }
    unsupported(el, path, "xs:" + el.local);
  }

  Sequence read_sequence(const Element& el, const std::string& path) {
    check_attributes(el, path, {"minOccurs", "maxOccurs"});
    if (parse_occurs(el, path, "minOccurs", 1) != 1 ||
        parse_occurs(el, path, "maxOccurs", 1) != 1) {
      unsupported(el, path, "occurrence bounds on xs:sequence");
    }
    Sequence seq;
    int choices = 0;
    int sequences = 0;
    for (const auto& child : el.children) {
      if (is_xsd(child, "annotation")) continue;
      if (is_xsd(child, "element")) {
        auto name = child.attr("name").value_or("");
        seq.push_back({read_element(child, path + "/element[@name='" + name + "']")});
      } else if (is_xsd(child, "choice")) {
        seq.push_back({read_choice(child, path + "/choice[" + std::to_string(++choices) + "]")});
      } else if (is_xsd(child, "sequence")) {
        seq.push_back(
            {read_sequence(child, path + "/sequence[" + std::to_string(++sequences) + "]")});
      } else {
        unsupported(child, path, "xs:" + child.local);
      }
    }
    return seq;
  }

  ChoiceGroup read_choice(const Element& el, const std::string& path) {
    check_attributes(el, path, {"minOccurs", "maxOccurs"});
    ChoiceGroup choice;
    choice.location = path;
    choice.min_occurs = parse_occurs(el, path, "minOccurs", 1);
    choice.max_occurs = parse_occurs(el, path, "maxOccurs", 1);
    for (const auto& child : el.children) {
      if (is_xsd(child, "annotation")) {
        for (const auto& info : child.children) {
          if (is_xsd(info, "appinfo") && choice.annotation_name.empty()) {
            choice.annotation_name = trim(info.text);
          }
        }
        continue;
      }
      if (!is_xsd(child, "element")) unsupported(child, path, "xs:" + child.local + " in xs:choice");
      auto name = child.attr("name").value_or("");
      auto decl = read_element(child, path + "/element[@name='" + name + "']");
      if (is_builtin(decl.type_name)) {
        unsupported(child, decl.location, "simple-typed choice alternative");
      }
      choice.alternatives.push_back(std::move(decl));
    }
    if (choice.alternatives.empty()) unsupported(el, path, "empty xs:choice");
    return choice;
  }

  ElementDecl read_element(const Element& el, const std::string& path) {
    if (el.attr("ref")) unsupported(el, path, "element reference (ref=)");
    check_attributes(el, path, {"name", "type", "minOccurs", "maxOccurs", "default"});
    ElementDecl decl;
    decl.location = path;
    auto name = el.attr("name");
    if (!name || trim(*name).empty()) unsupported(el, path, "element without name");
    decl.name = trim(*name);
    decl.min_occurs = parse_occurs(el, path, "minOccurs", 1);
    decl.max_occurs = parse_occurs(el, path, "maxOccurs", 1);
    if (decl.max_occurs != kUnbounded && decl.min_occurs > decl.max_occurs) {
      throw ValidationError("schema: minOccurs > maxOccurs at " + path);
    }
    decl.default_value = el.attr("default");

    const Element* inline_type = nullptr;
    for (const auto& child : el.children) {
      if (is_xsd(child, "annotation")) continue;
      if (is_xsd(child, "complexType") && !inline_type) {
        inline_type = &child;
        continue;
      }
      unsupported(child, path, "inline xs:" + child.local);
    }
    auto type_attr = el.attr("type");
    if (type_attr && inline_type) unsupported(el, path, "both type= and an inline type");
    if (inline_type) {
      if (inline_type->attr("name")) unsupported(*inline_type, path, "named inline complexType");
      TypeDef anon = read_complex_type(*inline_type, path + "/complexType");
      model_.anonymous_types.push_back(std::move(anon));
      decl.type_name.clear();
    } else if (type_attr) {
      decl.type_name = resolve_type(el, path, *type_attr);
    } else {
      unsupported(el, path, "element without type");
    }
    if (decl.default_value && !is_builtin(decl.type_name)) {
      unsupported(el, path, "default value on a complex-typed element");
    }
    if (decl.default_value && decl.type_name == kBoolean) {
      auto v = trim(*decl.default_value);
      if (v != "true" && v != "false" && v != "1" && v != "0") {
        throw ValidationError("schema: invalid boolean default '" + v + "' at " + path);
      }
      decl.default_value = (v == "true" || v == "1") ? "true" : "false";
    }
    return decl;
  }

  AttributeDecl read_attribute(const Element& el, const std::string& parent_path) {
    auto name = el.attr("name").value_or("");
    std::string path = parent_path + "/attribute[@name='" + name + "']";
    if (el.attr("ref")) unsupported(el, path, "attribute reference (ref=)");
    check_attributes(el, path, {"name", "type", "use", "default"});
    for (const auto& child : el.children) {
      if (!is_xsd(child, "annotation")) unsupported(child, path, "inline xs:" + child.local);
    }
    if (trim(name).empty()) unsupported(el, path, "attribute without name");
    auto type_attr = el.attr("type");
    if (!type_attr) unsupported(el, path, "attribute without type");
    AttributeDecl decl;
    decl.name = trim(name);
    decl.type_name = resolve_type(el, path, *type_attr);
    if (!is_builtin(decl.type_name)) unsupported(el, path, "complex-typed attribute");
    auto use = trim(el.attr("use").value_or("optional"));
    if (use != "optional" && use != "required") unsupported(el, path, "use=\"" + use + "\"");
    decl.required = use == "required";
    decl.default_value = el.attr("default");
    return decl;
  }

  std::string resolve_type(const Element& el, const std::string& path, std::string_view qname) {
    auto text = trim(qname);
    auto resolved = el.resolve_qname(text);
    if (!resolved) {
      throw ValidationError("schema: unbound namespace prefix in type '" + text + "' at " + path);
    }
    auto& [ns, local] = *resolved;
    if (ns == kXsdNamespace) {
      std::string builtin = "xs:" + local;
      if (!is_builtin(builtin)) unsupported(el, path, "builtin type " + builtin);
      return builtin;
    }
    if (ns != model_.target_namespace) {
      throw ValidationError("schema: type '" + text + "' at " + path +
                            " is outside the target namespace");
    }
    referenced_.emplace_back(local, path);
    return local;
  }

  void check_references() {
    for (const auto& [name, where] : referenced_) {
      if (!model_.types.contains(name)) {
        throw ValidationError("schema: unknown type '" + name + "' referenced at " + where);
      }
    }
    // Extension graph must be acyclic.
    for (const auto& [name, type] : model_.types) {
      std::set<std::string> seen{name};
      const TypeDef* cur = &type;
      while (cur->base) {
        if (!seen.insert(*cur->base).second) {
          throw ValidationError("schema: extension cycle through type '" + name + "'");
        }
        cur = &model_.types.at(*cur->base);
      }
    }
  }

  SchemaModel model_;
  std::vector<std::pair<std::string, std::string>> referenced_;
  std::map<std::string, int> choice_counter_;
};

void walk_elements(const std::vector<Particle>& particles,
                   const std::function<void(const ElementDecl&, const ChoiceGroup*)>& fn) {
  for (const auto& p : particles) {
    if (const auto* e = std::get_if<ElementDecl>(&p.variant)) {
      fn(*e, nullptr);
    } else if (const auto* c = std::get_if<ChoiceGroup>(&p.variant)) {
      for (const auto& alt : c->alternatives) fn(alt, c);
    } else {
      walk_elements(std::get<Sequence>(p.variant), fn);
    }
  }
}

void walk_choices(const std::vector<Particle>& particles,
                  const std::function<void(const ChoiceGroup&)>& fn) {
  for (const auto& p : particles) {
    if (const auto* c = std::get_if<ChoiceGroup>(&p.variant)) {
      fn(*c);
    } else if (const auto* s = std::get_if<Sequence>(&p.variant)) {
      walk_choices(*s, fn);
    }
  }
}

// Root content must flatten into element declarations only.
bool is_element_list(const std::vector<Particle>& particles, std::size_t& count) {
  for (const auto& p : particles) {
    if (std::holds_alternative<ElementDecl>(p.variant)) {
      ++count;
    } else if (const auto* s = std::get_if<Sequence>(&p.variant)) {
      if (!is_element_list(*s, count)) return false;
    } else {
      return false;
    }
  }
  return true;
}

nlohmann::json dump_particles(const std::vector<Particle>& particles);

nlohmann::json dump_element(const ElementDecl& e) {
  nlohmann::json j{{"name", e.name},
                   {"type", e.type_name},
                   {"min_occurs", e.min_occurs},
                   {"max_occurs", e.max_occurs == kUnbounded ? nlohmann::json("unbounded")
                                                             : nlohmann::json(e.max_occurs)}};
  if (e.default_value) j["default"] = *e.default_value;
  return j;
}

nlohmann::json dump_particles(const std::vector<Particle>& particles) {
  auto out = nlohmann::json::array();
  for (const auto& p : particles) {
    if (const auto* e = std::get_if<ElementDecl>(&p.variant)) {
      out.push_back({{"element", dump_element(*e)}});
    } else if (const auto* c = std::get_if<ChoiceGroup>(&p.variant)) {
      auto alts = nlohmann::json::array();
      for (const auto& a : c->alternatives) alts.push_back(dump_element(a));
      out.push_back({{"choice", {{"name", c->annotation_name}, {"alternatives", alts}}}});
    } else {
      out.push_back({{"sequence", dump_particles(std::get<Sequence>(p.variant))}});
    }
  }
  return out;
}

nlohmann::json dump_type(const TypeDef& t) {
  nlohmann::json j{{"name", t.name},
                   {"kind", t.kind == TypeKind::Complex ? "complex" : "builtin"},
                   {"abstract", t.is_abstract},
                   {"particles", dump_particles(t.particles)}};
  if (t.base) j["base"] = *t.base;
  auto attrs = nlohmann::json::array();
  for (const auto& a : t.attributes) {
    attrs.push_back({{"name", a.name}, {"type", a.type_name}, {"required", a.required}});
    if (a.default_value) attrs.back()["default"] = *a.default_value;
  }
  j["attributes"] = attrs;
  return j;
}

}  // namespace

bool is_builtin(std::string_view type_name) noexcept {
  return type_name == kBoolean || type_name == kString || type_name == kAnyUri;
}

std::vector<std::pair<std::string, std::optional<std::string>>> TypeDef::boolean_flags() const {
  std::vector<std::pair<std::string, std::optional<std::string>>> flags;
  walk_elements(particles, [&](const ElementDecl& e, const ChoiceGroup*) {
    if (e.type_name == kBoolean) flags.emplace_back(e.name, e.default_value);
  });
  return flags;
}

const TypeDef* SchemaModel::find(std::string_view name) const {
  auto it = types.find(std::string(name));
  return it == types.end() ? nullptr : &it->second;
}

const TypeDef& SchemaModel::at(std::string_view name) const {
  const auto* t = find(name);
  if (!t) throw ValidationError("schema: unknown type '" + std::string(name) + "'");
  return *t;
}

std::size_t SchemaModel::complex_type_count() const {
  return static_cast<std::size_t>(std::count_if(types.begin(), types.end(), [](const auto& kv) {
    return kv.second.kind == TypeKind::Complex;
  }));
}

const char* to_string(Rule rule) noexcept {
  switch (rule) {
    case Rule::NamelessType:
      return "NamelessType";
    case Rule::UnnamedChoice:
      return "UnnamedChoice";
    case Rule::RootNotList:
      return "RootNotList";
  }
  return "Unknown";
}

SchemaModel parse_schema(std::string_view document) {
  auto root = xml::parse(document);
  return SchemaReader{}.read(root);
}

std::vector<RuleViolation> validate_authoring_rules(const SchemaModel& model) {
  std::vector<RuleViolation> violations;

  for (const auto& anon : model.anonymous_types) {
    violations.push_back({Rule::NamelessType, anon.location,
                          "inline complexType has no name; declare it globally and reference it"});
  }

  auto check_choices = [&](const TypeDef& type) {
    walk_choices(type.particles, [&](const ChoiceGroup& choice) {
      if (choice.annotation_name.empty()) {
        violations.push_back({Rule::UnnamedChoice, choice.location,
                              "xs:choice carries no xs:annotation/xs:appinfo name"});
      }
    });
  };
  for (const auto& [name, type] : model.types) check_choices(type);
  for (const auto& anon : model.anonymous_types) check_choices(anon);

  const auto& root = model.root_element;
  if (root.name.empty() && model.complex_type_count() == 0) return violations;  // empty model
  auto root_not_list = [&](const std::string& why) {
    violations.push_back({Rule::RootNotList, root.location, why});
  };
  if (root.type_name.empty()) {
    // Anonymous root type: already a NamelessType; still check its shape.
    const TypeDef* anon = nullptr;
    for (const auto& t : model.anonymous_types) {
      if (t.location == root.location + "/complexType") anon = &t;
    }
    std::size_t count = 0;
    if (anon && (!is_element_list(anon->particles, count) || count == 0)) {
      root_not_list("root element content is not a sequence of elements");
    }
  } else if (is_builtin(root.type_name)) {
    root_not_list("root element '" + root.name + "' has simple type " + root.type_name);
  } else {
    std::size_t count = 0;
    bool ok = true;
    for (const auto& type_name : extension_chain(model, root.type_name)) {
      ok = ok && is_element_list(model.at(type_name).particles, count);
    }
    if (!ok || count == 0) {
      root_not_list("type '" + root.type_name + "' of root element '" + root.name +
                    "' is not a sequence of elements");
    }
  }
  return violations;
}

std::vector<std::string> extension_chain(const SchemaModel& model, std::string_view type_name) {
  std::vector<std::string> chain;
  const TypeDef* cur = &model.at(type_name);
  chain.push_back(cur->name);
  while (cur->base) {
    cur = &model.at(*cur->base);
    chain.push_back(cur->name);
  }
  return chain;
}

std::optional<ElementBinding> find_element(const SchemaModel& model,
                                           std::string_view element_name,
                                           std::string_view enclosing_type) {
  for (const auto& type_name : extension_chain(model, enclosing_type)) {
    std::optional<ElementBinding> found;
    walk_elements(model.at(type_name).particles,
                  [&](const ElementDecl& e, const ChoiceGroup* choice) {
                    if (found || e.name != element_name) return;
                    found = ElementBinding{&e, type_name,
                                           choice ? std::optional(choice->annotation_name)
                                                  : std::nullopt};
                  });
    if (found) return found;
  }
  return std::nullopt;
}

std::string resolve_element_type(const SchemaModel& model, std::string_view element_name,
                                 std::string_view enclosing_type) {
  if (auto found = find_element(model, element_name, enclosing_type)) {
    return found->decl->type_name;
  }
  std::string candidates;
  for (const auto& b : element_closure(model, enclosing_type)) {
    if (!candidates.empty()) candidates += ", ";
    candidates += b.decl->name;
  }
  throw ValidationError("schema: element '" + std::string(element_name) +
                        "' is not declared in type '" + std::string(enclosing_type) +
                        "' (candidates: " + candidates + ")");
}

std::vector<ElementBinding> element_closure(const SchemaModel& model,
                                            std::string_view type_name) {
  auto chain = extension_chain(model, type_name);
  std::set<std::string> shadowed;
  std::vector<std::vector<ElementBinding>> layers;
  for (const auto& name : chain) {
    std::vector<ElementBinding> layer;
    walk_elements(model.at(name).particles, [&](const ElementDecl& e, const ChoiceGroup* c) {
      if (shadowed.contains(e.name)) return;
      layer.push_back(
          {&e, name, c ? std::optional(c->annotation_name) : std::nullopt});
    });
    for (const auto& b : layer) shadowed.insert(b.decl->name);
    layers.push_back(std::move(layer));
  }
  std::vector<ElementBinding> out;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    for (auto& b : *it) out.push_back(std::move(b));
  }
  return out;
}

std::vector<AttributeDecl> attribute_closure(const SchemaModel& model,
                                             std::string_view type_name) {
  std::vector<AttributeDecl> out;
  std::set<std::string> seen;
  for (const auto& name : extension_chain(model, type_name)) {
    for (const auto& a : model.at(name).attributes) {
      if (seen.insert(a.name).second) out.push_back(a);
    }
  }
  return out;
}

nlohmann::json to_json(const RuleViolation& v) {
  return {{"rule", to_string(v.rule)}, {"location", v.location}, {"message", v.message}};
}

nlohmann::json to_json(const std::vector<RuleViolation>& violations) {
  auto out = nlohmann::json::array();
  for (const auto& v : violations) out.push_back(to_json(v));
  return out;
}

nlohmann::json dump(const SchemaModel& model) {
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [name, t] : model.types) {
    if (t.kind == TypeKind::Complex) types[name] = dump_type(t);
  }
  auto anon = nlohmann::json::array();
  for (const auto& t : model.anonymous_types) anon.push_back(dump_type(t));
  return {{"target_namespace", model.target_namespace},
          {"root_element", dump_element(model.root_element)},
          {"types", types},
          {"anonymous_types", anon}};
}

}  // namespace ontobuild::schema
