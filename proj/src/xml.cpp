#include "ontobuild/xml.hpp"

#include <expat.h>

#include "ontobuild/error.hpp"

namespace ontobuild {

const char* to_string(Severity severity) noexcept {
  switch (severity) {
    case Severity::Warning:
      return "warning";
    case Severity::Violation:
      return "violation";
    case Severity::Error:
      return "error";
  }
  return "unknown";
}

}  // namespace ontobuild

namespace ontobuild::xml {
namespace {

constexpr char kSeparator = ' ';

std::pair<std::string, std::string> split_expanded(const char* name) {
  std::string_view full(name);
  auto pos = full.find(kSeparator);
  if (pos == std::string_view::npos) return {"", std::string(full)};
  return {std::string(full.substr(0, pos)), std::string(full.substr(pos + 1))};
}

struct Builder {
  XML_Parser parser = nullptr;
  std::vector<Element*> stack;
  std::optional<Element> root;
  std::shared_ptr<const NamespaceScope> scope = std::make_shared<NamespaceScope>();
  std::vector<std::shared_ptr<const NamespaceScope>> scope_stack;
  NamespaceScope pending;
  bool have_pending = false;

  static void on_ns_start(void* data, const XML_Char* prefix, const XML_Char* uri) {
    auto* self = static_cast<Builder*>(data);
    self->pending[prefix ? prefix : ""] = uri ? uri : "";
    self->have_pending = true;
  }

  static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* self = static_cast<Builder*>(data);
    self->scope_stack.push_back(self->scope);
    if (self->have_pending) {
      auto next = std::make_shared<NamespaceScope>(*self->scope);
      for (auto& [prefix, uri] : self->pending) (*next)[prefix] = uri;
      self->scope = std::move(next);
      self->pending.clear();
      self->have_pending = false;
    }

    Element element;
    auto [ns, local] = split_expanded(name);
    element.ns = std::move(ns);
    element.local = std::move(local);
    element.line = static_cast<int>(XML_GetCurrentLineNumber(self->parser));
    element.column = static_cast<int>(XML_GetCurrentColumnNumber(self->parser)) + 1;
    element.scope = self->scope;
    for (int i = 0; attrs[i] != nullptr; i += 2) {
      auto [ans, alocal] = split_expanded(attrs[i]);
      element.attributes.push_back({std::move(ans), std::move(alocal), attrs[i + 1]});
    }

    if (self->stack.empty()) {
      self->root = std::move(element);
      self->stack.push_back(&*self->root);
    } else {
      auto& children = self->stack.back()->children;
      children.push_back(std::move(element));
      self->stack.push_back(&children.back());
    }
  }

  static void on_end(void* data, const XML_Char*) {
    auto* self = static_cast<Builder*>(data);
    self->stack.pop_back();
    self->scope = self->scope_stack.back();
    self->scope_stack.pop_back();
  }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto* self = static_cast<Builder*>(data);
    if (!self->stack.empty()) self->stack.back()->text.append(s, static_cast<std::size_t>(len));
  }
};

struct ParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

std::optional<std::string> Element::attr(std::string_view local_name) const {
  return attr("", local_name);
}

std::optional<std::string> Element::attr(std::string_view ns_uri,
                                         std::string_view local_name) const {
  for (const auto& a : attributes) {
    if (a.ns == ns_uri && a.local == local_name) return a.value;
  }
  return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> Element::resolve_qname(
    std::string_view qname) const {
  std::string prefix;
  std::string local(qname);
  if (auto pos = qname.find(':'); pos != std::string_view::npos) {
    prefix = std::string(qname.substr(0, pos));
    local = std::string(qname.substr(pos + 1));
  }
  if (prefix == "xml") return std::make_pair(std::string(kXmlNamespace), local);
  if (!scope) return prefix.empty() ? std::optional(std::make_pair(std::string(), local))
                                    : std::nullopt;
  auto it = scope->find(prefix);
  if (it == scope->end()) {
    if (prefix.empty()) return std::make_pair(std::string(), local);
    return std::nullopt;
  }
  return std::make_pair(it->second, local);
}

std::string Element::where() const {
  return local + "[" + std::to_string(line) + ":" + std::to_string(column) + "]";
}

Element parse(std::string_view document) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(
      XML_ParserCreateNS(nullptr, kSeparator));
  if (!parser) throw Error("xml: cannot allocate parser");

  Builder builder;
  builder.parser = parser.get();
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);
  XML_SetStartNamespaceDeclHandler(parser.get(), &Builder::on_ns_start);

  if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) ==
      XML_STATUS_ERROR) {
    throw ParseError(std::string("xml: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                     static_cast<int>(XML_GetCurrentLineNumber(parser.get())),
                     static_cast<int>(XML_GetCurrentColumnNumber(parser.get())) + 1);
  }
  if (!builder.root) throw ParseError("xml: document has no root element");
  return std::move(*builder.root);
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '\r':
        out += "&#13;";  // a raw CR would be normalized away by the reader
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\n':
        out += "&#10;";
        break;
      case '\r':
        out += "&#13;";
        break;
      case '\t':
        out += "&#9;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace ontobuild::xml
