#include <doctest.h>

#include "ontobuild/classgen.hpp"
#include "ontobuild/error.hpp"
#include "ontobuild/instancegen.hpp"
#include "test_support.hpp"

using namespace ontobuild;
using namespace ontobuild::instancegen;
using ontobuild::testing::read_fixture;

namespace {

constexpr const char* kBase = "http://example.org/iomt";

std::string iri(const std::string& local) { return std::string(kBase) + "#" + local; }

const schema::SchemaModel& model() {
  static const auto m = schema::parse_schema(read_fixture("schema/requirements.xsd"));
  return m;
}

OntologyGraph classes() { return classgen::generate_schema_ontology(model(), kBase); }

std::string doc(const std::string& body) {
  return R"(<?xml version="1.0"?><requirements xmlns="urn:ontobuild:requirements">)" + body +
         "</requirements>";
}

std::string ensuring(const std::string& name, const std::string& actor,
                     const std::string& concept_name) {
  return "<ensuring_requirement><name>" + name + "</name><actor_in_charge><name>" + actor +
         "</name></actor_in_charge><ensured_concept><name>" + concept_name +
         "</name></ensured_concept></ensuring_requirement>";
}

const std::string kAnalysis = R"(
  <evaluation_requirement>
    <name>REQ</name>
    <actor_in_charge><name>manufacturer</name></actor_in_charge>
    <evaluation>
      <name>benefit-risk tradeoff analysis</name>
      <analysed_tradeoff>
        <name>benefit-risk tradeoff</name>
        <first_concept><name>benefit</name></first_concept>
        <traded_risk><name>risk</name></traded_risk>
      </analysed_tradeoff>
    </evaluation>
  </evaluation_requirement>)";

// Same structure, children written in a different order.
const std::string kAnalysisReordered = R"(
  <evaluation_requirement>
    <name>REQ</name>
    <actor_in_charge><name>manufacturer</name></actor_in_charge>
    <evaluation>
      <analysed_tradeoff>
        <traded_risk><name>risk</name></traded_risk>
        <first_concept><name>benefit</name></first_concept>
        <name>benefit-risk tradeoff</name>
      </analysed_tradeoff>
      <name>benefit-risk tradeoff analysis</name>
    </evaluation>
  </evaluation_requirement>)";

const xml::Element& find_child(const xml::Element& el, const std::string& local) {
  for (const auto& c : el.children) {
    if (c.local == local) return c;
  }
  throw std::runtime_error("no child " + local);
}

}  // namespace

TEST_CASE("fingerprints") {
  SUBCASE("same actor anywhere is equal, different name differs") {
    auto root = xml::parse(doc(ensuring("R1", "manufacturer", "data") +
                               ensuring("R2", "manufacturer", "log") +
                               ensuring("R3", "operator", "data")));
    auto a1 = fingerprint(find_child(root.children[0], "actor_in_charge"), "Actor", model());
    auto a2 = fingerprint(find_child(root.children[1], "actor_in_charge"), "Actor", model());
    auto a3 = fingerprint(find_child(root.children[2], "actor_in_charge"), "Actor", model());
    CHECK(a1 == a2);
    CHECK(a1.digest() == a2.digest());
    CHECK(a1 != a3);
  }

  SUBCASE("nested analysis is order-insensitive") {
    auto root = xml::parse(doc(kAnalysis + kAnalysisReordered));
    auto f1 = fingerprint(find_child(root.children[0], "evaluation"), "Analysis", model());
    auto f2 = fingerprint(find_child(root.children[1], "evaluation"), "Analysis", model());
    CHECK(f1 == f2);
  }

  SUBCASE("child role matters") {
    auto root = xml::parse(doc(R"(
      <ensuring_requirement><name>R</name><actor_in_charge><name>x</name></actor_in_charge>
        <ensured_action><name>a</name><input><name>d</name></input></ensured_action></ensuring_requirement>
      <ensuring_requirement><name>R</name><actor_in_charge><name>x</name></actor_in_charge>
        <ensured_action><name>a</name><output><name>d</name></output></ensured_action></ensuring_requirement>)"));
    auto f1 = fingerprint(find_child(root.children[0], "ensured_action"), "action", model());
    auto f2 = fingerprint(find_child(root.children[1], "ensured_action"), "action", model());
    CHECK(f1 != f2);
  }

  SUBCASE("explicit default equals absent") {
    auto root = xml::parse(doc(R"(
      <mitigation_requirement><name>M</name><actor_in_charge><name>x</name></actor_in_charge>
        <mitigated_risk><name>r</name><residual>false</residual></mitigated_risk>
        <mitigating_component><name>c</name></mitigating_component></mitigation_requirement>
      <mitigation_requirement><name>M</name><actor_in_charge><name>x</name></actor_in_charge>
        <mitigated_risk><name>r</name></mitigated_risk>
        <mitigating_component><name>c</name></mitigating_component></mitigation_requirement>)"));
    auto f1 = fingerprint(find_child(root.children[0], "mitigated_risk"), "Risk", model());
    auto f2 = fingerprint(find_child(root.children[1], "mitigated_risk"), "Risk", model());
    CHECK(f1 == f2);
  }

  SUBCASE("unresolvable type") {
    auto root = xml::parse(doc(ensuring("R1", "m", "d")));
    CHECK_THROWS_AS(fingerprint(root.children[0], "Nope", model()), ValidationError);
    CHECK_THROWS_AS(fingerprint(root.children[0], "Actor", model()), ValidationError);
  }
}

TEST_CASE("populate: shared actor collapses to one individual") {
  auto result = populate_instances(classes(), doc(ensuring("R1", "manufacturer", "data") +
                                                  ensuring("R2", "manufacturer", "logs") +
                                                  ensuring("R3", "manufacturer", "keys")),
                                   model());
  const auto& g = result.ontology;
  const auto& r = result.report;
  std::size_t actors = 0;
  for (const auto& [i, c] : g.instances) actors += c == iri("Actor");
  CHECK(actors == 1);
  CHECK(g.instances.at(iri("manufacturer")) == iri("Actor"));
  std::size_t refs = 0;
  for (const auto& a : g.object_assertions) {
    if (a.object == iri("manufacturer")) {
      ++refs;
      CHECK(a.property == iri("actor_in_charge"));
    }
  }
  CHECK(refs == 3);
  CHECK(r.elements_seen == 9);
  CHECK(r.instances_created == 7);
  CHECK(r.duplicates_referenced == 2);
  CHECK(r.instances_created + r.duplicates_referenced == r.elements_seen);
  CHECK(check_invariants(g).empty());

  // Choice members assert the choice-named property.
  CHECK(g.object_assertions.contains({iri("R1"), iri("EnsuringRequirement_choice"), iri("data")}));
  CHECK(g.data_assertions.contains({iri("R1"), iri("name"), {"R1", LiteralType::String}}));
}

TEST_CASE("populate: risk flags are sparse") {
  auto result = populate_instances(classes(), doc(R"(
      <mitigation_requirement><name>M</name><actor_in_charge><name>x</name></actor_in_charge>
        <mitigated_risk><name>data leak</name><residual>true</residual><accepted>false</accepted></mitigated_risk>
        <mitigating_component><name>c</name></mitigating_component></mitigation_requirement>)"),
                                   model());
  const auto& g = result.ontology;
  auto risk = iri("data_leak");
  REQUIRE(g.instances.contains(risk));
  CHECK(g.instances.at(risk) == iri("Risk"));
  std::vector<DataAssertion> flags;
  for (const auto& a : g.data_assertions) {
    if (a.subject == risk && a.property != iri("name")) flags.push_back(a);
  }
  REQUIRE(flags.size() == 1);
  CHECK(flags[0].property == iri("residual"));
  CHECK(flags[0].value == Literal{"true", LiteralType::Boolean});
}

TEST_CASE("populate: empty root list leaves the ontology unchanged") {
  auto before = classes();
  auto result = populate_instances(before, doc(""), model());
  CHECK(same_graph(before, result.ontology));
  CHECK(result.report.elements_seen == 0);
  CHECK(result.report.instances_created == 0);
  CHECK(result.report.duplicates_referenced == 0);
}

TEST_CASE("populate: idempotent and deterministic") {
  auto document = doc(ensuring("R1", "manufacturer", "data") + kAnalysis + kAnalysisReordered);
  auto first = populate_instances(classes(), document, model());
  auto second = populate_instances(first.ontology, document, model());
  CHECK(second.report.instances_created == 0);
  CHECK(same_graph(first.ontology, second.ontology));

  auto again = populate_instances(classes(), document, model());
  CHECK(same_graph(first.ontology, again.ontology));
  CHECK(first.report.instances_created <= first.report.elements_seen);
}

TEST_CASE("populate: name collisions get a suffix") {
  // Two different actors both named "manufacturer" (one carries a different event).
  auto result = populate_instances(classes(), doc(R"(
      <ensuring_requirement><name>R1</name><actor_in_charge><name>Risk</name></actor_in_charge>
        <ensured_concept><name>d</name></ensured_concept></ensuring_requirement>
      <ensuring_requirement><name>R1</name><actor_in_charge><name>m</name></actor_in_charge>
        <ensured_concept><name>d</name></ensured_concept></ensuring_requirement>)"),
                                   model());
  const auto& g = result.ontology;
  // "Risk" would pun the class IRI; "R1" is used by two distinct requirements.
  CHECK(g.instances.contains(iri("Risk_2")));
  CHECK(g.instances.contains(iri("R1")));
  CHECK(g.instances.contains(iri("R1_2")));
  CHECK(result.report.collisions.size() == 2);
}

TEST_CASE("populate: synthesized names for nameless elements") {
  auto s = schema::parse_schema(R"(<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
    <xs:element name="items" type="Items"/>
    <xs:complexType name="Items"><xs:sequence>
      <xs:element name="item" type="Item" maxOccurs="unbounded"/></xs:sequence></xs:complexType>
    <xs:complexType name="Item"><xs:sequence>
      <xs:element name="label" type="xs:string"/></xs:sequence>
      <xs:attribute name="critical" type="xs:boolean" default="false"/></xs:complexType>
    </xs:schema>)");
  auto g = classgen::generate_schema_ontology(s, kBase);
  auto result = populate_instances(
      g, R"(<items><item critical="true"><label>a</label></item><item><label>b</label></item><item critical="0"><label>b</label></item></items>)",
      s);
  CHECK(result.ontology.instances.size() == 2);
  CHECK(result.ontology.instances.contains(iri("Item_1")));
  CHECK(result.ontology.instances.contains(iri("Item_2")));
  CHECK(result.ontology.data_assertions.contains(
      {iri("Item_1"), iri("critical"), {"true", LiteralType::Boolean}}));
  CHECK(result.report.duplicates_referenced == 1);
}

TEST_CASE("invalid documents name the element path") {
  auto expect_error = [](const std::string& body, const std::string& fragment) {
    try {
      populate_instances(classes(), doc(body), model());
      FAIL("expected a validation error for: " << body);
    } catch (const ValidationError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  expect_error("<ensuring_requirement><name>R</name><actor_in_charge><name>m</name></actor_in_charge>"
               "<ensured_concept><name>d</name></ensured_concept><bogus/></ensuring_requirement>",
               "/requirements/ensuring_requirement[1]/bogus[1]");
  expect_error("<ensuring_requirement><name>R</name><ensured_concept><name>d</name></ensured_concept>"
               "</ensuring_requirement>",
               "actor_in_charge");
  expect_error("<ensuring_requirement><name>R</name><actor_in_charge><name>m</name></actor_in_charge>"
               "</ensuring_requirement>",
               "EnsuringRequirement_choice");
  expect_error("<ensuring_requirement><name>R</name><actor_in_charge><name>m</name></actor_in_charge>"
               "<ensured_concept><name>d</name></ensured_concept><ensured_action><name>a</name>"
               "</ensured_action></ensuring_requirement>",
               "at most 1");
  expect_error("<mitigation_requirement><name>M</name><actor_in_charge><name>x</name></actor_in_charge>"
               "<mitigated_risk><name>r</name><residual>maybe</residual></mitigated_risk>"
               "<mitigating_component><name>c</name></mitigating_component></mitigation_requirement>",
               "/mitigated_risk[1]/residual[1]");
  CHECK_THROWS_AS(populate_instances(classes(), "<wrong/>", model()), ValidationError);
  CHECK_THROWS_AS(populate_instances(classes(), "<requirements>", model()), ParseError);
}

TEST_CASE("report serialization") {
  auto result = populate_instances(classes(), doc(ensuring("R1", "m", "d")), model());
  auto j = to_json(result.report);
  CHECK(j["elements_seen"] == 3);
  CHECK(j["per_stage_times"].contains("parse"));
  CHECK(j["per_stage_times"].contains("populate"));
  CHECK(timing_csv({0.5, 0.25}) == "run_index,seconds\n0,0.500000000\n1,0.250000000\n");
}
