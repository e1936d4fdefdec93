#include <doctest.h>

#include "ontobuild/config.hpp"
#include "ontobuild/error.hpp"

using namespace ontobuild;
using namespace ontobuild::config;
namespace fs = std::filesystem;

TEST_CASE("full document") {
  auto c = parse(R"(
# comment line
schema_path = "schema/req.xsd"   # trailing comment
xml_path = "/abs/corpus.xml"
base_iri = "http://example.org/o#"

[oracle]
kind = "http"
endpoint = "https://llm.example/v1/chat"
model = "gpt-4o-mini"
api_key_env = "MY_KEY"
max_parallel = 8
timeout_seconds = 12.5
retries = 3
price_per_call = 3.5e-5

[blocking]
same_class = true
token_overlap = 1
skip_classes = ["Standard", "Actor",]

[pagerank]
damping = 0.9
max_iterations = 1_000
)",
                 "/cfg");
  CHECK(c.schema_path == fs::path("/cfg/schema/req.xsd"));
  CHECK(c.xml_path == fs::path("/abs/corpus.xml"));
  CHECK(c.base_iri == "http://example.org/o#");
  CHECK(c.output_dir == fs::path("/cfg/out"));
  CHECK(c.review_file == fs::path("/cfg/out/review.json"));
  CHECK(c.oracle.kind == OracleKind::Http);
  CHECK(c.oracle.model == "gpt-4o-mini");
  CHECK(c.oracle.api_key_env == "MY_KEY");
  CHECK(c.oracle.max_parallel == 8);
  CHECK(c.oracle.timeout_seconds == 12.5);
  CHECK(c.oracle.retries == 3);
  CHECK(*c.oracle.price_per_call == doctest::Approx(3.5e-5));
  CHECK(*c.blocking.token_overlap == 1);
  CHECK(c.blocking.skip_classes == std::set<std::string>{"Actor", "Standard"});
  CHECK(c.pagerank.damping == 0.9);
  CHECK(c.pagerank.tolerance == 1e-10);
  CHECK(c.pagerank.max_iterations == 1000);
  CHECK(to_json(c)["oracle"]["api_key_env"] == "MY_KEY");
}

TEST_CASE("defaults") {
  auto c = parse("");
  CHECK(c.oracle.kind == OracleKind::Stub);
  CHECK(c.pagerank.damping == 0.85);
  CHECK_FALSE(c.blocking.token_overlap.has_value());
  CHECK(c.output_dir == fs::path("out"));
}

TEST_CASE("errors") {
  CHECK_THROWS_WITH_AS(parse("base_iri = \"x\"\nschema_pth = \"x\"\n"), doctest::Contains("unknown key 'schema_pth'"), ParseError);
  try {
    parse("\n\n[oracle]\nretries = \"two\"\n");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse("base_iri = \"unterminated\n"), ParseError);
  CHECK_THROWS_AS(parse("base_iri = 'single'\n"), ParseError);
  CHECK_THROWS_AS(parse("base_iri = \"a\" extra\n"), ParseError);
  CHECK_THROWS_AS(parse("base_iri = \"a\"\nbase_iri = \"b\"\n"), ParseError);
  CHECK_THROWS_AS(parse("[oracle\n"), ParseError);
  CHECK_THROWS_WITH_AS(parse("[oracle]\napi_key = \"sk-123\"\n"), doctest::Contains("environment"), ValidationError);
  CHECK_THROWS_AS(parse("[pagerank]\ndamping = 1.0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[pagerank]\ndamping = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[oracle]\nmax_parallel = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse("[oracle]\nretries = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse("[oracle]\nkind = \"magic\"\n"), ValidationError);
  CHECK_THROWS_AS(parse("[oracle]\nkind = \"http\"\n"), ValidationError);
  CHECK_THROWS_AS(parse("[blocking]\nsame_class = false\n"), ValidationError);
  CHECK_THROWS_AS(parse("[blocking]\nskip_classes = [1]\n"), ParseError);
}
