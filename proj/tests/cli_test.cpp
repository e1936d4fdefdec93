#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "ontobuild/cli.hpp"
#include "ontobuild/rdfio.hpp"
#include "test_support.hpp"

using namespace ontobuild;
using namespace ontobuild::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

struct Pipeline {
  ScratchDir dir{"cli"};
  fs::path config;

  explicit Pipeline(const std::string& schema = "schema/requirements.xsd", const std::string& extra = "") {
    config = dir.path() / "pipeline.toml";
    auto f = [](const std::string& rel) { return fixture(rel).generic_string(); };
    write_file(config, "schema_path = \"" + f(schema) + "\"\n" +
                           "xml_path = \"" + f("corpus/corpus.xml") + "\"\n" +
                           "vault_root = \"" + f("vault") + "\"\n" +
                           "output_dir = \"out\"\n" + extra +
                           "[oracle]\nkind = \"stub\"\nstub_table = \"" + f("corpus/stub_oracle.json") + "\"\n" +
                           "backoff_seconds = 0\nprice_per_call = 0.001\n" +
                           "[eval]\nground_truth = \"" + f("corpus/ground_truth.json") + "\"\n");
  }

  Run operator()(std::vector<std::string> args) const {
    args.insert(args.begin(), {"--config", config.string()});
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  fs::path out(const std::string& name) const { return dir.path() / "out" / name; }
  json report(const std::string& name) const { return json::parse(slurp(out(name))); }
};

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  std::ostringstream out, err;
  CHECK(cli::run({}, out, err) == cli::kExitUsage);
  CHECK(cli::run({"--config", "x.toml", "frobnicate"}, out, err) == cli::kExitUsage);
  CHECK(cli::run({"--config", "x.toml", "build"}, out, err) == cli::kExitUsage);
  CHECK(cli::run({"--config", "/nonexistent.toml", "schema", "check"}, out, err) == cli::kExitUsage);
  CHECK(cli::run({"--help"}, out, err) == cli::kExitOk);

  Pipeline p;
  auto r = p(words("refine candidates"));
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("ontology.ttl") != std::string::npos);
  CHECK(r.err.find("build instances") != std::string::npos);

  Pipeline missing("schema/absent.xsd");
  r = missing(words("schema check"));
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("absent.xsd") != std::string::npos);

  ScratchDir d("cli-bad-config");
  write_file(d.path() / "bad.toml", "bogus_key = 1\n");
  CHECK(cli::run({"--config", (d.path() / "bad.toml").string(), "schema", "check"}, out, err) == cli::kExitUsage);
}

TEST_CASE("schema check") {
  Pipeline clean;
  CHECK(clean(words("schema check")).code == cli::kExitOk);
  CHECK(clean.report("schema_check_report.json")["document_valid"] == true);

  Pipeline bad("schema/rule1_nameless_type.xsd");
  CHECK(bad(words("schema check")).code == cli::kExitFailure);
  auto r = bad.report("schema_check_report.json");
  CHECK(r["status"] == "failed");
  REQUIRE(r["violations"].size() == 1);
  CHECK(r["violations"][0]["rule"] == "NamelessType");

  CHECK(bad(words("build classes")).code == cli::kExitFailure);
  CHECK_FALSE(fs::exists(bad.out("ontology_classes.ttl")));
}

TEST_CASE("build all: counts and determinism") {
  Pipeline p;
  REQUIRE(p(words("build all")).code == cli::kExitOk);
  auto expected = json::parse(read_fixture("corpus/expected_counts.json"));
  auto r = p.report("build_all_report.json");
  CHECK(r["elements_seen"] == expected["elements_seen"]);
  CHECK(r["instances_created"] == expected["unique_fingerprints"]);
  CHECK(r["duplicates_referenced"] == expected["duplicates_referenced"]);
  CHECK(r["duplicates_referenced"].get<int>() > 0);

  auto first = slurp(p.out("ontology.ttl"));
  REQUIRE(p(words("build all")).code == cli::kExitOk);
  CHECK(slurp(p.out("ontology.ttl")) == first);

  for (const auto& e : fs::recursive_directory_iterator(p.dir.path() / "out")) {
    CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
  }
}

TEST_CASE("refine: unreviewed file, apply, revert") {
  Pipeline p;
  for (auto cmd : {"build all", "refine candidates", "refine judge", "refine cliques", "refine review-export"}) {
    REQUIRE(p(words(cmd)).code == cli::kExitOk);
  }
  auto r = p(words("refine apply"));
  CHECK(r.code == cli::kExitFailure);
  CHECK(r.err.find("no approved cliques") != std::string::npos);
  CHECK(p.report("refine_apply_report.json")["error"].get<std::string>().find("no approved cliques") == 0);

  REQUIRE(p(words("refine review-export --approve-all")).code == cli::kExitOk);
  REQUIRE(p(words("refine apply")).code == cli::kExitOk);
  auto expected = json::parse(read_fixture("corpus/expected_refine.json"));
  auto applied = p.report("refine_apply_report.json");
  CHECK(applied["retired"] == expected["retired"]);
  CHECK(applied["reduction_ratio"].get<double>() == doctest::Approx(expected["reduction_ratio"].get<double>()));

  auto log = json::parse(slurp(p.out("merge_log.json")));
  std::size_t entries = log["entries"].size();
  CHECK(entries == expected["cliques"].get<std::size_t>());
  for (std::size_t k = entries; k-- > 0;) REQUIRE(p({"refine", "revert", std::to_string(k)}).code == cli::kExitOk);
  auto original = rdfio::parse(slurp(p.out("ontology.ttl")), rdfio::Format::Turtle);
  auto restored = rdfio::parse(slurp(p.out("ontology_refined.ttl")), rdfio::Format::Turtle);
  CHECK(rdfio::equal(original, restored));
  CHECK(p(words("refine revert 0")).code == cli::kExitFailure);

  REQUIRE(p(words("eval pairwise")).code == cli::kExitOk);
  auto e = p.report("eval_pairwise.json");
  CHECK(e["tp"] == expected["tp"]);
  CHECK(e["fp"] == expected["fp"]);
  CHECK(e["fn"] == expected["fn"]);
  CHECK(e["tn"] == expected["tn"]);
  CHECK(e["invalid_judgments"] == expected["invalid"]);
  CHECK(e["total_cost"].get<double>() == doctest::Approx(0.001 * expected["candidate_pairs"].get<double>()));

  REQUIRE(p(words("eval latency")).code == cli::kExitOk);
  CHECK(slurp(p.out("latency_histogram.csv")).starts_with("bin_start_seconds,count\n"));
  REQUIRE(p(words("eval grouping")).code == cli::kExitOk);
}

TEST_CASE("export and vault commands") {
  Pipeline p;
  REQUIRE(p(words("build all")).code == cli::kExitOk);
  REQUIRE(p(words("export rdfxml")).code == cli::kExitOk);
  REQUIRE(p(words("export turtle")).code == cli::kExitOk);
  auto ttl = rdfio::parse(slurp(p.out("export/ontology.ttl")), rdfio::Format::Turtle);
  auto owl = rdfio::parse(slurp(p.out("export/ontology.owl")), rdfio::Format::RdfXml);
  CHECK(rdfio::equal(ttl, owl));

  auto scan = p(words("vault scan"));
  CHECK(scan.code == cli::kExitFailure);  // the fixture has two unresolved links
  CHECK(p.report("vault_scan_report.json")["violations"] == 2);
  CHECK(p(words("vault rank")).code == cli::kExitOk);
  CHECK(slurp(p.out("pagerank.csv")).starts_with("note_id,score\n"));
  CHECK(p(words("vault context manufacturer --depth 1")).code == cli::kExitOk);
  CHECK(fs::exists(p.out("context_manufacturer.json")));
  CHECK(p(words("vault context nobody")).code == cli::kExitFailure);
}
