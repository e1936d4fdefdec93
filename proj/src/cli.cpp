#include "ontobuild/cli.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ontobuild/classgen.hpp"
#include "ontobuild/config.hpp"
#include "ontobuild/error.hpp"
#include "ontobuild/eval.hpp"
#include "ontobuild/fsutil.hpp"
#include "ontobuild/instancegen.hpp"
#include "ontobuild/rdfio.hpp"
#include "ontobuild/refine.hpp"
#include "ontobuild/schema.hpp"
#include "ontobuild/vault.hpp"
#include "ontobuild/xml.hpp"

namespace ontobuild::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Missing input file or directory; reported as a usage error.
class MissingInput : public Error {
 public:
  using Error::Error;
};

// The stage ran but found problems (rule violations, unresolved links...).
struct StageOutcome {
  json report = json::object();
  bool failed = false;
};

struct Context {
  config::PipelineConfig cfg;
  std::ostream& out;

  fs::path artifact(const std::string& name) const { return cfg.output_dir / name; }

  void write(const fs::path& path, std::string_view content) const {
    fsutil::write_file_atomic(path, content);
    out << "wrote " << path.generic_string() << '\n';
  }
  void write_json(const fs::path& path, const json& j) const { write(path, j.dump(2) + "\n"); }
};

fs::path need_path(const fs::path& p, const char* key) {
  if (p.empty()) throw MissingInput("config key " + std::string(key) + " is not set");
  if (!fs::exists(p)) throw MissingInput("missing input " + p.generic_string() + " (" + key + ")");
  return p;
}

fs::path need_artifact(const Context& ctx, const std::string& name, const char* producer) {
  fs::path p = ctx.artifact(name);
  if (!fs::exists(p)) {
    throw MissingInput("missing input " + p.generic_string() + "; run `" + producer + "` first");
  }
  return p;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(fsutil::read_file(p));
  } catch (const json::parse_error& e) {
    throw ParseError(p.generic_string() + ": " + e.what());
  }
}

OntologyGraph read_ontology(const fs::path& p) { return rdfio::parse(fsutil::read_file(p), rdfio::Format::Turtle); }

schema::SchemaModel load_schema(const Context& ctx) {
  return schema::parse_schema(fsutil::read_file(need_path(ctx.cfg.schema_path, "schema_path")));
}

// ---- vault ----

StageOutcome vault_scan(const Context& ctx) {
  auto g = vault::scan_vault(need_path(ctx.cfg.vault_root, "vault_root"));
  ctx.write_json(ctx.artifact("vault_graph.json"), vault::to_json(g));
  StageOutcome o;
  auto j = vault::to_json(g);
  o.report = {{"notes", j["note_count"]}, {"links", j["link_count"]}, {"edges", j["edge_count"]},
              {"violations", j["violation_count"]}, {"diagnostics", j["diagnostics"]}};
  o.failed = j["violation_count"].get<std::size_t>() > 0;
  return o;
}

StageOutcome vault_populate(const Context& ctx) {
  fs::path root = need_path(ctx.cfg.vault_root, "vault_root");
  auto r = vault::populate_concept_notes(vault::scan_vault(root), root);
  StageOutcome o;
  o.report = vault::to_json(r);
  o.failed = !r.diagnostics.empty();
  return o;
}

StageOutcome vault_rank(const Context& ctx) {
  auto g = vault::scan_vault(need_path(ctx.cfg.vault_root, "vault_root"));
  vault::PageRankParams p{ctx.cfg.pagerank.damping, ctx.cfg.pagerank.tolerance, ctx.cfg.pagerank.max_iterations, false};
  auto t = vault::pagerank(g, p);
  ctx.write_json(ctx.artifact("pagerank.json"), vault::to_json(t));
  ctx.write(ctx.artifact("pagerank.csv"), vault::rank_csv(t));
  StageOutcome o;
  o.report = {{"notes", t.scores.size()}, {"iterations", t.iterations}, {"converged", t.converged}};
  return o;
}

StageOutcome vault_context(const Context& ctx, const std::string& concept_id, std::size_t depth) {
  auto g = vault::scan_vault(need_path(ctx.cfg.vault_root, "vault_root"));
  auto b = vault::collect_context(g, concept_id, depth);
  std::string stem = "context_" + local_part(classgen::mint_iri("", b.concept_id, classgen::IriKind::Instance));
  ctx.write_json(ctx.artifact(stem + ".json"), vault::to_json(b));
  ctx.write(ctx.artifact(stem + ".md"), b.text());
  StageOutcome o;
  o.report = {{"concept", b.concept_id}, {"depth", depth}, {"sections", b.sections.size()}};
  return o;
}

// ---- schema / build ----

StageOutcome schema_check(const Context& ctx) {
  auto model = load_schema(ctx);
  auto violations = schema::validate_authoring_rules(model);
  StageOutcome o;
  o.report = {{"complex_types", model.complex_type_count()}, {"violations", schema::to_json(violations)}};
  o.failed = !violations.empty();
  if (!ctx.cfg.xml_path.empty() && violations.empty()) {
    auto doc = xml::parse(fsutil::read_file(need_path(ctx.cfg.xml_path, "xml_path")));
    try {
      instancegen::validate_document(doc, model);
      o.report["document_valid"] = true;
    } catch (const ValidationError& e) {
      o.report["document_valid"] = false;
      o.report["document_error"] = e.what();
      o.failed = true;
    }
  }
  return o;
}

StageOutcome build_classes(const Context& ctx) {
  auto model = load_schema(ctx);
  StageOutcome o;
  try {
    auto g = classgen::generate_schema_ontology(model, ctx.cfg.base_iri);
    ctx.write(ctx.artifact("ontology_classes.ttl"), rdfio::serialize(g, rdfio::Format::Turtle));
    o.report = classgen::summary(g);
  } catch (const classgen::AuthoringRuleError& e) {
    o.report = {{"violations", schema::to_json(e.violations())}};
    o.failed = true;
  }
  return o;
}

StageOutcome build_instances(const Context& ctx) {
  auto model = load_schema(ctx);
  auto classes = read_ontology(need_artifact(ctx, "ontology_classes.ttl", "build classes"));
  auto doc = fsutil::read_file(need_path(ctx.cfg.xml_path, "xml_path"));
  auto pop = instancegen::populate_instances(std::move(classes), doc, model);
  ctx.write(ctx.artifact("ontology.ttl"), rdfio::serialize(pop.ontology, rdfio::Format::Turtle));
  // Timings differ run to run, so they live in their own file.
  ctx.write_json(ctx.artifact("build_timing.json"),
                 {{"wall_time_seconds", pop.report.wall_time}, {"per_stage_seconds", pop.report.per_stage_times}});
  StageOutcome o;
  o.report = instancegen::to_json(pop.report);
  o.report.erase("wall_time");
  o.report.erase("per_stage_times");
  o.report["individuals"] = pop.ontology.instances.size();
  return o;
}

// ---- refine ----

std::unique_ptr<refine::Oracle> make_oracle(const Context& ctx) {
  const auto& oc = ctx.cfg.oracle;
  if (oc.kind == config::OracleKind::Http) {
    return std::make_unique<refine::HttpOracle>(refine::HttpOracleConfig{oc.endpoint, oc.model, oc.api_key_env, oc.timeout_seconds});
  }
  auto table = read_json(need_path(oc.stub_table, "oracle.stub_table"));
  return std::make_unique<refine::StubOracle>(refine::StubOracle::from_json(table));
}

refine::RetryPolicy retry_policy(const Context& ctx) {
  return {ctx.cfg.oracle.retries, ctx.cfg.oracle.backoff_seconds, ctx.cfg.oracle.price_per_call};
}

std::vector<refine::Judgment> read_judgments(const Context& ctx) {
  auto j = read_json(need_artifact(ctx, "judgments.json", "refine judge"));
  std::vector<refine::Judgment> out;
  for (const auto& row : j) out.push_back(refine::judgment_from_json(row));
  return out;
}

StageOutcome refine_candidates(const Context& ctx) {
  auto g = read_ontology(need_artifact(ctx, "ontology.ttl", "build instances"));
  refine::BlockingConfig blocking{ctx.cfg.blocking.token_overlap, ctx.cfg.blocking.skip_classes};
  auto pairs = refine::enumerate_candidates(g, blocking);
  json rows = json::array();
  for (const auto& p : pairs) rows.push_back({{"a", p.a}, {"b", p.b}, {"block_key", p.block_key}});
  ctx.write_json(ctx.artifact("candidates.json"), rows);
  StageOutcome o;
  o.report = {{"candidates", pairs.size()}, {"individuals", g.instances.size()}};
  return o;
}

StageOutcome refine_judge(const Context& ctx) {
  auto g = read_ontology(need_artifact(ctx, "ontology.ttl", "build instances"));
  auto rows = read_json(need_artifact(ctx, "candidates.json", "refine candidates"));
  std::vector<refine::CandidatePair> pairs;
  for (const auto& r : rows) {
    pairs.push_back(refine::make_candidate(r.at("a").get<std::string>(), r.at("b").get<std::string>(),
                                           r.value("block_key", std::string())));
  }
  auto oracle = make_oracle(ctx);
  auto js = refine::judge_all(*oracle, pairs, g, ctx.cfg.oracle.max_parallel, retry_policy(ctx));
  json out = json::array();
  std::size_t yes = 0, invalid = 0;
  for (const auto& j : js) {
    out.push_back(refine::to_json(j));
    if (!j.valid) ++invalid;
    else if (j.mergeable) ++yes;
  }
  ctx.write_json(ctx.artifact("judgments.json"), out);
  StageOutcome o;
  o.report = {{"judged", js.size()}, {"mergeable", yes}, {"invalid", invalid}};
  return o;
}

StageOutcome refine_cliques(const Context& ctx) {
  auto g = read_ontology(need_artifact(ctx, "ontology.ttl", "build instances"));
  auto mg = refine::build_merge_graph(read_judgments(ctx));
  auto maximal = refine::maximal_cliques(mg);
  auto resolved = refine::resolve_overlaps(maximal);
  json cliques = json::array();
  for (const auto& c : resolved.cliques) {
    cliques.push_back({{"members", c}, {"representative", refine::select_representative(c, g)}});
  }
  json dropped = json::object();
  for (const auto& [v, from] : resolved.dropped) dropped[v] = from;
  ctx.write_json(ctx.artifact("cliques.json"),
                 {{"maximal", maximal}, {"cliques", cliques}, {"dropped", dropped}});
  StageOutcome o;
  o.report = {{"merge_edges", mg.edges.size()}, {"maximal_cliques", maximal.size()},
              {"disjoint_cliques", resolved.cliques.size()}, {"dropped_memberships", resolved.dropped.size()}};
  return o;
}

StageOutcome refine_review_export(const Context& ctx, bool approve_all) {
  auto g = read_ontology(need_artifact(ctx, "ontology.ttl", "build instances"));
  auto cj = read_json(need_artifact(ctx, "cliques.json", "refine cliques"));
  std::vector<refine::ReviewEntry> entries;
  for (const auto& c : cj.at("cliques")) {
    entries.push_back({c.at("members").get<std::set<std::string>>(), c.at("representative").get<std::string>(),
                       approve_all, ""});
  }
  ctx.write_json(ctx.cfg.review_file, refine::review_to_json(entries, g));
  StageOutcome o;
  o.report = {{"review_file", ctx.cfg.review_file.generic_string()}, {"entries", entries.size()}, {"approved", approve_all ? entries.size() : 0}};
  return o;
}

StageOutcome refine_apply(const Context& ctx) {
  auto g = read_ontology(need_artifact(ctx, "ontology.ttl", "build instances"));
  if (!fs::exists(ctx.cfg.review_file)) {
    throw MissingInput("missing input " + ctx.cfg.review_file.generic_string() + "; run `refine review-export` first");
  }
  auto entries = refine::review_from_json(read_json(ctx.cfg.review_file));
  std::vector<refine::Clique> cliques;
  for (const auto& e : entries) {
    if (e.approved) cliques.push_back({e.members, e.representative});
  }
  StageOutcome o;
  if (cliques.empty()) {
    o.report = {{"error", "no approved cliques in " + ctx.cfg.review_file.generic_string()}};
    o.failed = true;
    return o;
  }
  refine::MergeLog log;
  auto merged = refine::apply_merges(g, cliques, log);
  ctx.write(ctx.artifact("ontology_refined.ttl"), rdfio::serialize(merged, rdfio::Format::Turtle));
  ctx.write_json(ctx.artifact("merge_log.json"), refine::to_json(log));
  std::size_t retired = 0;
  for (const auto& c : cliques) retired += c.members.size() - 1;
  o.report = {{"cliques_applied", cliques.size()}, {"retired", retired},
              {"reduction_ratio", refine::reduction_ratio(g, merged)}};
  return o;
}

StageOutcome refine_revert(const Context& ctx, std::size_t index) {
  auto g = read_ontology(need_artifact(ctx, "ontology_refined.ttl", "refine apply"));
  auto log = refine::merge_log_from_json(read_json(need_artifact(ctx, "merge_log.json", "refine apply")));
  auto restored = refine::revert(std::move(g), log, index);
  ctx.write(ctx.artifact("ontology_refined.ttl"), rdfio::serialize(restored, rdfio::Format::Turtle));
  ctx.write_json(ctx.artifact("merge_log.json"), refine::to_json(log));
  StageOutcome o;
  o.report = {{"reverted", index}, {"active_entries", std::count_if(log.entries.begin(), log.entries.end(),
                                                                    [](const auto& e) { return !e.reverted; })}};
  return o;
}

// ---- eval ----

eval::GroundTruth load_truth(const Context& ctx) {
  return eval::ground_truth_from_json(read_json(need_path(ctx.cfg.eval.ground_truth, "eval.ground_truth")));
}

StageOutcome eval_pairwise(const Context& ctx) {
  auto report = eval::score_pairwise(read_judgments(ctx), load_truth(ctx), ctx.cfg.oracle.price_per_call.value_or(0.0),
                                     ctx.cfg.eval.latency_bin_seconds);
  ctx.write_json(ctx.artifact("eval_pairwise.json"), eval::to_json(report));
  StageOutcome o;
  o.report = eval::to_json(report);
  return o;
}

StageOutcome eval_grouping(const Context& ctx) {
  std::vector<std::set<std::string>> groups;
  std::string source;
  if (!ctx.cfg.eval.groups.empty()) {
    groups = eval::groups_from_json(read_json(need_path(ctx.cfg.eval.groups, "eval.groups")));
    source = ctx.cfg.eval.groups.generic_string();
  } else {
    if (!fs::exists(ctx.cfg.review_file)) {
      throw MissingInput("missing input " + ctx.cfg.review_file.generic_string() + "; set eval.groups or run `refine review-export`");
    }
    for (const auto& e : refine::review_from_json(read_json(ctx.cfg.review_file))) {
      if (e.approved) groups.push_back(e.members);
    }
    source = ctx.cfg.review_file.generic_string();
  }
  auto truth = eval::adapt_ground_truth_to_groups(load_truth(ctx));
  auto report = eval::score_grouping(groups, truth);
  ctx.write_json(ctx.artifact("eval_grouping.json"), eval::to_json(report));
  StageOutcome o;
  o.report = eval::to_json(report);
  o.report["groups_source"] = source;
  return o;
}

StageOutcome eval_latency(const Context& ctx) {
  auto h = eval::latency_histogram(read_judgments(ctx), ctx.cfg.eval.latency_bin_seconds);
  ctx.write(ctx.artifact("latency_histogram.csv"), h.csv());
  StageOutcome o;
  o.report = {{"samples", h.samples}, {"bin_width_seconds", h.bin_width}};
  o.report["mean_seconds"] = h.mean ? json(*h.mean) : json();
  return o;
}

// ---- export ----

StageOutcome export_ontology(const Context& ctx, rdfio::Format format, const std::string& input) {
  fs::path src;
  if (!input.empty()) {
    src = need_path(input, "--input");
  } else {
    src = ctx.artifact("ontology_refined.ttl");
    if (!fs::exists(src)) src = need_artifact(ctx, "ontology.ttl", "build instances");
  }
  auto g = read_ontology(src);
  fs::path dest = ctx.artifact(format == rdfio::Format::Turtle ? "export/ontology.ttl" : "export/ontology.owl");
  ctx.write(dest, rdfio::serialize(g, format));
  StageOutcome o;
  o.report = {{"source", src.generic_string()}, {"format", rdfio::to_string(format)}, {"output", dest.generic_string()},
              {"classes", g.classes.size()}, {"individuals", g.instances.size()}};
  return o;
}

std::string report_name(const std::string& command) {
  std::string s = command;
  std::replace(s.begin(), s.end(), ' ', '_');
  std::replace(s.begin(), s.end(), '-', '_');
  return s + "_report.json";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ontobuild: ontology construction from XML requirement corpora"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "pipeline config file")->required();

  std::string command;
  std::function<StageOutcome(const Context&)> action;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  std::function<StageOutcome(const Context&)> fn) {
    auto* sub = parent->add_subcommand(name, help);
    sub->callback([&, name = parent->get_name() + " " + name, fn] {
      command = name;
      action = fn;
    });
    return sub;
  };

  auto* vault_cmd = app.add_subcommand("vault", "Markdown note vault")->require_subcommand(1);
  leaf(vault_cmd, "scan", "parse the vault and report links", vault_scan);
  leaf(vault_cmd, "populate", "copy clause paragraphs into concept notes", vault_populate);
  leaf(vault_cmd, "rank", "PageRank over the note graph", vault_rank);
  std::string concept_id;
  std::size_t depth = 2;
  auto* ctx_cmd = leaf(vault_cmd, "context", "clause sections around a concept",
                       [&](const Context& c) { return vault_context(c, concept_id, depth); });
  ctx_cmd->add_option("concept", concept_id, "concept note id")->required();
  ctx_cmd->add_option("-d,--depth", depth, "traversal depth")->capture_default_str();

  auto* schema_cmd = app.add_subcommand("schema", "schema checks")->require_subcommand(1);
  leaf(schema_cmd, "check", "check the authoring rules", schema_check);

  auto* build_cmd = app.add_subcommand("build", "ontology generation")->require_subcommand(1);
  leaf(build_cmd, "classes", "classes and properties from the schema", build_classes);
  leaf(build_cmd, "instances", "individuals from the XML corpus", build_instances);
  leaf(build_cmd, "all", "classes then instances", [](const Context& c) {
    auto classes = build_classes(c);
    if (classes.failed) return classes;
    auto inst = build_instances(c);
    inst.report["classes"] = classes.report;
    return inst;
  });

  auto* refine_cmd = app.add_subcommand("refine", "duplicate concept merging")->require_subcommand(1);
  leaf(refine_cmd, "candidates", "blocked candidate pairs", refine_candidates);
  leaf(refine_cmd, "judge", "ask the oracle about each candidate pair", refine_judge);
  leaf(refine_cmd, "cliques", "maximal cliques of mergeable pairs", refine_cliques);
  bool approve_all = false;
  auto* review_cmd = leaf(refine_cmd, "review-export", "write the review file",
                          [&](const Context& c) { return refine_review_export(c, approve_all); });
  review_cmd->add_flag("--approve-all", approve_all, "mark every clique approved");
  leaf(refine_cmd, "apply", "merge approved cliques", refine_apply);
  std::size_t revert_index = 0;
  auto* revert_cmd = leaf(refine_cmd, "revert", "undo one journal entry",
                          [&](const Context& c) { return refine_revert(c, revert_index); });
  revert_cmd->add_option("index", revert_index, "journal entry index")->required();

  auto* eval_cmd = app.add_subcommand("eval", "evaluation against ground truth")->require_subcommand(1);
  leaf(eval_cmd, "pairwise", "score oracle judgments", eval_pairwise);
  leaf(eval_cmd, "grouping", "score merge groups", eval_grouping);
  leaf(eval_cmd, "latency", "oracle latency histogram", eval_latency);

  auto* export_cmd = app.add_subcommand("export", "ontology export")->require_subcommand(1);
  std::string input;
  export_cmd->add_option("-i,--input", input, "ontology to export (default: refined, else built)");
  leaf(export_cmd, "turtle", "Turtle", [&](const Context& c) { return export_ontology(c, rdfio::Format::Turtle, input); });
  leaf(export_cmd, "rdfxml", "RDF/XML", [&](const Context& c) { return export_ontology(c, rdfio::Format::RdfXml, input); });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  std::optional<Context> ctx;
  try {
    if (!fs::exists(config_path)) throw MissingInput("missing config file " + config_path);
    ctx.emplace(Context{config::load(config_path), out});
  } catch (const MissingInput& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  json report = {{"command", command}};
  int code = kExitOk;
  try {
    auto outcome = action(*ctx);
    report.update(outcome.report);
    report["status"] = outcome.failed ? "failed" : "ok";
    code = outcome.failed ? kExitFailure : kExitOk;
  } catch (const MissingInput& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = e.what();
    err << command << ": " << e.what() << '\n';
    code = kExitFailure;
  }
  try {
    ctx->write_json(ctx->artifact(report_name(command)), report);
  } catch (const Error& e) {
    err << "cannot write report: " << e.what() << '\n';
    return kExitFailure;
  }
  if (code != kExitOk && report.contains("error") && report["status"] == "failed") {
    err << command << ": " << report["error"].get<std::string>() << '\n';
  }
  return code;
}

}  // namespace ontobuild::cli
