// selfpref-audit: command-line driver for the self-preference audit pipeline.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "selfpref/config.hpp"
#include "selfpref/error.hpp"
#include "workspace.hpp"

namespace {

int fail(std::string_view kind, std::string_view message, int code) {
  nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace selfpref;
  using namespace selfpref::cli;

  CLI::App app{"Audit LLM evaluators for self-preference bias"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path = "selfpref.toml";
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string evaluator;
  app.add_option("--config,-c", config_path, "Audit config (TOML)")->capture_default_str();
  app.add_option("--seed", seed, "Override [project] seed");
  app.add_option("--out", out_dir, "Override [project] output_dir");
  app.add_option("--evaluator", evaluator, "Evaluator name from [evaluators]");

  auto* ingest = app.add_subcommand("ingest", "Corpus statistics per provenance group");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Counterfactual summaries per model");
  generate->add_option("--models", gen.models, "Models to generate for (default: all)")->delimiter(',');
  generate->add_option("--limit", gen.limit, "At most this many new summaries per model");

  PairArgs pair;
  auto* pair_cmd = app.add_subcommand("pair", "Build a pairs manifest");
  pair_cmd->add_option("--model", pair.model, "Evaluator model whose summaries are paired")->required();
  pair_cmd->add_option("--alternative", pair.alternative, "Pair against this model instead of the human");
  pair_cmd->add_option("--order", pair.order, "coin or blocked (default from config)");

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Run pairwise comparisons");
  evaluate->add_option("--pairs", eval.pairs, "Pairs manifest")->required();
  evaluate->add_option("--variant", eval.variant, "standard or debias")->capture_default_str();

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "Statistical parity and equal opportunity bias");
  metrics->add_option("--records", met.records, "Run log")->required();
  metrics->add_option("--truth", met.truth, "Ground-truth labels CSV (pair_id,label)");
  metrics->add_option("--annotations", met.annotations, "Annotator CSV; labels via bootstrap majority");
  metrics->add_option("--resamples", met.resamples, "Bootstrap resamples (default from config)");

  FitArgs fitargs;
  auto* fit = app.add_subcommand("fit", "Conditional logit with quality controls");
  fit->add_option("--records", fitargs.records, "Run log")->required();
  fit->add_option("--pairs", fitargs.pairs, "Pairs manifest (default: the one named in the run log)");
  fit->add_option("--features", fitargs.features, "Feature sets: phi, psi or family names")
      ->capture_default_str();
  fit->add_option("--top-k", fitargs.top_k, "Controls kept after screening");
  fit->add_option("--ridge", fitargs.ridge, "Ridge penalty");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Shortlisting pipeline simulation");
  simulate->add_option("--model", sim.model, "Model whose counterfactuals enter the pools");

  MitigateArgs mit;
  auto* mitigate = app.add_subcommand("mitigate", "Debias prompt and majority-vote panel");
  mitigate->add_option("--pairs", mit.pairs, "Pairs manifest");
  mitigate->add_option("--panel", mit.panel, "Panel evaluator for the majority-vote strategy");
  mitigate->add_option("--truth", mit.truth, "Ground-truth labels; switches to equal opportunity");
  mitigate->add_option("--values", mit.values,
                       "CSV evaluator,baseline,strategy,after in percent; no model calls");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Plot-ready figure and table data");
  report->add_option("--figure", rep.figures, "selection-rates, bias or simulation")->delimiter(',');
  report->add_option("--table", rep.tables, "corpus, regression or mitigation")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), 2);
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    ConfigOverrides ov;
    ov.seed = seed;
    if (!out_dir.empty()) ov.output_dir = out_dir;
    Workspace ws(load_config(config_path, ov));
    ws.stamp(name, false);

    std::string line;
    if (cmd == ingest) {
      line = cmd_ingest(ws);
    } else if (cmd == generate) {
      line = cmd_generate(ws, gen);
    } else if (cmd == pair_cmd) {
      line = cmd_pair(ws, pair);
    } else if (cmd == evaluate) {
      eval.evaluator = evaluator;
      line = cmd_evaluate(ws, eval);
    } else if (cmd == metrics) {
      line = cmd_metrics(ws, met);
    } else if (cmd == fit) {
      line = cmd_fit(ws, fitargs);
    } else if (cmd == simulate) {
      sim.evaluator = evaluator;
      line = cmd_simulate(ws, sim);
    } else if (cmd == mitigate) {
      mit.evaluator = evaluator;
      line = cmd_mitigate(ws, mit);
    } else if (cmd == report) {
      line = cmd_report(ws, rep);
    }
    ws.stamp(name, true);
    std::cout << line << "\n";
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return fail("parse_error", e.what(), 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io_error", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), 1);
  }
}
