#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "selfpref/bounded.hpp"
#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/io.hpp"
#include "selfpref/mitigation.hpp"
#include "selfpref/numeric.hpp"
#include "selfpref/random.hpp"
#include "selfpref/simulation.hpp"
#include "selfpref/stats.hpp"
#include "selfpref/synthetic.hpp"
#include "selfpref/textmetrics.hpp"
#include "selfpref/tokenize.hpp"

namespace selfpref::cli {

namespace {

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string rel(const Workspace&, const fs::path& p) { return p.lexically_normal().string(); }

std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json distribution_json(const Distribution& d) {
  return {{"mean", d.mean}, {"sd", d.sd},         {"min", d.min}, {"q1", d.q1},
          {"median", d.median}, {"q3", d.q3}, {"max", d.max}};
}

std::string fmt(double v, int decimals = 3) { return fixed(v, decimals); }

}  // namespace

// ---------------------------------------------------------------------------

std::string cmd_ingest(const Workspace& ws) {
  const auto corpus = ws.load_corpus();
  std::vector<Source> expected{Source::human()};
  for (const auto& [name, m] : ws.config().models) expected.push_back(Source::model(name));
  auto stats = corpus_stats(corpus.store.all(), expected);

  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : stats.groups) {
    nlohmann::json measures = nlohmann::json::object();
    for (const auto& [k, d] : g.measures) measures[k] = distribution_json(d);
    groups.push_back({{"group", g.group}, {"n", g.n}, {"measures", measures}});
  }
  auto warnings = corpus.warnings;
  warnings.insert(warnings.end(), stats.warnings.begin(), stats.warnings.end());
  std::size_t humans = 0;
  for (const auto& r : corpus.store.all()) humans += r.source.is_human();
  ws.write_json("corpus/stats.json", {{"input_count", corpus.input_count},
                                      {"retained_count", humans},
                                      {"dropped_ids", corpus.dropped_ids},
                                      {"groups", groups},
                                      {"warnings", warnings}});
  ws.write_csv("corpus/stats.csv", corpus_stats_csv(stats));
  ws.write_text("corpus/stats.txt", corpus_stats_table(stats));

  return "ingest: " + std::to_string(humans) + " of " + std::to_string(corpus.input_count) +
         " resumes retained (" + std::to_string(corpus.dropped_ids.size()) + " dropped), " +
         std::to_string(stats.groups.size()) + " group(s) -> " + rel(ws, ws.path("corpus/stats.csv"));
}

// ---------------------------------------------------------------------------

std::string cmd_generate(const Workspace& ws, const GenerateArgs& a) {
  const auto& cfg = ws.config();
  const auto corpus = ws.load_corpus();
  std::vector<const Resume*> humans;
  for (const auto& r : corpus.store.all()) {
    if (r.source.is_human()) humans.push_back(&r);
  }

  std::vector<std::string> models = a.models;
  if (models.empty()) {
    for (const auto& [name, m] : cfg.models) models.push_back(name);
  }
  if (models.empty()) throw ValidationError("no [models] configured");

  std::ostringstream summary;
  summary << "generate:";
  std::size_t failed_total = 0;
  std::string last_failure;
  for (const auto& name : models) {
    const auto& mc = cfg.model(name);
    const auto log = ws.counterfactual_log(name);
    std::set<std::string> done;
    if (fs::exists(log)) {
      for (const auto& e : read_generation_log(log)) done.insert(e.origin_id);
    }
    start_generation_log(log, name, ws.hash());

    std::vector<const Resume*> todo;
    for (const auto* h : humans) {
      if (!done.count(h->id)) todo.push_back(h);
    }
    if (a.limit && todo.size() > a.limit) todo.resize(a.limit);

    llm::ModelEndpoint endpoint;
    std::shared_ptr<llm::ChatTransport> transport;
    if (mc.endpoint) {
      endpoint = *mc.endpoint;
      transport = std::make_shared<llm::HttpChatTransport>();
    } else {
      endpoint.model = name;
      endpoint.max_parallel = 1;
      transport = std::make_shared<llm::EchoSummaryTransport>(mc.echo_words);
    }
    const bool synthetic = !mc.endpoint && mc.mock == "synthetic";
    const auto gen_seed = derive_seed(cfg.seed, std::string_view("generate"));
    const auto& range = cfg.generation.range;

    std::size_t added = 0, out_of_range = 0, failed = 0;
    auto task = [&](std::size_t i) -> std::optional<GenerationEntry> {
      const Resume& h = *todo[i];
      GenerationEntry e;
      e.origin_id = h.id;
      if (synthetic) {
        e.summary = synthetic_rewrite(h, name, gen_seed);
        e.word_count = text::words(e.summary).size();
        e.in_range = static_cast<int>(e.word_count) >= range.min_words &&
                     static_cast<int>(e.word_count) <= range.max_words;
        e.attempts = 1;
        return e;
      }
      try {
        auto g = llm::generate_summary(render_resume(h), endpoint, *transport, cfg.generation);
        e.summary = std::move(g.text);
        e.word_count = g.word_count;
        e.in_range = g.in_range;
        e.attempts = g.attempts;
        return e;
      } catch (const TransportError& ex) {
        static std::mutex mu;
        std::lock_guard lock(mu);
        last_failure = h.id + ": " + ex.what();
        return std::nullopt;
      }
    };
    auto consume = [&](std::size_t, std::optional<GenerationEntry> e) {
      if (!e) {
        ++failed;
        return;
      }
      append_generation_entry(log, *e);
      ++added;
      out_of_range += !e->in_range;
    };
    run_bounded(todo.size(), endpoint.max_parallel, task, consume);
    failed_total += failed;
    summary << " " << name << " " << added << " new, " << done.size() << " reused, " << out_of_range
            << " out of range, " << failed << " failed;";
  }
  if (failed_total) {
    throw TransportError(std::to_string(failed_total) +
                             " generation request(s) failed (last: " + last_failure +
                             "); rerun `generate` to retry them",
                         true);
  }
  auto s = summary.str();
  s.pop_back();
  return s;
}

// ---------------------------------------------------------------------------

std::string cmd_pair(const Workspace& ws, const PairArgs& a) {
  const auto& cfg = ws.config();
  if (a.model.empty()) throw ValidationError("pair needs --model");
  ws.require(ws.counterfactual_log(a.model), "counterfactuals of " + a.model,
             "generate --models " + a.model);
  PairSpec spec;
  spec.evaluator_model = a.model;
  if (!a.alternative.empty()) {
    ws.require(ws.counterfactual_log(a.alternative), "counterfactuals of " + a.alternative,
               "generate --models " + a.alternative);
    spec.kind = ComparisonKind::EvaluatorVsAlternative;
    spec.alternative_model = a.alternative;
  }
  spec.order = a.order.empty() ? cfg.order : parse_order_mode(a.order);
  spec.seed = derive_seed(cfg.seed, std::string_view("pairs"));

  const auto corpus = ws.load_corpus();
  const auto pairs = build_pairs(corpus.store, spec);
  const auto out = ws.manifest_path(a.model, a.alternative.empty() ? "human" : a.alternative);
  ws.write_json(out.lexically_relative(ws.root()), pairs_to_json(pairs, spec));

  std::size_t first = 0;
  for (const auto& p : pairs) first += p.evaluator_position(corpus.store) == Position::First;
  return "pair: " + std::to_string(pairs.size()) + " pairs (" + std::to_string(first) +
         " with the evaluator's summary first) -> " + rel(ws, out);
}

// ---------------------------------------------------------------------------

namespace {

struct ManifestRef {
  fs::path path;
  std::string stem;
  std::vector<ResumePair> pairs;
};

ManifestRef load_manifest(const Workspace& ws, const std::string& arg) {
  if (arg.empty()) throw ValidationError("--pairs is required");
  ManifestRef m;
  m.path = ws.require(ws.resolve(arg, "manifests"), "pairs manifest", "pair");
  m.stem = m.path.stem().string();
  m.pairs = load_pairs(m.path);
  return m;
}

ComparisonSummary run_logged(const Workspace& ws, const std::string& evaluator,
                             const ManifestRef& m, PromptVariant variant, const CorpusView& corpus,
                             fs::path* log_path = nullptr) {
  auto judge = ws.make_judge(evaluator);
  const auto path = ws.run_path(evaluator, m.stem, variant);
  auto log = RunLog::open(path, {evaluator, variant, m.stem, ws.hash()});
  if (log_path) *log_path = path;
  return run_comparisons(m.pairs, corpus.store, *judge, variant, &log, &corpus.quality);
}

}  // namespace

std::string cmd_evaluate(const Workspace& ws, const EvaluateArgs& a) {
  if (a.evaluator.empty()) throw ValidationError("evaluate needs --evaluator");
  ws.config().evaluator(a.evaluator);
  const auto variant = llm::parse_variant(a.variant);
  const auto m = load_manifest(ws, a.pairs);
  const auto corpus = ws.load_corpus();
  fs::path path;
  const auto s = run_logged(ws, a.evaluator, m, variant, corpus, &path);
  return "evaluate: " + std::to_string(s.records.size()) + " records (" +
         std::to_string(s.new_requests) + " new, " + std::to_string(s.malformed) +
         " malformed) -> " + rel(ws, path);
}

// ---------------------------------------------------------------------------

namespace {

struct RunRef {
  fs::path path;
  std::string stem;
  RunLog::Header header;
  std::vector<EvaluationRecord> records;
};

RunRef load_run(const Workspace& ws, const std::string& arg) {
  if (arg.empty()) throw ValidationError("--records is required");
  RunRef r;
  r.path = ws.require(ws.resolve(arg, "runs"), "run log", "evaluate");
  r.stem = r.path.stem().string();
  r.records = RunLog::read(r.path, &r.header);
  return r;
}

std::vector<GroundTruthLabel> read_truth(const Workspace& ws, const std::string& arg) {
  const auto p = ws.require(ws.resolve(arg, "labels"), "ground-truth labels", "metrics --annotations");
  return parse_truth_labels(read_text_file(p), p.string());
}

std::string bias_line(const BiasEstimate& b) {
  return fmt(b.estimate) + " [" + fmt(b.ci_low) + ", " + fmt(b.ci_high) + "]";
}

}  // namespace

std::string cmd_metrics(const Workspace& ws, const MetricsArgs& a) {
  const auto& cfg = ws.config();
  if (!a.truth.empty() && !a.annotations.empty()) {
    throw ValidationError("give either --truth or --annotations, not both");
  }
  const auto run = load_run(ws, a.records);
  const auto parity = parity_bias(run.records);
  const std::size_t B = a.resamples.value_or(cfg.bootstrap_resamples);

  nlohmann::json out{{"run", run.stem},
                     {"evaluator", run.header.evaluator},
                     {"variant", llm::variant_name(run.header.variant)},
                     {"manifest", run.header.manifest},
                     {"statistical_parity", bias_to_json(parity)},
                     {"equal_opportunity", nullptr}};

  std::optional<std::vector<GroundTruthLabel>> truth;
  fs::path annotations;
  if (!a.annotations.empty()) {
    annotations = a.annotations;
  } else if (a.truth.empty() && cfg.annotations_path) {
    annotations = *cfg.annotations_path;
  }
  if (!annotations.empty()) {
    std::set<std::string> known;
    for (const auto& r : run.records) known.insert(r.pair_id);
    const auto set = ingest_annotations(annotations, cfg.rating_scale, &known);
    auto labels = bootstrap_majority(set.votes, B, derive_seed(cfg.seed, std::string_view("majority")));
    ws.write_csv(fs::path("labels") / (run.stem + ".csv"), truth_labels_csv(labels));
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : set.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
    out["annotations"] = {{"votes", set.votes.size()},
                          {"attention_checks", set.attention_checks},
                          {"rejected", rejected},
                          {"labels", labels.size()}};
    truth = std::move(labels);
  } else if (!a.truth.empty()) {
    truth = read_truth(ws, a.truth);
  }

  std::string line = "metrics: parity bias " + bias_line(parity) + " over " +
                     std::to_string(parity.n_pairs) + " pairs";
  if (truth) {
    EqualOpportunityOptions eo;
    eo.resamples = B;
    eo.seed = derive_seed(cfg.seed, std::string_view("equal-opportunity"));
    eo.threads = cfg.bootstrap_threads;
    const auto b = equal_opportunity_bias(run.records, *truth, eo);
    out["equal_opportunity"] = bias_to_json(b);
    line += "; equal opportunity " + bias_line(b) + " over " + std::to_string(b.n_conditioned) +
            " labelled pairs";
  }
  const fs::path dest = fs::path("metrics") / (run.stem + ".json");
  ws.write_json(dest, out);
  return line + " -> " + rel(ws, ws.path(dest));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<FeatureFamily> parse_families(const std::string& spec) {
  std::set<FeatureFamily> out;
  for (const auto& tok : split_list(spec)) {
    std::string t;
    for (char c : tok) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "phi" || tok == "\xCF\x86") {
      out.insert({FeatureFamily::Summary, FeatureFamily::Lexicon, FeatureFamily::Punctuation});
    } else if (t == "psi" || tok == "\xCF\x88") {
      out.insert(FeatureFamily::AutoScore);
    } else {
      bool found = false;
      for (auto f : {FeatureFamily::Summary, FeatureFamily::Lexicon, FeatureFamily::Punctuation,
                     FeatureFamily::AutoScore}) {
        if (t == text::family_name(f)) {
          out.insert(f);
          found = true;
        }
      }
      if (!found) {
        throw ValidationError("unknown feature set '" + tok +
                              "' (use phi, psi, summary, lexicon, punctuation or autoscore)");
      }
    }
  }
  if (out.empty()) throw ValidationError("--features selects nothing");
  return {out.begin(), out.end()};
}

}  // namespace

std::string cmd_fit(const Workspace& ws, const FitArgs& a) {
  const auto& cfg = ws.config();
  const auto run = load_run(ws, a.records);
  std::string manifest_arg = a.pairs;
  if (manifest_arg.empty()) {
    if (run.header.manifest.empty()) {
      throw ValidationError("the run log does not name its pairs manifest; pass --pairs");
    }
    manifest_arg = (fs::path("manifests") / (run.header.manifest + ".json")).string();
  }
  const auto m = load_manifest(ws, manifest_arg);
  const auto families = parse_families(a.features);
  const auto corpus = ws.load_corpus();

  const Lexicon lexicon = cfg.lexicon_path ? Lexicon::load(*cfg.lexicon_path) : Lexicon::starter();
  std::optional<text::ExternalScores> external;
  if (cfg.external_scores_path) external = text::load_external_scores(*cfg.external_scores_path);

  std::map<std::string, FeatureVector> features;
  for (const auto& p : m.pairs) {
    for (const auto* id : {&p.member_first, &p.member_second}) {
      if (features.count(*id)) continue;
      features[*id] = resume_features(corpus.store.at(*id), lexicon, external ? &*external : nullptr);
    }
  }
  const auto table = build_feature_table(m.pairs, corpus.store, run.records, features, families);
  SelectionOptions so;
  so.top_k = a.top_k.value_or(cfg.top_k);
  const auto selection = select_features(table, so);
  FitOptions fo;
  fo.ridge = a.ridge.value_or(cfg.ridge);
  const auto fit = fit_conditional_logit(table.subset(selection.kept), fo);

  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& d : selection.dropped) dropped.push_back({{"feature", d.name}, {"reason", d.reason}});
  nlohmann::json fams = nlohmann::json::array();
  for (auto f : families) fams.push_back(text::family_name(f));
  const fs::path base = fs::path("fit") / run.stem;
  ws.write_json(base.string() + ".json", {{"run", run.stem},
                                          {"evaluator", run.header.evaluator},
                                          {"manifest", m.stem},
                                          {"feature_families", fams},
                                          {"selection", {{"kept", selection.kept}, {"dropped", dropped}}},
                                          {"excluded_records", table.excluded},
                                          {"table_warnings", table.warnings},
                                          {"fit", fit_to_json(fit)}});
  ws.write_csv(base.string() + ".csv", fit_to_csv(fit));
  ws.write_text(base.string() + ".txt", render_regression_table({{run.header.evaluator, fit}}));

  return "fit: " + std::string(kEvaluatorTerm) + " = " + fmt(fit.beta[0]) +
         significance_stars(fit.p[0]) + " (SE " + fmt(fit.robust_se[0]) + "), implied bias " +
         fmt(beta_to_bias(fit.beta[0])) + ", " + std::to_string(selection.kept.size()) +
         " controls, " + std::to_string(fit.n_pairs) + " pairs -> " +
         rel(ws, ws.path(base.string() + ".txt"));
}

// ---------------------------------------------------------------------------

std::string cmd_simulate(const Workspace& ws, const SimulateArgs& a) {
  if (a.evaluator.empty()) throw ValidationError("simulate needs --evaluator");
  const std::string model = a.model.empty() ? ws.self_model(a.evaluator) : a.model;
  ws.require(ws.counterfactual_log(model), "counterfactuals of " + model,
             "generate --models " + model);
  auto shortlister = ws.make_shortlister(a.evaluator);
  const auto corpus = ws.load_corpus();
  const auto result =
      run_pipeline(corpus.store, model, *shortlister, ws.config().simulation, &corpus.quality);

  const auto stem = sanitize(a.evaluator);
  ws.write_csv(fs::path("simulation") / (stem + ".csv"), simulation_csv(result));
  ws.write_csv(fs::path("simulation") / (stem + "_runs.csv"), simulation_runs_csv(result));
  auto j = simulation_to_json(result);
  j["evaluator_name"] = a.evaluator;
  ws.write_json(fs::path("simulation") / (stem + ".json"), j);

  double mean = 0;
  std::size_t zero_in_ci = 0;
  for (const auto& o : result.outcomes) {
    mean += o.bias.estimate;
    zero_in_ci += o.bias.ci_low <= 0 && 0 <= o.bias.ci_high;
  }
  if (!result.outcomes.empty()) mean /= static_cast<double>(result.outcomes.size());
  return "simulate: " + std::to_string(result.outcomes.size()) + " categories, mean bias " +
         fmt(mean) + ", " + std::to_string(zero_in_ci) + " interval(s) containing 0, " +
         std::to_string(result.redraws) + " redraw(s), " + std::to_string(result.warnings.size()) +
         " warning(s) -> " + rel(ws, ws.path(fs::path("simulation") / (stem + ".csv")));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<MitigationReport> reports_from_values(const fs::path& path) {
  const auto t = csv::read_file(path);
  const auto ce = t.require_column("evaluator", path.string());
  const auto cb = t.require_column("baseline", path.string());
  const auto cs = t.require_column("strategy", path.string());
  const auto ca = t.require_column("after", path.string());
  std::vector<std::string> order;
  std::map<std::string, double> baseline;
  std::map<std::string, std::vector<std::pair<std::string, double>>> after;
  auto number = [&](const csv::Row& row, std::size_t c) {
    try {
      std::size_t used = 0;
      const double v = std::stod(row.fields.at(c), &used);
      if (used != row.fields.at(c).size()) throw std::invalid_argument("trailing");
      return v / 100.0;
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(row.line) + ": not a number");
    }
  };
  for (const auto& row : t.rows) {
    const auto& ev = row.fields.at(ce);
    const double b = number(row, cb);
    if (auto it = baseline.find(ev); it == baseline.end()) {
      order.push_back(ev);
      baseline[ev] = b;
    } else if (it->second != b) {
      throw ValidationError(path.string() + ":" + std::to_string(row.line) +
                            ": conflicting baseline for " + ev);
    }
    after[ev].emplace_back(row.fields.at(cs), number(row, ca));
  }
  if (order.empty()) throw ValidationError(path.string() + ": no rows");
  std::vector<MitigationReport> out;
  for (const auto& ev : order) out.push_back(make_mitigation_report(ev, baseline[ev], after[ev]));
  return out;
}

}  // namespace

std::string cmd_mitigate(const Workspace& ws, const MitigateArgs& a) {
  std::vector<MitigationReport> reports;
  std::string stem;
  if (!a.values.empty()) {
    reports = reports_from_values(ws.require(a.values, "values file", "mitigate"));
    stem = "values";
  } else {
    if (a.evaluator.empty()) throw ValidationError("mitigate needs --evaluator (or --values)");
    const auto m = load_manifest(ws, a.pairs);
    const auto corpus = ws.load_corpus();
    const auto baseline = run_logged(ws, a.evaluator, m, PromptVariant::Standard, corpus);
    std::vector<std::pair<std::string, std::vector<EvaluationRecord>>> strategies;
    strategies.emplace_back("debias-prompt",
                            run_logged(ws, a.evaluator, m, PromptVariant::Debias, corpus).records);
    if (!a.panel.empty()) {
      strategies.emplace_back("majority-vote",
                              run_logged(ws, a.panel, m, PromptVariant::Standard, corpus).records);
    }
    std::optional<std::vector<GroundTruthLabel>> truth;
    if (!a.truth.empty()) truth = read_truth(ws, a.truth);
    EqualOpportunityOptions eo;
    eo.resamples = ws.config().bootstrap_resamples;
    eo.seed = derive_seed(ws.config().seed, std::string_view("equal-opportunity"));
    eo.threads = ws.config().bootstrap_threads;
    reports.push_back(mitigation_report(a.evaluator, baseline.records, strategies,
                                        truth ? &*truth : nullptr, eo));
    stem = sanitize(a.evaluator) + "__" + m.stem;
  }
  const fs::path base = fs::path("mitigation") / stem;
  ws.write_csv(base.string() + ".csv", mitigation_csv(reports));
  ws.write_json(base.string() + ".json", {{"reports", mitigation_to_json(reports)}});
  ws.write_text(base.string() + ".txt", render_mitigation_table(reports));

  std::string line = "mitigate:";
  for (const auto& r : reports) {
    line += " " + r.evaluator + " baseline " + report_cell(100.0 * r.baseline) + "%";
    for (const auto& s : r.strategies) {
      line += ", " + s.strategy + " " + report_cell(100.0 * s.bias_after) + "%";
    }
    line += ";";
  }
  line.pop_back();
  return line + " -> " + rel(ws, ws.path(base.string() + ".txt"));
}

// ---------------------------------------------------------------------------

namespace {

std::string csv_line(const std::vector<std::string>& fields) { return csv::join_row(fields) + "\n"; }

std::string figure_selection_rates(const Workspace& ws) {
  const auto logs = list_files(ws.path("runs"), ".jsonl");
  std::string out = csv_line({"evaluator", "self_model", "comparison", "n", "prefers_self",
                              "prefers_other"});
  std::size_t rows = 0;
  for (const auto& p : logs) {
    RunLog::Header h;
    const auto records = RunLog::read(p, &h);
    if (h.variant != PromptVariant::Standard) continue;
    std::size_t n = 0, self = 0;
    std::string self_model;
    for (const auto& r : records) {
      if (!r.resolved()) continue;
      ++n;
      self += r.chose_self();
      self_model = r.self_model;
    }
    if (n == 0) continue;
    const double share = static_cast<double>(self) / static_cast<double>(n);
    out += csv_line({h.evaluator, self_model, h.manifest, std::to_string(n), fmt(share, 4),
                     fmt(1.0 - share, 4)});
    ++rows;
  }
  if (rows == 0) throw ValidationError("no standard-prompt run logs under " + ws.path("runs").string() + "; run `evaluate` first");
  ws.write_csv("report/selection_rates.csv", out);
  return "report/selection_rates.csv";
}

std::string figure_bias(const Workspace& ws) {
  const auto files = list_files(ws.path("metrics"), ".json");
  if (files.empty()) throw ValidationError("no metrics found; run `metrics` first");
  std::string out = csv_line({"run", "evaluator", "variant", "metric", "estimate", "ci_low",
                              "ci_high", "n_pairs"});
  for (const auto& p : files) {
    const auto j = ws.read_json(p);
    for (const char* key : {"statistical_parity", "equal_opportunity"}) {
      const auto& b = j.at(key);
      if (b.is_null()) continue;
      out += csv_line({j.at("run"), j.at("evaluator"), j.at("variant"), b.at("metric"),
                       fmt(b.at("estimate").get<double>(), 4), fmt(b.at("ci_low").get<double>(), 4),
                       fmt(b.at("ci_high").get<double>(), 4),
                       std::to_string(b.at("n_pairs").get<std::size_t>())});
    }
  }
  ws.write_csv("report/bias.csv", out);
  return "report/bias.csv";
}

std::string figure_simulation(const Workspace& ws) {
  const auto files = list_files(ws.path("simulation"), ".json");
  if (files.empty()) throw ValidationError("no simulation results found; run `simulate` first");
  std::string out = csv_line({"evaluator", "category", "bias", "ci_low", "ci_high", "runs"});
  for (const auto& p : files) {
    const auto j = ws.read_json(p);
    for (const auto& c : j.at("categories")) {
      out += csv_line({j.value("evaluator_name", j.at("evaluator").get<std::string>()),
                       c.at("category"), fmt(c.at("bias").get<double>(), 4),
                       fmt(c.at("ci_low").get<double>(), 4), fmt(c.at("ci_high").get<double>(), 4),
                       std::to_string(c.at("runs").get<std::size_t>())});
    }
  }
  ws.write_csv("report/simulation.csv", out);
  return "report/simulation.csv";
}

std::string table_corpus(const Workspace& ws) {
  const auto corpus = ws.load_corpus();
  std::vector<Source> expected{Source::human()};
  for (const auto& [name, m] : ws.config().models) expected.push_back(Source::model(name));
  const auto stats = corpus_stats(corpus.store.all(), expected);
  ws.write_text("report/corpus.txt", corpus_stats_table(stats));
  ws.write_csv("report/corpus.csv", corpus_stats_csv(stats));
  return "report/corpus.txt";
}

std::string table_regression(const Workspace& ws) {
  const auto files = list_files(ws.path("fit"), ".json");
  if (files.empty()) throw ValidationError("no fitted models found; run `fit` first");
  std::vector<std::pair<std::string, FitResult>> cols;
  std::string out = csv_line({"run", "term", "estimate", "robust_se", "z", "p", "stars"});
  for (const auto& p : files) {
    const auto j = ws.read_json(p);
    const auto fit = fit_from_json(j.at("fit"));
    const std::string run = j.at("run");
    cols.emplace_back(j.at("evaluator").get<std::string>(), fit);
    for (std::size_t k = 0; k < fit.terms.size(); ++k) {
      out += csv_line({run, fit.terms[k], fmt(fit.beta[k]), fmt(fit.robust_se[k]), fmt(fit.z[k]),
                       fmt(fit.p[k], 4), significance_stars(fit.p[k])});
    }
  }
  ws.write_text("report/regression.txt", render_regression_table(cols));
  ws.write_csv("report/regression.csv", out);
  return "report/regression.txt";
}

std::string table_mitigation(const Workspace& ws) {
  const auto files = list_files(ws.path("mitigation"), ".json");
  if (files.empty()) throw ValidationError("no mitigation results found; run `mitigate` first");
  std::vector<MitigationReport> reports;
  for (const auto& p : files) {
    const auto j = ws.read_json(p);
    for (const auto& r : j.at("reports")) {
      MitigationReport m;
      m.evaluator = r.at("evaluator");
      m.metric = r.at("metric") == metric_name(BiasMetric::EqualOpportunity)
                     ? BiasMetric::EqualOpportunity
                     : BiasMetric::StatisticalParity;
      m.baseline = r.at("baseline");
      for (const auto& s : r.at("strategies")) {
        StrategyOutcome o;
        o.strategy = s.at("strategy");
        o.bias_after = s.at("bias_after");
        o.absolute_decrease_pp = s.at("absolute_decrease_pp");
        if (!s.at("relative_decrease_pct").is_null()) o.relative_decrease_pct = s.at("relative_decrease_pct").get<double>();
        m.strategies.push_back(o);
      }
      reports.push_back(std::move(m));
    }
  }
  ws.write_text("report/mitigation.txt", render_mitigation_table(reports));
  ws.write_csv("report/mitigation.csv", mitigation_csv(reports));
  return "report/mitigation.txt";
}

}  // namespace

std::string cmd_report(const Workspace& ws, const ReportArgs& a) {
  using Emit = std::string (*)(const Workspace&);
  const std::vector<std::pair<std::string, Emit>> figures = {
      {"selection-rates", figure_selection_rates}, {"bias", figure_bias}, {"simulation", figure_simulation}};
  const std::vector<std::pair<std::string, Emit>> tables = {
      {"corpus", table_corpus}, {"regression", table_regression}, {"mitigation", table_mitigation}};

  std::vector<std::string> written;
  const bool all = a.figures.empty() && a.tables.empty();
  auto pick = [&](const std::vector<std::pair<std::string, Emit>>& menu,
                  const std::vector<std::string>& wanted, std::string_view kind) {
    for (const auto& w : wanted) {
      auto it = std::find_if(menu.begin(), menu.end(), [&](const auto& e) { return e.first == w; });
      if (it == menu.end()) {
        std::string names;
        for (const auto& e : menu) names += (names.empty() ? "" : ", ") + e.first;
        throw ValidationError("unknown " + std::string(kind) + " '" + w + "' (choose from " + names + ")");
      }
      written.push_back(it->second(ws));
    }
    if (all) {
      // Emit whatever the upstream commands have produced so far.
      for (const auto& [name, emit] : menu) {
        try {
          written.push_back(emit(ws));
        } catch (const ValidationError&) {
        }
      }
    }
  };
  pick(figures, a.figures, "figure");
  pick(tables, a.tables, "table");
  if (written.empty()) throw ValidationError("nothing to report; run `evaluate` or `ingest` first");
  std::string line = "report: wrote";
  for (const auto& w : written) line += " " + w;
  return line;
}

}  // namespace selfpref::cli
