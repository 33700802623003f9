#include "workspace.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/io.hpp"
#include "selfpref/mitigation.hpp"
#include "selfpref/random.hpp"
#include "selfpref/synthetic.hpp"

namespace selfpref::cli {

std::string sanitize(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

Workspace::Workspace(AuditConfig config)
    : config_(std::move(config)), transport_(std::make_shared<llm::HttpChatTransport>()) {}

void Workspace::write_json(const fs::path& rel, nlohmann::json j) const {
  if (!j.is_object()) j = nlohmann::json{{"data", std::move(j)}};
  j["config_hash"] = hash();
  write_text_file(path(rel), j.dump(2) + "\n");
}

void Workspace::write_csv(const fs::path& rel, std::string_view csv_text) const {
  write_text_file(path(rel), "# config_hash: " + hash() + "\n" + std::string(csv_text));
}

void Workspace::write_text(const fs::path& rel, std::string_view text) const {
  std::string body(text);
  if (!body.empty() && body.back() != '\n') body += '\n';
  write_text_file(path(rel), body + "\nconfig_hash: " + hash() + "\n");
}

nlohmann::json Workspace::read_json(const fs::path& p) const {
  const auto text = read_text_file(p.is_absolute() || fs::exists(p) ? p : path(p));
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

fs::path Workspace::resolve(const fs::path& p, std::string_view subdir) const {
  if (fs::exists(p)) return p;
  if (p.is_relative()) {
    if (fs::exists(path(p))) return path(p);
    if (fs::exists(path(fs::path(subdir) / p))) return path(fs::path(subdir) / p);
  }
  return p;
}

fs::path Workspace::require(const fs::path& p, std::string_view what,
                            std::string_view command) const {
  if (!fs::exists(p)) {
    throw ValidationError(std::string(what) + " not found at " + p.string() + "; run `" +
                          std::string(command) + "` first");
  }
  return p;
}

fs::path Workspace::counterfactual_log(std::string_view model) const {
  return path(fs::path("counterfactuals") / (sanitize(model) + ".jsonl"));
}

fs::path Workspace::manifest_path(std::string_view evaluator_model, std::string_view other) const {
  return path(fs::path("manifests") / (sanitize(evaluator_model) + "_vs_" + sanitize(other) + ".json"));
}

fs::path Workspace::run_path(std::string_view evaluator, std::string_view manifest_stem,
                             PromptVariant variant) const {
  return path(fs::path("runs") / (sanitize(evaluator) + "__" + std::string(manifest_stem) + "__" +
                                  std::string(llm::variant_name(variant)) + ".jsonl"));
}

CorpusView Workspace::load_corpus() const {
  CorpusView v;
  if (config_.synthetic) {
    auto opts = *config_.synthetic;
    opts.models.clear();
    auto syn = make_synthetic_corpus(opts);
    v.store = std::move(syn.store);
    v.quality = std::move(syn.quality);
    v.input_count = v.store.size();
  } else {
    auto loaded = load_resumes(*config_.corpus_path, config_.load);
    v.input_count = loaded.input_count;
    v.dropped_ids = loaded.dropped_ids;
    for (auto& r : loaded.resumes) v.store.add(std::move(r));
    if (config_.quality_path) {
      const auto t = csv::read_file(*config_.quality_path);
      const auto ci = t.require_column("resume_id", config_.quality_path->string());
      const auto cq = t.require_column("quality", config_.quality_path->string());
      for (const auto& row : t.rows) {
        try {
          v.quality[row.fields.at(ci)] = std::stod(row.fields.at(cq));
        } catch (const std::exception&) {
          throw ParseError(config_.quality_path->string() + ":" + std::to_string(row.line) +
                           ": quality is not a number");
        }
      }
    }
  }

  std::vector<fs::path> logs;
  if (fs::is_directory(path("counterfactuals"))) {
    for (const auto& e : fs::directory_iterator(path("counterfactuals"))) {
      if (e.path().extension() == ".jsonl") logs.push_back(e.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& log : logs) {
    std::string model;
    const auto entries = read_generation_log(log, &model);
    std::size_t empty = 0;
    for (const auto& e : entries) {
      const Resume* origin = v.store.find(e.origin_id);
      if (!origin || !origin->source.is_human()) continue;
      auto summary = clean_summary(e.summary, config_.load.cleaning);
      if (summary.empty()) {
        ++empty;
        continue;
      }
      v.store.add(splice_summary(*origin, std::move(summary), model));
    }
    if (empty) {
      v.warnings.push_back(model + ": " + std::to_string(empty) +
                           " generated summaries empty after cleaning");
    }
    v.generated_models.push_back(model);
  }
  if (config_.synthetic) {
    extend_quality(v.quality, v.store, config_.synthetic->counterfactual_quality_sd,
                   derive_seed(config_.seed, std::string_view("quality")));
  }
  return v;
}

std::shared_ptr<llm::PairJudge> Workspace::make_judge(std::string_view name) const {
  const auto& ev = config_.evaluator(name);
  switch (ev.kind) {
    case EvaluatorConfig::Kind::Mock:
      return std::make_shared<llm::MockJudge>(ev.mock);
    case EvaluatorConfig::Kind::Llm:
      return std::make_shared<llm::LlmJudge>(*config_.model(ev.model).endpoint, transport_);
    case EvaluatorConfig::Kind::Panel: {
      std::array<std::shared_ptr<llm::PairJudge>, 3> members;
      for (std::size_t k = 0; k < 3; ++k) members[k] = make_judge(ev.members.at(k));
      return std::make_shared<MajorityPanelJudge>(ev.name, members);
    }
  }
  throw ValidationError("unsupported evaluator kind");
}

std::unique_ptr<llm::Shortlister> Workspace::make_shortlister(std::string_view name) const {
  const auto& ev = config_.evaluator(name);
  switch (ev.kind) {
    case EvaluatorConfig::Kind::Mock:
      return std::make_unique<llm::MockShortlister>(ev.mock);
    case EvaluatorConfig::Kind::Llm:
      return std::make_unique<llm::LlmShortlister>(*config_.model(ev.model).endpoint, transport_);
    case EvaluatorConfig::Kind::Panel:
      break;
  }
  throw ValidationError("evaluator '" + std::string(name) + "' is a panel; shortlisting needs a single evaluator");
}

std::string Workspace::self_model(std::string_view name) const {
  const auto& ev = config_.evaluator(name);
  switch (ev.kind) {
    case EvaluatorConfig::Kind::Mock:
      return ev.mock.self_model;
    case EvaluatorConfig::Kind::Llm:
      return ev.model;
    case EvaluatorConfig::Kind::Panel:
      return self_model(ev.members.at(0));
  }
  return {};
}

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void Workspace::stamp(std::string_view command, bool finished) const {
  const auto p = path("metadata.json");
  nlohmann::json meta = nlohmann::json::object();
  if (fs::exists(p)) {
    try {
      meta = nlohmann::json::parse(read_text_file(p));
    } catch (const nlohmann::json::exception&) {
      meta = nlohmann::json::object();
    }
  }
  meta["tool"] = "selfpref-audit";
  meta["config_hash"] = hash();
  if (!config_.source.empty()) meta["config"] = config_.source.string();
  auto& entry = meta["commands"][std::string(command)];
  if (finished) {
    entry["finished_at"] = utc_now();
  } else {
    entry["started_at"] = utc_now();
    entry.erase("finished_at");
  }
  write_text_file(p, meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

std::vector<GenerationEntry> read_generation_log(const fs::path& path, std::string* model) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<GenerationEntry> out;
  std::string line;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      if (in.peek() == EOF) break;  // interrupted final write
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    try {
      if (header) {
        if (j.value("schema", "") != "selfpref.counterfactuals") {
          throw ParseError(path.string() + ": not a counterfactual log");
        }
        if (model) *model = j.at("model").get<std::string>();
        header = false;
        continue;
      }
      GenerationEntry e;
      e.origin_id = j.at("origin_id").get<std::string>();
      e.summary = j.at("summary").get<std::string>();
      e.word_count = j.value("word_count", std::size_t{0});
      e.in_range = j.value("in_range", true);
      e.attempts = j.value("attempts", 0);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (header) throw ParseError(path.string() + ": missing header");
  return out;
}

namespace {

std::string entry_line(const GenerationEntry& e) {
  return nlohmann::json{{"origin_id", e.origin_id},
                        {"summary", e.summary},
                        {"word_count", e.word_count},
                        {"in_range", e.in_range},
                        {"attempts", e.attempts}}
             .dump() +
         "\n";
}

}  // namespace

void start_generation_log(const fs::path& path, std::string_view model, std::string_view hash) {
  std::string content = nlohmann::json{{"schema", "selfpref.counterfactuals"},
                                       {"version", 1},
                                       {"model", model},
                                       {"config_hash", hash}}
                            .dump() +
                        "\n";
  if (fs::exists(path)) {
    std::string existing;
    for (const auto& e : read_generation_log(path, &existing)) content += entry_line(e);
    if (existing != model) {
      throw ValidationError(path.string() + " holds summaries of model '" + existing + "'");
    }
  }
  write_text_file(path, content);
}

void append_generation_entry(const fs::path& path, const GenerationEntry& e) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw ValidationError("cannot append to " + path.string());
  out << entry_line(e);
  out.flush();
}

}  // namespace selfpref::cli
