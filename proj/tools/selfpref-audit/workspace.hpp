#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfpref/config.hpp"
#include "selfpref/corpus.hpp"
#include "selfpref/experiment.hpp"
#include "selfpref/judge.hpp"
#include "selfpref/llm.hpp"

namespace selfpref::cli {

namespace fs = std::filesystem;

// File-name-safe form of a model or evaluator name ("mock:biased" -> "mock_biased").
std::string sanitize(std::string_view name);

struct CorpusView {
  ResumeStore store;
  QualityMap quality;
  std::size_t input_count = 0;
  std::vector<std::string> dropped_ids;
  std::vector<std::string> generated_models;  // models with a counterfactual log
  std::vector<std::string> warnings;
};

// The output directory of one audit config. Every artifact written through
// it carries the config hash.
class Workspace {
 public:
  explicit Workspace(AuditConfig config);

  const AuditConfig& config() const { return config_; }
  const std::string& hash() const { return config_.hash; }
  const fs::path& root() const { return config_.output_dir; }
  fs::path path(const fs::path& rel) const { return root() / rel; }

  void write_json(const fs::path& rel, nlohmann::json j) const;
  void write_csv(const fs::path& rel, std::string_view csv_text) const;
  void write_text(const fs::path& rel, std::string_view text) const;
  nlohmann::json read_json(const fs::path& rel_or_abs) const;

  // Throws ValidationError "<what> not found ...; run `<command>` first".
  fs::path require(const fs::path& rel_or_abs, std::string_view what,
                   std::string_view command) const;
  // Existing file: as given, else under the output dir, else under `subdir`.
  fs::path resolve(const fs::path& p, std::string_view subdir) const;

  fs::path counterfactual_log(std::string_view model) const;
  fs::path manifest_path(std::string_view evaluator_model, std::string_view other) const;
  fs::path run_path(std::string_view evaluator, std::string_view manifest_stem,
                    PromptVariant variant) const;

  // Human resumes from the configured corpus plus every counterfactual
  // generated so far; quality values for mock judges.
  CorpusView load_corpus() const;

  std::shared_ptr<llm::PairJudge> make_judge(std::string_view evaluator) const;
  std::unique_ptr<llm::Shortlister> make_shortlister(std::string_view evaluator) const;
  // Model whose outputs count as the evaluator's own.
  std::string self_model(std::string_view evaluator) const;

  // Records start/finish timestamps for a command in metadata.json, the only
  // file whose content depends on wall-clock time.
  void stamp(std::string_view command, bool finished) const;

 private:
  AuditConfig config_;
  std::shared_ptr<llm::ChatTransport> transport_;
};

// ---------------------------------------------------------------------------
// Counterfactual generation log (JSONL: header line, then one entry per origin)

struct GenerationEntry {
  std::string origin_id;
  std::string summary;
  std::size_t word_count = 0;
  bool in_range = true;
  int attempts = 0;
};

std::vector<GenerationEntry> read_generation_log(const fs::path& path, std::string* model = nullptr);
void append_generation_entry(const fs::path& path, const GenerationEntry& e);
void start_generation_log(const fs::path& path, std::string_view model, std::string_view hash);

}  // namespace selfpref::cli
