#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfpref/corpus.hpp"
#include "selfpref/experiment.hpp"
#include "selfpref/judge.hpp"
#include "selfpref/llm.hpp"
#include "selfpref/simulation.hpp"
#include "selfpref/synthetic.hpp"

namespace selfpref {

// A summary generator: either a provider endpoint or a built-in mock.
struct ModelConfig {
  std::string name;
  std::optional<llm::ModelEndpoint> endpoint;
  std::string mock;  // "synthetic" or "echo" when no endpoint is given
  std::size_t echo_words = 50;
};

struct EvaluatorConfig {
  enum class Kind { Llm, Mock, Panel };
  std::string name;
  Kind kind = Kind::Mock;
  std::string model;                  // Llm: key into AuditConfig::models
  llm::MockEvaluatorConfig mock;      // Mock
  std::vector<std::string> members;   // Panel: three evaluator names
};

struct AuditConfig {
  std::filesystem::path source;  // config file, empty for in-memory configs
  std::string hash;              // FNV-1a of the config text plus overrides
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  std::optional<std::filesystem::path> corpus_path;
  LoadOptions load;
  std::optional<SyntheticCorpusOptions> synthetic;
  std::optional<std::filesystem::path> quality_path;  // resume_id,quality CSV

  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> external_scores_path;
  std::size_t top_k = 25;
  double ridge = 0.0;

  std::size_t bootstrap_resamples = 10000;
  std::size_t bootstrap_threads = 1;
  RatingScale rating_scale;
  std::optional<std::filesystem::path> annotations_path;

  llm::GenerationOptions generation;
  OrderMode order = OrderMode::Coin;

  std::map<std::string, ModelConfig> models;
  std::map<std::string, EvaluatorConfig> evaluators;
  PipelineConfig simulation;

  const EvaluatorConfig& evaluator(std::string_view name) const;
  const ModelConfig& model(std::string_view name) const;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

// Replaces ${NAME} with the variable's value; an undefined variable is an
// error. "$$" escapes a literal dollar sign.
std::string interpolate_env(std::string_view text, const EnvLookup& env);

std::string hex_hash(std::string_view text);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

// Parses TOML text. Relative paths resolve against `base_dir`. Throws
// ValidationError on unknown evaluator references, missing files or invalid
// mock parameters.
AuditConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                         const ConfigOverrides& overrides = {}, const EnvLookup& env = {},
                         std::string_view source_name = "<config>");
AuditConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

}  // namespace selfpref
