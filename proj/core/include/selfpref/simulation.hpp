#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfpref/experiment.hpp"
#include "selfpref/judge.hpp"

namespace selfpref {

struct PipelineConfig {
  std::vector<std::string> categories;  // empty: every category with human resumes
  std::size_t runs_per_category = 30;
  std::size_t profiles_per_run = 5;     // pool = each profile's human and model version
  std::size_t slots = 4;
  std::uint64_t seed = 0;
  std::size_t max_redraws = 10;         // per run, after malformed shortlists

  void validate() const;
};

struct RunTally {
  std::size_t run = 0;
  std::size_t n_ai = 0;
  std::size_t n_human = 0;
  std::size_t redraws = 0;
  std::vector<bool> selected;  // by pool position
};

struct CategoryBias {
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t runs = 0;
  double mean_ai = 0;
  double mean_human = 0;
  // mean_ai / mean_human - 1; absent when no human was ever selected.
  std::optional<double> likelihood_ratio;
};

// Per-run bias (n_ai - n_human) / slots, averaged over runs, with a normal
// interval mean +/- z * sd / sqrt(runs). Needs at least two runs.
CategoryBias category_bias(const std::vector<RunTally>& runs, std::size_t slots,
                           double z = 1.959963984540054);

struct SimulationOutcome {
  std::string category;
  std::vector<RunTally> runs;
  CategoryBias bias;
};

struct SimulationResult {
  std::string evaluator_model;
  std::vector<SimulationOutcome> outcomes;
  std::size_t redraws = 0;
  std::vector<std::string> warnings;
};

// For each category and run: sample profiles without replacement, pool each
// human resume with the evaluator's counterfactual of it, shuffle, shortlist,
// and tally sources. Malformed shortlists are redrawn; categories that are too
// small or exhaust the redraw budget are skipped with a warning.
SimulationResult run_pipeline(const ResumeStore& store, const std::string& evaluator_model,
                              llm::Shortlister& shortlister, const PipelineConfig& config,
                              const QualityMap* quality = nullptr);

std::string simulation_csv(const SimulationResult& r);
std::string simulation_runs_csv(const SimulationResult& r);
nlohmann::json simulation_to_json(const SimulationResult& r);

}  // namespace selfpref
