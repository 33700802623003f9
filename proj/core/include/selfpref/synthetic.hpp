#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfpref/corpus.hpp"
#include "selfpref/experiment.hpp"

namespace selfpref {

// Seeded stand-in corpus for mock pipelines and tests: human resumes built
// from phrase banks, plus per-model counterfactual summaries with a
// model-specific register. Quality values are latent scores for mock judges.

struct SyntheticCorpusOptions {
  std::size_t categories = 24;
  std::size_t per_category = 30;
  std::vector<std::string> models;
  double counterfactual_quality_sd = 0.5;  // spread of model quality around the origin
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  ResumeStore store;
  QualityMap quality;
};

// Up to 24 occupational category names; more are numbered.
std::vector<std::string> synthetic_categories(std::size_t n);

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options);

// Assigns latent quality to every counterfactual in `store` whose origin has
// a quality value: origin quality plus sd * N(0, 1), seeded by resume id.
void extend_quality(QualityMap& quality, const ResumeStore& store, double sd, std::uint64_t seed);

// Deterministic model-styled summary for an origin resume (30-80 words).
std::string synthetic_rewrite(const Resume& origin, const std::string& model, std::uint64_t seed);

}  // namespace selfpref
