#pragma once

// Small builders shared by the unit and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "selfpref/corpus.hpp"
#include "selfpref/experiment.hpp"
#include "selfpref/random.hpp"
#include "selfpref/stats.hpp"

namespace fixtures {

using namespace selfpref;

inline Resume human(std::string id, std::string summary, std::string body = "Experience: built things.",
                    std::string category = "Engineering") {
  Resume r;
  r.id = id;
  r.category = std::move(category);
  r.summary = std::move(summary);
  r.body = std::move(body);
  r.source = Source::human();
  r.origin_id = std::move(id);
  return r;
}

// One resolved record for a self model "m" against a human member.
inline EvaluationRecord record(std::string pair_id, bool self_first, bool chose_first,
                               std::string self_model = "m") {
  EvaluationRecord r;
  r.pair_id = std::move(pair_id);
  r.evaluator = self_model;
  r.self_model = self_model;
  r.first_source = self_first ? Source::model(self_model) : Source::human();
  r.second_source = self_first ? Source::human() : Source::model(self_model);
  r.chosen_position = chose_first ? Position::First : Position::Second;
  r.chosen_source = chose_first ? r.first_source : r.second_source;
  return r;
}

inline EvaluationRecord malformed(std::string pair_id, std::string self_model = "m") {
  EvaluationRecord r;
  r.pair_id = std::move(pair_id);
  r.evaluator = self_model;
  r.self_model = self_model;
  r.status = RecordStatus::Malformed;
  r.first_source = Source::model(self_model);
  r.second_source = Source::human();
  r.error = "unparseable";
  return r;
}

// Record whose evaluator chose its own member with the given outcome.
inline EvaluationRecord self_choice(std::string pair_id, bool self_first, bool chose_self) {
  return record(std::move(pair_id), self_first, chose_self == self_first);
}

// Difference-form logit rows with Bernoulli outcomes from the given
// coefficients (beta[0] is the intercept).
inline FeatureTable logit_table(const std::vector<double>& beta, std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  FeatureTable t;
  for (std::size_t j = 1; j < beta.size(); ++j) t.names.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    PairFeatureRow r;
    r.pair_id = "p" + std::to_string(i);
    double eta = beta[0];
    for (std::size_t j = 1; j < beta.size(); ++j) {
      r.dx.push_back(standard_normal(eng));
      eta += beta[j] * r.dx.back();
    }
    r.preferred_evaluator = uniform01(eng) < 1.0 / (1.0 + std::exp(-eta));
    t.rows.push_back(std::move(r));
  }
  return t;
}

// n human resumes "h<i>" plus a counterfactual of each for every model.
inline ResumeStore paired_store(std::size_t n, const std::vector<std::string>& models) {
  ResumeStore store;
  for (std::size_t i = 0; i < n; ++i) {
    auto h = human("h" + std::to_string(i), "Human summary number " + std::to_string(i) + ".");
    for (const auto& m : models) store.add(splice_summary(h, "Generated summary by " + m + ".", m));
    store.add(std::move(h));
  }
  return store;
}

}  // namespace fixtures
