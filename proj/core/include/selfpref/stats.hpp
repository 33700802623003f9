#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfpref/experiment.hpp"
#include "selfpref/textmetrics.hpp"

namespace selfpref {

using text::ExternalScores;
using text::FeatureFamily;
using text::FeatureVector;
using text::Lexicon;

// ---------------------------------------------------------------------------
// Bias metrics

enum class BiasMetric { StatisticalParity, EqualOpportunity };

std::string_view metric_name(BiasMetric m);

struct BiasEstimate {
  BiasMetric metric = BiasMetric::StatisticalParity;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t n_pairs = 0;        // resolved records used
  std::size_t n_conditioned = 0;  // pairs with a non-tie truth label
  std::size_t n_excluded = 0;     // malformed records skipped
  // Equal opportunity only: cell sizes and per-cell selection rates.
  std::size_t n_evaluator_better = 0;
  std::size_t n_other_better = 0;
  std::size_t n_ties = 0;
  double self_rate = 0;  // parity: share of records choosing the evaluator member
  std::vector<std::string> warnings;
};

// 2p - 1 where p is the share of resolved records choosing the evaluator's
// own member; normal-approximation 95% interval on p, mapped the same way.
// Throws EstimationError when no record is resolved.
BiasEstimate parity_bias(const std::vector<EvaluationRecord>& records, double z = 1.959963984540054);

enum class EmptyCellPolicy { Zero, Error };

struct EqualOpportunityOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  EmptyCellPolicy empty_cell = EmptyCellPolicy::Zero;
};

// Among pairs whose truth label names a better member:
//   P(choose evaluator | evaluator better) - P(choose other | other better)
// with a percentile bootstrap interval over conditioned pairs. Each replicate
// draws from its own substream, so the result does not depend on `threads`.
// The interval is widened if needed so that it contains the estimate.
BiasEstimate equal_opportunity_bias(const std::vector<EvaluationRecord>& records,
                                    const std::vector<GroundTruthLabel>& truth,
                                    const EqualOpportunityOptions& options = {});

nlohmann::json bias_to_json(const BiasEstimate& b);

// ---------------------------------------------------------------------------
// Pair feature rows

// Quality controls for one resume: lexicon features of the summary, automatic
// scores of the summary against the body, and any external scores.
FeatureVector resume_features(const Resume& r, const Lexicon& lexicon,
                              const ExternalScores* external = nullptr);

struct PairFeatureRow {
  std::string pair_id;
  std::vector<double> dx;         // evaluator member minus other member
  bool preferred_evaluator = false;
};

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<PairFeatureRow> rows;
  std::size_t excluded = 0;  // unresolved or unmatched records
  std::vector<std::string> warnings;

  std::vector<double> column(std::size_t j) const;
  FeatureTable subset(const std::vector<std::string>& keep) const;
};

// One row per resolved record. Feature ids missing for any member are dropped
// with a warning; `families` (if non-empty) restricts the features used.
FeatureTable build_feature_table(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                 const std::vector<EvaluationRecord>& records,
                                 const std::map<std::string, FeatureVector>& features,
                                 const std::vector<FeatureFamily>& families = {});

struct FeatureSelection {
  std::vector<std::string> kept;
  struct Dropped {
    std::string name;
    std::string reason;
  };
  std::vector<Dropped> dropped;
};

struct SelectionOptions {
  double min_sd = 1e-8;
  double max_abs_correlation = 0.95;
  std::size_t top_k = 25;
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// (1) drop near-constant columns, (2) among highly correlated columns keep
// the lexicographically first, (3) keep the top K by |r| with the preference
// indicator. Kept names come back in ascending order.
FeatureSelection select_features(const FeatureTable& table, const SelectionOptions& options = {});

// ---------------------------------------------------------------------------
// Conditional logit (difference form: intercept = evaluator coefficient)

inline constexpr std::string_view kEvaluatorTerm = "evaluatorLLM";

struct FitOptions {
  double ridge = 0.0;
  double tolerance = 1e-8;
  int max_iterations = 100;
  double separation_bound = 50.0;
};

struct FitResult {
  std::vector<std::string> terms;  // evaluatorLLM, then feature names
  std::vector<double> beta;
  std::vector<double> robust_se;   // NaN when not converged
  std::vector<double> z;
  std::vector<double> p;
  double log_likelihood = 0;
  double null_log_likelihood = 0;
  double pseudo_r2 = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_max_norm = 0;
  std::size_t n_pairs = 0;
  std::size_t n_observations = 0;  // long format: two rows per pair
  double ridge = 0;
  std::vector<std::string> warnings;
};

struct LoglikDerivatives {
  double value = 0;
  std::vector<double> gradient;
  std::vector<std::vector<double>> hessian;
};

// Log-likelihood of the difference-form logit (minus ridge/2 * |beta|^2) and
// its analytic gradient and Hessian. beta[0] is the intercept.
LoglikDerivatives loglik_gradient_hessian(const std::vector<double>& beta,
                                          const FeatureTable& table, double ridge = 0.0);

// Damped Newton-Raphson. Throws EstimationError on a rank-deficient design
// (naming the collinear features) or on separation.
FitResult fit_conditional_logit(const FeatureTable& table, const FitOptions& options = {});

// sigma(b) - sigma(-b), i.e. tanh(b / 2).
double beta_to_bias(double beta1);

std::string significance_stars(double p);

nlohmann::json fit_to_json(const FitResult& f);
FitResult fit_from_json(const nlohmann::json& j);
std::string fit_to_csv(const FitResult& f);
// Plain-text regression table: estimate with stars, SE in parentheses,
// then observation/pair counts and fit statistics.
std::string render_regression_table(const std::vector<std::pair<std::string, FitResult>>& columns);

}  // namespace selfpref
