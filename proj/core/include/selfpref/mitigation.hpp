#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfpref/experiment.hpp"
#include "selfpref/stats.hpp"

namespace selfpref {

// run_comparisons with the debias prompt variant.
ComparisonSummary run_debias_prompt(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                    llm::PairJudge& judge, RunLog* log = nullptr,
                                    const QualityMap* quality = nullptr);

Position majority_vote(const std::array<Position, 3>& votes);

// Probability that at least two of three independent judges pick the same
// side, given each one's probability of picking it.
double ensemble_self_rate(double p1, double p2, double p3);

// Three-member panel. Every member sees the same presentation order; the
// verdict is combined only after all three have answered. A member failure
// makes the whole pair unresolved.
class MajorityPanelJudge : public llm::PairJudge {
 public:
  MajorityPanelJudge(std::string name, std::array<std::shared_ptr<llm::PairJudge>, 3> members);

  llm::Judgement judge(const llm::PairView& pair, PromptVariant variant) override;
  std::string evaluator() const override { return name_; }
  std::size_t max_parallel() const override;

 private:
  std::string name_;
  std::array<std::shared_ptr<llm::PairJudge>, 3> members_;
};

struct StrategyOutcome {
  std::string strategy;
  double bias_after = 0;
  double absolute_decrease_pp = 0;             // 100 * (baseline - after)
  std::optional<double> relative_decrease_pct;  // 100 * (baseline - after) / baseline
};

struct MitigationReport {
  std::string evaluator;
  BiasMetric metric = BiasMetric::StatisticalParity;
  double baseline = 0;
  std::vector<StrategyOutcome> strategies;
};

// Pure report arithmetic on bias values given as fractions in [-1, 1].
// Relative decrease is absent when the baseline is not positive.
MitigationReport make_mitigation_report(const std::string& evaluator, double baseline,
                                        const std::vector<std::pair<std::string, double>>& after);

// Computes each bias from records (parity, or equal opportunity when `truth`
// is given) and builds the report. All record sets must cover the same pairs.
MitigationReport mitigation_report(
    const std::string& evaluator, const std::vector<EvaluationRecord>& baseline,
    const std::vector<std::pair<std::string, std::vector<EvaluationRecord>>>& strategies,
    const std::vector<GroundTruthLabel>* truth = nullptr,
    const EqualOpportunityOptions& eo_options = {});

// Percentage display for report cells: one decimal, truncated toward zero.
std::string report_cell(double percent);

// Text table: one row per evaluator and strategy with baseline, after,
// absolute (pp) and relative (%) decrease.
std::string render_mitigation_table(const std::vector<MitigationReport>& reports);
std::string mitigation_csv(const std::vector<MitigationReport>& reports);
nlohmann::json mitigation_to_json(const std::vector<MitigationReport>& reports);

}  // namespace selfpref
