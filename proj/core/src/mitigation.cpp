#include "selfpref/mitigation.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/numeric.hpp"

namespace selfpref {

ComparisonSummary run_debias_prompt(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                    llm::PairJudge& judge, RunLog* log,
                                    const QualityMap* quality) {
  return run_comparisons(pairs, store, judge, PromptVariant::Debias, log, quality);
}

Position majority_vote(const std::array<Position, 3>& votes) {
  const auto first = std::count(votes.begin(), votes.end(), Position::First);
  return first >= 2 ? Position::First : Position::Second;
}

double ensemble_self_rate(double p1, double p2, double p3) {
  return p1 * p2 + p1 * p3 + p2 * p3 - 2.0 * p1 * p2 * p3;
}

MajorityPanelJudge::MajorityPanelJudge(std::string name,
                                       std::array<std::shared_ptr<llm::PairJudge>, 3> members)
    : name_(std::move(name)), members_(std::move(members)) {
  for (const auto& m : members_) {
    if (!m) throw ValidationError("majority panel needs three members");
  }
}

std::size_t MajorityPanelJudge::max_parallel() const {
  std::size_t p = members_[0]->max_parallel();
  for (const auto& m : members_) p = std::min(p, m->max_parallel());
  return p;
}

llm::Judgement MajorityPanelJudge::judge(const llm::PairView& pair, PromptVariant variant) {
  std::array<std::optional<llm::Judgement>, 3> got;
  std::array<std::string, 3> errors;
  auto ask = [&](std::size_t k) {
    try {
      got[k] = members_[k]->judge(pair, variant);
    } catch (const Error& e) {
      errors[k] = members_[k]->evaluator() + ": " + e.what();
    }
  };
  const bool concurrent = std::any_of(members_.begin(), members_.end(),
                                      [](const auto& m) { return m->max_parallel() > 1; });
  if (concurrent) {
    std::array<std::future<void>, 3> futures;
    for (std::size_t k = 0; k < 3; ++k) futures[k] = std::async(std::launch::async, ask, k);
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t k = 0; k < 3; ++k) ask(k);
  }

  std::string raw;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k) raw += ",";
    raw += got[k] ? (got[k]->chosen == Position::First ? "A" : "B") : "?";
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw MalformedResponse("panel member unresolved (" + e + ")", raw);
  }
  return {majority_vote({got[0]->chosen, got[1]->chosen, got[2]->chosen}), raw};
}

MitigationReport make_mitigation_report(const std::string& evaluator, double baseline,
                                        const std::vector<std::pair<std::string, double>>& after) {
  MitigationReport r;
  r.evaluator = evaluator;
  r.baseline = baseline;
  for (const auto& [name, a] : after) {
    StrategyOutcome s;
    s.strategy = name;
    s.bias_after = a;
    s.absolute_decrease_pp = 100.0 * (baseline - a);
    if (baseline > 0) s.relative_decrease_pct = 100.0 * (baseline - a) / baseline;
    r.strategies.push_back(std::move(s));
  }
  return r;
}

MitigationReport mitigation_report(
    const std::string& evaluator, const std::vector<EvaluationRecord>& baseline,
    const std::vector<std::pair<std::string, std::vector<EvaluationRecord>>>& strategies,
    const std::vector<GroundTruthLabel>* truth, const EqualOpportunityOptions& eo_options) {
  auto ids = [](const std::vector<EvaluationRecord>& rs) {
    std::set<std::string> s;
    for (const auto& r : rs) s.insert(r.pair_id);
    return s;
  };
  const auto base_ids = ids(baseline);
  for (const auto& [name, rs] : strategies) {
    const auto other = ids(rs);
    if (other != base_ids) {
      std::size_t only_base = 0, only_other = 0;
      for (const auto& id : base_ids) only_base += other.count(id) == 0;
      for (const auto& id : other) only_other += base_ids.count(id) == 0;
      throw ValidationError("strategy '" + name + "' covers different pairs than the baseline (" +
                            std::to_string(only_base) + " missing, " +
                            std::to_string(only_other) + " extra)");
    }
  }
  auto bias = [&](const std::vector<EvaluationRecord>& rs) {
    return truth ? equal_opportunity_bias(rs, *truth, eo_options).estimate
                 : parity_bias(rs).estimate;
  };
  std::vector<std::pair<std::string, double>> after;
  for (const auto& [name, rs] : strategies) after.emplace_back(name, bias(rs));
  auto report = make_mitigation_report(evaluator, bias(baseline), after);
  report.metric = truth ? BiasMetric::EqualOpportunity : BiasMetric::StatisticalParity;
  return report;
}

std::string report_cell(double percent) { return fixed(truncate_places(percent, 1), 1); }

namespace {

std::string pad(const std::string& s, std::size_t w, bool left) {
  if (s.size() >= w) return s;
  return left ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string render_mitigation_table(const std::vector<MitigationReport>& reports) {
  std::size_t ew = 9, sw = 8;
  for (const auto& r : reports) {
    ew = std::max(ew, r.evaluator.size());
    for (const auto& s : r.strategies) sw = std::max(sw, s.strategy.size());
  }
  ew += 2;
  sw += 2;
  const std::size_t nw = 14;
  std::string out = pad("Evaluator", ew, false) + pad("Strategy", sw, false) +
                    pad("Baseline (%)", nw, true) + pad("After (%)", nw, true) +
                    pad("Abs. dec (pp)", nw, true) + pad("Rel. dec (%)", nw, true) + "\n";
  out += std::string(ew + sw + 4 * nw, '-') + "\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.strategies.size(); ++k) {
      const auto& s = r.strategies[k];
      out += pad(k == 0 ? r.evaluator : "", ew, false) + pad(s.strategy, sw, false) +
             pad(report_cell(100.0 * r.baseline), nw, true) +
             pad(report_cell(100.0 * s.bias_after), nw, true) +
             pad(report_cell(s.absolute_decrease_pp), nw, true) +
             pad(s.relative_decrease_pct ? report_cell(*s.relative_decrease_pct) : "n/a", nw, true) +
             "\n";
    }
  }
  out += "Absolute decreases in percentage points; relative decreases as a share of the baseline.\n";
  return out;
}

std::string mitigation_csv(const std::vector<MitigationReport>& reports) {
  std::string out =
      "evaluator,metric,strategy,baseline_pct,after_pct,absolute_decrease_pp,relative_decrease_pct\n";
  for (const auto& r : reports) {
    for (const auto& s : r.strategies) {
      out += csv::join_row({r.evaluator, std::string(metric_name(r.metric)), s.strategy,
                            report_cell(100.0 * r.baseline), report_cell(100.0 * s.bias_after),
                            report_cell(s.absolute_decrease_pp),
                            s.relative_decrease_pct ? report_cell(*s.relative_decrease_pct) : "NA"});
      out += '\n';
    }
  }
  return out;
}

nlohmann::json mitigation_to_json(const std::vector<MitigationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json ss = nlohmann::json::array();
    for (const auto& s : r.strategies) {
      ss.push_back({{"strategy", s.strategy},
                    {"bias_after", s.bias_after},
                    {"absolute_decrease_pp", s.absolute_decrease_pp},
                    {"relative_decrease_pct", s.relative_decrease_pct
                                                  ? nlohmann::json(*s.relative_decrease_pct)
                                                  : nlohmann::json()},
                    {"display",
                     {{"after", report_cell(100.0 * s.bias_after)},
                      {"absolute", report_cell(s.absolute_decrease_pp)},
                      {"relative", s.relative_decrease_pct ? report_cell(*s.relative_decrease_pct)
                                                           : std::string("n/a")}}}});
    }
    arr.push_back({{"evaluator", r.evaluator},
                   {"metric", metric_name(r.metric)},
                   {"baseline", r.baseline},
                   {"strategies", ss}});
  }
  return arr;
}

}  // namespace selfpref
