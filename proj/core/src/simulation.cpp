#include "selfpref/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "selfpref/bounded.hpp"
#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/numeric.hpp"
#include "selfpref/random.hpp"

namespace selfpref {

void PipelineConfig::validate() const {
  if (runs_per_category < 2) throw ValidationError("simulation needs at least two runs per category");
  if (profiles_per_run < 1) throw ValidationError("simulation needs at least one profile per run");
  if (slots < 1 || slots >= 2 * profiles_per_run) {
    throw ValidationError("slots must be in [1, 2 * profiles_per_run)");
  }
}

CategoryBias category_bias(const std::vector<RunTally>& runs, std::size_t slots, double z) {
  if (runs.size() < 2) throw ValidationError("category bias needs at least two runs");
  if (slots == 0) throw ValidationError("slots must be positive");
  CategoryBias c;
  c.runs = runs.size();
  const double r = static_cast<double>(runs.size());
  std::vector<double> per_run;
  double sum_ai = 0, sum_human = 0;
  for (const auto& t : runs) {
    per_run.push_back((static_cast<double>(t.n_ai) - static_cast<double>(t.n_human)) /
                      static_cast<double>(slots));
    sum_ai += static_cast<double>(t.n_ai);
    sum_human += static_cast<double>(t.n_human);
  }
  double mean = 0;
  for (double v : per_run) mean += v;
  mean /= r;
  double ss = 0;
  for (double v : per_run) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (r - 1.0));
  c.estimate = mean;
  c.ci_low = mean - z * sd / std::sqrt(r);
  c.ci_high = mean + z * sd / std::sqrt(r);
  c.mean_ai = sum_ai / r;
  c.mean_human = sum_human / r;
  if (sum_human > 0) c.likelihood_ratio = c.mean_ai / c.mean_human - 1.0;
  return c;
}

namespace {

struct RunOutcome {
  std::optional<RunTally> tally;
  std::size_t redraws = 0;
};

}  // namespace

SimulationResult run_pipeline(const ResumeStore& store, const std::string& evaluator_model,
                              llm::Shortlister& shortlister, const PipelineConfig& config,
                              const QualityMap* quality) {
  config.validate();
  SimulationResult result;
  result.evaluator_model = evaluator_model;

  std::map<std::string, std::vector<const Resume*>> eligible;
  for (const auto& r : store.all()) {
    if (!r.source.is_human()) continue;
    auto& list = eligible[r.category];
    if (store.find(counterfactual_id(r.id, evaluator_model))) list.push_back(&r);
  }
  std::vector<std::string> categories = config.categories;
  if (categories.empty()) {
    for (const auto& [cat, _] : eligible) categories.push_back(cat);
  }
  auto q = [&](const std::string& id) {
    if (!quality) return 0.0;
    auto it = quality->find(id);
    return it == quality->end() ? 0.0 : it->second;
  };

  for (const auto& category : categories) {
    const auto it = eligible.find(category);
    const std::size_t available = it == eligible.end() ? 0 : it->second.size();
    if (available < config.profiles_per_run) {
      result.warnings.push_back("category '" + category + "' skipped: " +
                                std::to_string(available) + " profile(s) with " +
                                evaluator_model + " counterfactuals, need " +
                                std::to_string(config.profiles_per_run));
      continue;
    }
    const auto& profiles = it->second;

    auto task = [&](std::size_t run) {
      RunOutcome out;
      for (std::size_t attempt = 0; attempt <= config.max_redraws; ++attempt) {
        Engine eng = make_engine(derive_seed(
            derive_seed(derive_seed(config.seed, category), static_cast<std::uint64_t>(run)),
            static_cast<std::uint64_t>(attempt)));
        std::vector<std::size_t> idx(profiles.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        shuffle(idx, eng);
        std::vector<llm::PoolCandidate> pool;
        for (std::size_t k = 0; k < config.profiles_per_run; ++k) {
          const Resume* human = profiles[idx[k]];
          const Resume* own = &store.at(counterfactual_id(human->id, evaluator_model));
          pool.push_back({"", human, q(human->id)});
          pool.push_back({"", own, q(own->id)});
        }
        shuffle(pool, eng);
        for (std::size_t k = 0; k < pool.size(); ++k) pool[k].id = "c" + std::to_string(k + 1);
        try {
          const auto chosen = shortlister.shortlist(pool, config.slots);
          RunTally t;
          t.run = run;
          t.redraws = attempt;
          t.selected.assign(pool.size(), false);
          for (const auto& id : chosen) {
            const auto pos = static_cast<std::size_t>(std::stoul(id.substr(1))) - 1;
            t.selected.at(pos) = true;
            (pool[pos].resume->source.is_human() ? t.n_human : t.n_ai)++;
          }
          if (t.n_ai + t.n_human != config.slots) {
            throw ValidationError("shortlist returned " + std::to_string(t.n_ai + t.n_human) +
                                  " candidates, expected " + std::to_string(config.slots));
          }
          out.tally = std::move(t);
          out.redraws = attempt;
          return out;
        } catch (const MalformedResponse&) {
        } catch (const TransportError&) {
        }
        out.redraws = attempt + 1;
      }
      return out;
    };

    SimulationOutcome outcome;
    outcome.category = category;
    bool exhausted = false;
    run_bounded(config.runs_per_category, shortlister.max_parallel(), task,
                [&](std::size_t, RunOutcome o) {
                  result.redraws += o.redraws;
                  if (o.tally) {
                    outcome.runs.push_back(std::move(*o.tally));
                  } else {
                    exhausted = true;
                  }
                });
    if (exhausted) {
      result.warnings.push_back("category '" + category +
                                "' skipped: a run exhausted its redraw budget");
      continue;
    }
    outcome.bias = category_bias(outcome.runs, config.slots);
    result.outcomes.push_back(std::move(outcome));
  }
  if (result.redraws) {
    result.warnings.push_back(std::to_string(result.redraws) +
                              " malformed shortlist(s) discarded and redrawn");
  }
  return result;
}

std::string simulation_csv(const SimulationResult& r) {
  std::string out = "category,bias,ci_low,ci_high,runs,mean_ai,mean_human,likelihood_ratio\n";
  for (const auto& o : r.outcomes) {
    const auto& b = o.bias;
    out += csv::join_row({o.category, fixed(b.estimate, 3), fixed(b.ci_low, 3), fixed(b.ci_high, 3),
                          std::to_string(b.runs), fixed(b.mean_ai, 3), fixed(b.mean_human, 3),
                          b.likelihood_ratio ? fixed(*b.likelihood_ratio, 3) : "NA"});
    out += '\n';
  }
  return out;
}

std::string simulation_runs_csv(const SimulationResult& r) {
  std::string out = "category,run,n_ai,n_human,redraws\n";
  for (const auto& o : r.outcomes) {
    for (const auto& t : o.runs) {
      out += csv::join_row({o.category, std::to_string(t.run), std::to_string(t.n_ai),
                            std::to_string(t.n_human), std::to_string(t.redraws)});
      out += '\n';
    }
  }
  return out;
}

nlohmann::json simulation_to_json(const SimulationResult& r) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& o : r.outcomes) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& t : o.runs) runs.push_back({t.n_ai, t.n_human});
    const auto& b = o.bias;
    cats.push_back({{"category", o.category},
                    {"bias", b.estimate},
                    {"ci_low", b.ci_low},
                    {"ci_high", b.ci_high},
                    {"runs", b.runs},
                    {"mean_ai", b.mean_ai},
                    {"mean_human", b.mean_human},
                    {"likelihood_ratio",
                     b.likelihood_ratio ? nlohmann::json(*b.likelihood_ratio) : nlohmann::json()},
                    {"tallies_ai_human", runs}});
  }
  return {{"evaluator", r.evaluator_model},
          {"interval", "normal approximation, mean +/- 1.96 sd / sqrt(runs)"},
          {"categories", cats},
          {"redraws", r.redraws},
          {"warnings", r.warnings}};
}

}  // namespace selfpref
