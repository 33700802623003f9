#include <doctest.h>

#include <cmath>

#include "selfpref/error.hpp"
#include "selfpref/simulation.hpp"
#include "selfpref/synthetic.hpp"

using namespace selfpref;

namespace {

RunTally tally(std::size_t ai, std::size_t human) {
  RunTally t;
  t.n_ai = ai;
  t.n_human = human;
  return t;
}

SyntheticCorpus corpus(std::size_t categories, std::size_t per_category) {
  SyntheticCorpusOptions o;
  o.categories = categories;
  o.per_category = per_category;
  o.models = {"m"};
  o.seed = 12;
  return make_synthetic_corpus(o);
}

llm::MockEvaluatorConfig mock(double recognition, double p_self) {
  llm::MockEvaluatorConfig c;
  c.self_model = "m";
  c.recognition_rate = recognition;
  c.p_self = p_self;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("category bias on hand-computed tallies") {
  std::vector<RunTally> runs;
  for (int i = 0; i < 15; ++i) runs.push_back(tally(3, 1));
  for (int i = 0; i < 15; ++i) runs.push_back(tally(2, 2));
  const auto c = category_bias(runs, 4);
  CHECK(c.estimate == doctest::Approx(0.25));
  const double sd = std::sqrt(1.875 / 29.0);
  CHECK(c.ci_low == doctest::Approx(0.25 - 1.959963984540054 * sd / std::sqrt(30.0)));
  CHECK(c.ci_high == doctest::Approx(0.25 + 1.959963984540054 * sd / std::sqrt(30.0)));
  CHECK(c.mean_ai == doctest::Approx(2.5));
  CHECK(c.mean_human == doctest::Approx(1.5));
  REQUIRE(c.likelihood_ratio.has_value());
  CHECK(*c.likelihood_ratio == doctest::Approx(2.0 / 3.0));

  const auto even = category_bias(std::vector<RunTally>(30, tally(2, 2)), 4);
  CHECK(even.estimate == 0.0);
  CHECK(even.ci_low == 0.0);
  CHECK(even.ci_high == 0.0);

  const auto all_ai = category_bias(std::vector<RunTally>(30, tally(4, 0)), 4);
  CHECK(all_ai.estimate == 1.0);
  CHECK_FALSE(all_ai.likelihood_ratio.has_value());

  CHECK_THROWS_AS(category_bias({tally(2, 2)}, 4), ValidationError);
}

TEST_CASE("fully biased shortlister selects only AI versions") {
  const auto c = corpus(6, 10);
  llm::MockShortlister s(mock(1.0, 1.0));
  PipelineConfig p;
  p.runs_per_category = 10;
  p.seed = 3;
  const auto r = run_pipeline(c.store, "m", s, p, &c.quality);
  REQUIRE(r.outcomes.size() == 6);
  for (const auto& o : r.outcomes) {
    CHECK(o.bias.estimate == 1.0);
    for (const auto& t : o.runs) {
      CHECK(t.n_ai == 4);
      CHECK(t.n_ai + t.n_human == p.slots);
      CHECK(std::count(t.selected.begin(), t.selected.end(), true) == 4);
    }
  }
}

TEST_CASE("a fair shortlister treats both pool halves alike") {
  const auto c = corpus(4, 12);
  llm::MockShortlister s(mock(0.0, 1.0));
  PipelineConfig p;
  p.runs_per_category = 300;
  p.seed = 8;
  const auto r = run_pipeline(c.store, "m", s, p);
  double total = 0;
  std::size_t runs = 0;
  for (const auto& o : r.outcomes) {
    for (const auto& t : o.runs) {
      CHECK(t.n_ai + t.n_human == p.slots);
      total += (static_cast<double>(t.n_ai) - static_cast<double>(t.n_human)) / 4.0;
      ++runs;
    }
  }
  CHECK(runs == 1200);
  // Per-run bias has sd at most 1; 4 standard errors.
  CHECK(std::abs(total / runs) < 4.0 / std::sqrt(1200.0));
}

TEST_CASE("simulation is deterministic and skips small categories") {
  auto c = corpus(3, 6);
  llm::MockShortlister s(mock(0.5, 0.9));
  PipelineConfig p;
  p.runs_per_category = 5;
  p.profiles_per_run = 6;
  const auto a = run_pipeline(c.store, "m", s, p);
  const auto b = run_pipeline(c.store, "m", s, p);
  CHECK(simulation_runs_csv(a) == simulation_runs_csv(b));

  p.profiles_per_run = 7;
  p.slots = 4;
  const auto skipped = run_pipeline(c.store, "m", s, p);
  CHECK(skipped.outcomes.empty());
  CHECK(skipped.warnings.size() == 3);

  p.slots = 14;
  CHECK_THROWS_AS(run_pipeline(c.store, "m", s, p), ValidationError);
}

TEST_CASE("malformed shortlists are redrawn") {
  class Flaky : public llm::Shortlister {
   public:
    std::vector<std::string> shortlist(const std::vector<llm::PoolCandidate>& pool, std::size_t slots) override {
      if (++calls % 2 == 1) throw MalformedResponse("bad", "x");
      std::vector<std::string> out;
      for (std::size_t i = 0; i < slots; ++i) out.push_back(pool[i].id);
      return out;
    }
    std::string evaluator() const override { return "m"; }
    std::size_t calls = 0;
  };
  const auto c = corpus(1, 5);
  Flaky f;
  PipelineConfig p;
  p.runs_per_category = 4;
  const auto r = run_pipeline(c.store, "m", f, p);
  REQUIRE(r.outcomes.size() == 1);
  CHECK(r.redraws == 4);
  for (const auto& t : r.outcomes[0].runs) CHECK(t.redraws == 1);
}
