#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "selfpref/experiment.hpp"
#include "selfpref/random.hpp"
#include "selfpref/stats.hpp"

using namespace selfpref;

namespace {

FeatureTable logit_table(std::size_t n, std::size_t k, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  FeatureTable t;
  for (std::size_t j = 0; j < k; ++j) t.names.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    PairFeatureRow r;
    r.pair_id = "p" + std::to_string(i);
    double eta = 0.8;
    for (std::size_t j = 0; j < k; ++j) {
      r.dx.push_back(standard_normal(eng));
      eta += (j % 2 ? -0.3 : 0.3) * r.dx.back();
    }
    r.preferred_evaluator = uniform01(eng) < 1.0 / (1.0 + std::exp(-eta));
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::vector<EvaluationRecord> records(std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  std::vector<EvaluationRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EvaluationRecord r;
    r.pair_id = "p" + std::to_string(i);
    r.self_model = "m";
    const bool self_first = bernoulli(eng, 0.5);
    r.first_source = self_first ? Source::model("m") : Source::human();
    r.second_source = self_first ? Source::human() : Source::model("m");
    r.chosen_position = bernoulli(eng, 0.5) ? Position::First : Position::Second;
    r.chosen_source = *r.chosen_position == Position::First ? r.first_source : r.second_source;
    out.push_back(std::move(r));
  }
  return out;
}

void BM_FitConditionalLogit(benchmark::State& state) {
  const auto t = logit_table(static_cast<std::size_t>(state.range(0)),
                             static_cast<std::size_t>(state.range(1)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(fit_conditional_logit(t));
}
BENCHMARK(BM_FitConditionalLogit)->Args({2245, 5})->Args({2245, 25})->Unit(benchmark::kMillisecond);

void BM_ParityBias(benchmark::State& state) {
  const auto rs = records(2245, 3);
  for (auto _ : state) benchmark::DoNotOptimize(parity_bias(rs));
}
BENCHMARK(BM_ParityBias);

void BM_EqualOpportunityBootstrap(benchmark::State& state) {
  const auto rs = records(2245, 5);
  std::vector<GroundTruthLabel> truth;
  Engine eng = make_engine(9);
  for (const auto& r : rs) {
    truth.push_back({r.pair_id, bernoulli(eng, 0.5) ? TruthLabel::First : TruthLabel::Second});
  }
  EqualOpportunityOptions o;
  o.resamples = 10000;
  o.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(equal_opportunity_bias(rs, truth, o));
}
BENCHMARK(BM_EqualOpportunityBootstrap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BootstrapMajority(benchmark::State& state) {
  std::vector<AnnotationVote> votes;
  Engine eng = make_engine(11);
  for (int p = 0; p < 100; ++p) {
    for (int a = 0; a < 3; ++a) {
      AnnotationVote v;
      v.pair_id = "p" + std::to_string(p);
      v.annotator_id = "a" + std::to_string(a);
      v.better = bernoulli(eng, 0.6) ? Position::First : Position::Second;
      votes.push_back(v);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_majority(votes, 10000, 1));
}
BENCHMARK(BM_BootstrapMajority)->Unit(benchmark::kMillisecond);

}  // namespace
