#include <benchmark/benchmark.h>

#include <string>

#include "selfpref/textmetrics.hpp"
#include "selfpref/tokenize.hpp"

using namespace selfpref::text;

namespace {

const std::string kSummary =
    "Results-driven accountant with eight years of experience in financial reporting, "
    "reconciliations and audit preparation. Skilled in GAAP, ERP systems and process "
    "improvement; reduced month-end close time by 30% while mentoring junior staff.";

const std::string kBody =
    "Experience: Senior Accountant, 2016 to present. Prepared monthly financial statements, "
    "led reconciliations for 40 accounts, coordinated external audits and implemented a new "
    "ERP module. Staff Accountant, 2013 to 2016. Processed payables, maintained the general "
    "ledger and supported budgeting. Education: B.S. Accounting. Skills: GAAP, Excel, SAP.";

void BM_LexiconFeatures(benchmark::State& state) {
  const auto lex = Lexicon::starter();
  for (auto _ : state) benchmark::DoNotOptimize(lexicon_features(kSummary, lex));
}
BENCHMARK(BM_LexiconFeatures);

void BM_AutoScores(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(auto_scores(kSummary, kBody));
}
BENCHMARK(BM_AutoScores);

void BM_Meteor(benchmark::State& state) {
  const auto c = selfpref::text::words(kSummary);
  const auto r = selfpref::text::words(kBody);
  for (auto _ : state) benchmark::DoNotOptimize(meteor(c, r));
}
BENCHMARK(BM_Meteor);

}  // namespace
