#include <doctest.h>

#include "fixtures.hpp"
#include "selfpref/error.hpp"
#include "selfpref/judge.hpp"

using namespace selfpref;
using namespace selfpref::llm;

namespace {

struct Members {
  Resume own = splice_summary(fixtures::human("h", "human text"), "model text", "m");
  Resume human = fixtures::human("h", "human text");
};

double first_rate(const MockEvaluatorConfig& c, const Resume& a, const Resume& b, int n,
                  PromptVariant v = PromptVariant::Standard) {
  int first = 0;
  for (int i = 0; i < n; ++i) {
    PairView view{"pair" + std::to_string(i), &a, &b, 0, 0};
    if (mock_decide(view, c, v) == Position::First) ++first;
  }
  return static_cast<double>(first) / n;
}

}  // namespace

TEST_CASE("fair mock picks each side half the time") {
  Members m;
  MockEvaluatorConfig c;
  c.self_model = "m";
  c.seed = 3;
  CHECK(first_rate(c, m.own, m.human, 10000) == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("recognising mock prefers its own text at p_self") {
  Members m;
  MockEvaluatorConfig c;
  c.self_model = "m";
  c.recognition_rate = 1.0;
  c.p_self = 0.95;
  c.seed = 9;
  CHECK(std::abs(first_rate(c, m.own, m.human, 10000) - 0.95) < 0.01);
  CHECK(std::abs(first_rate(c, m.human, m.own, 10000) - 0.05) < 0.01);

  c.debias_effectiveness = 1.0;
  CHECK(std::abs(first_rate(c, m.own, m.human, 10000, PromptVariant::Debias) - 0.5) < 0.03);
}

TEST_CASE("quality weight and position bias steer the fallback choice") {
  Members m;
  MockEvaluatorConfig c;
  c.self_model = "m";
  c.quality_weight = 1.0;
  int first = 0;
  for (int i = 0; i < 10000; ++i) {
    PairView view{"q" + std::to_string(i), &m.own, &m.human, 2.0, 0.0};
    if (mock_decide(view, c) == Position::First) ++first;
  }
  CHECK(std::abs(first / 10000.0 - 1.0 / (1.0 + std::exp(-2.0))) < 0.015);
}

TEST_CASE("mock decisions are a pure function of their inputs") {
  Members m;
  MockEvaluatorConfig c;
  c.self_model = "m";
  c.recognition_rate = 0.5;
  c.p_self = 0.7;
  c.seed = 1;
  for (int i = 0; i < 200; ++i) {
    PairView view{"p" + std::to_string(i), &m.own, &m.human, 0.3, -0.1};
    CHECK(mock_decide(view, c) == mock_decide(view, c));
    MockJudge j(c);
    CHECK(j.judge(view, PromptVariant::Standard).chosen == mock_decide(view, c));
  }
}

TEST_CASE("mock config validation") {
  MockEvaluatorConfig c;
  c.p_self = 1.5;
  CHECK_THROWS_AS(MockJudge{c}, ValidationError);
  c = {};
  c.recognition_rate = -0.1;
  CHECK_THROWS_AS(MockJudge{c}, ValidationError);
  c = {};
  c.quality_weight = -1;
  CHECK_THROWS_AS(MockShortlister{c}, ValidationError);
}

TEST_CASE("fully biased shortlister fills every slot with its own resumes") {
  std::vector<Resume> humans, owns;
  for (int i = 0; i < 5; ++i) {
    humans.push_back(fixtures::human("h" + std::to_string(i), "text"));
    owns.push_back(splice_summary(humans.back(), "gen", "m"));
  }
  std::vector<PoolCandidate> pool;
  for (int i = 0; i < 5; ++i) {
    pool.push_back({"c" + std::to_string(2 * i), &humans[i], 0});
    pool.push_back({"c" + std::to_string(2 * i + 1), &owns[i], 0});
  }
  MockEvaluatorConfig c;
  c.self_model = "m";
  c.recognition_rate = 1.0;
  c.p_self = 1.0;
  MockShortlister s(c);
  const auto picked = s.shortlist(pool, 4);
  REQUIRE(picked.size() == 4);
  for (const auto& id : picked) CHECK(std::stoi(id.substr(1)) % 2 == 1);
  CHECK(s.shortlist(pool, 4) == picked);
  CHECK_THROWS_AS(s.shortlist(pool, 10), ValidationError);
}
