#include <doctest.h>

#include "fixtures.hpp"
#include "selfpref/error.hpp"
#include "selfpref/mitigation.hpp"

using namespace selfpref;

namespace {

// Judge with a fixed verdict per call.
class FixedJudge : public llm::PairJudge {
 public:
  explicit FixedJudge(Position p, bool fail = false) : p_(p), fail_(fail) {}
  llm::Judgement judge(const llm::PairView&, PromptVariant) override {
    if (fail_) throw TransportError("down", false);
    return {p_, p_ == Position::First ? "A" : "B"};
  }
  std::string evaluator() const override { return "fixed"; }

 private:
  Position p_;
  bool fail_;
};

}  // namespace

TEST_CASE("majority of three votes") {
  using P = Position;
  CHECK(majority_vote({P::First, P::First, P::Second}) == P::First);
  CHECK(majority_vote({P::Second, P::First, P::Second}) == P::Second);
  CHECK(majority_vote({P::First, P::First, P::First}) == P::First);
  CHECK(majority_vote({P::Second, P::Second, P::Second}) == P::Second);
}

TEST_CASE("ensemble formula matches exhaustive enumeration") {
  for (double p1 : {0.0, 0.3, 0.95, 1.0}) {
    for (double p2 : {0.0, 0.5, 0.8}) {
      for (double p3 : {0.2, 0.5, 1.0}) {
        double enumerated = 0;
        for (int mask = 0; mask < 8; ++mask) {
          const bool a = mask & 1, b = mask & 2, c = mask & 4;
          const double w = (a ? p1 : 1 - p1) * (b ? p2 : 1 - p2) * (c ? p3 : 1 - p3);
          if (a + b + c >= 2) enumerated += w;
        }
        CHECK(ensemble_self_rate(p1, p2, p3) == doctest::Approx(enumerated).epsilon(1e-12));
      }
    }
  }
  CHECK(2 * ensemble_self_rate(0.975, 0.5, 0.5) - 1 == doctest::Approx(0.475));
}

TEST_CASE("deterministic panels follow the majority exactly") {
  Resume a = fixtures::human("a", "x"), b = fixtures::human("b", "y");
  llm::PairView view{"p", &a, &b, 0, 0};
  for (int mask = 0; mask < 8; ++mask) {
    std::array<Position, 3> votes;
    std::array<std::shared_ptr<llm::PairJudge>, 3> members;
    for (int k = 0; k < 3; ++k) {
      votes[k] = (mask >> k) & 1 ? Position::First : Position::Second;
      members[k] = std::make_shared<FixedJudge>(votes[k]);
    }
    MajorityPanelJudge panel("panel", members);
    CHECK(panel.judge(view, PromptVariant::Standard).chosen == majority_vote(votes));
  }
  MajorityPanelJudge broken("panel", {std::make_shared<FixedJudge>(Position::First),
                                      std::make_shared<FixedJudge>(Position::First, true),
                                      std::make_shared<FixedJudge>(Position::First)});
  CHECK_THROWS_AS(broken.judge(view, PromptVariant::Standard), MalformedResponse);
  CHECK_THROWS_AS(MajorityPanelJudge("p", {nullptr, nullptr, nullptr}), ValidationError);
}

TEST_CASE("report cells for the published mitigation values") {
  struct Row {
    double baseline, after;
    const char* abs;
    const char* rel;
  };
  const Row rows[] = {{88, 48, "40.0", "45.4"}, {88, 32, "56.0", "63.6"}, {84, 24, "60.0", "71.4"},
                      {84, 26, "58.0", "69.0"}, {78, 58, "20.0", "25.6"}, {78, 34, "44.0", "56.4"}};
  for (const auto& r : rows) {
    const auto rep = make_mitigation_report("e", r.baseline / 100, {{"s", r.after / 100}});
    const auto& s = rep.strategies.at(0);
    CHECK(report_cell(s.absolute_decrease_pp) == r.abs);
    REQUIRE(s.relative_decrease_pct.has_value());
    CHECK(report_cell(*s.relative_decrease_pct) == r.rel);
  }
  CHECK(report_cell(-0.04) == "0.0");
  CHECK(report_cell(45.45454545) == "45.4");
}

TEST_CASE("report edge cases") {
  const auto same = make_mitigation_report("e", 0.5, {{"none", 0.5}});
  CHECK(same.strategies[0].absolute_decrease_pp == 0.0);
  CHECK(*same.strategies[0].relative_decrease_pct == 0.0);
  const auto neg = make_mitigation_report("e", -0.1, {{"s", -0.2}});
  CHECK_FALSE(neg.strategies[0].relative_decrease_pct.has_value());
  const auto text = render_mitigation_table({same, neg});
  CHECK(text.find("none") != std::string::npos);
  CHECK(mitigation_csv({same}).find("none") != std::string::npos);
}

TEST_CASE("record-based report checks coverage") {
  std::vector<EvaluationRecord> base, half;
  for (int i = 0; i < 20; ++i) {
    base.push_back(fixtures::self_choice("p" + std::to_string(i), i % 2, i < 18));
    half.push_back(fixtures::self_choice("p" + std::to_string(i), i % 2, i < 10));
  }
  const auto r = mitigation_report("e", base, {{"debias", half}});
  CHECK(r.baseline == doctest::Approx(0.8));
  CHECK(r.strategies[0].bias_after == doctest::Approx(0.0));
  CHECK(r.strategies[0].absolute_decrease_pp == doctest::Approx(80.0));

  half.pop_back();
  CHECK_THROWS_WITH_AS(mitigation_report("e", base, {{"debias", half}}), doctest::Contains("1 missing"),
                       ValidationError);
}
