#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "selfpref/error.hpp"
#include "selfpref/experiment.hpp"
#include "selfpref/io.hpp"

using namespace selfpref;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("selfpref_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Judge that always answers "A" and counts its calls.
class CountingJudge : public llm::PairJudge {
 public:
  llm::Judgement judge(const llm::PairView&, PromptVariant) override {
    ++calls;
    if (fail_after && calls > fail_after) throw TransportError("stop", false);
    return {Position::First, "A"};
  }
  std::string evaluator() const override { return "counting"; }
  std::size_t calls = 0;
  std::size_t fail_after = 0;
};

std::string annotation_header() {
  std::string h = "pair_id,annotator_id";
  for (auto d : kAnnotationDimensions) h += "," + std::string(d) + "_a," + std::string(d) + "_b";
  return h + ",better,rationale,attention_check\n";
}

std::string annotation_row(const std::string& pair, const std::string& who, const std::string& better,
                           int rating = 3, const std::string& attention = "") {
  std::string r = pair + "," + who;
  for (std::size_t d = 0; d < kAnnotationDimensions.size(); ++d) {
    r += "," + std::to_string(rating) + "," + std::to_string(rating);
  }
  return r + "," + better + ",because," + attention + "\n";
}

AnnotationVote vote(const std::string& pair, const std::string& who, Position p) {
  AnnotationVote v;
  v.pair_id = pair;
  v.annotator_id = who;
  v.better = p;
  return v;
}

}  // namespace

TEST_CASE("one pair per human resume, deterministic in the seed") {
  const auto store = fixtures::paired_store(50, {"m", "alt"});
  PairSpec spec{"m", ComparisonKind::EvaluatorVsHuman, "", 7, OrderMode::Coin};
  const auto a = build_pairs(store, spec);
  CHECK(a.size() == 50);
  const auto b = build_pairs(store, spec);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pair_id == b[i].pair_id);
    CHECK(a[i].member_first == b[i].member_first);
    const Resume& first = store.at(a[i].member_first);
    const Resume& second = store.at(a[i].member_second);
    CHECK(first.origin_id == second.origin_id);
    CHECK(first.body == second.body);
  }
  CHECK(a[0].pair_id == make_pair_id("h0", "m", "human"));

  PairSpec alt{"m", ComparisonKind::EvaluatorVsAlternative, "alt", 7, OrderMode::Coin};
  for (const auto& p : build_pairs(store, alt)) {
    CHECK_FALSE(store.at(p.member_first).source.is_human());
    CHECK_FALSE(store.at(p.member_second).source.is_human());
  }
  alt.alternative_model = "m";
  CHECK_THROWS_AS(build_pairs(store, alt), ValidationError);
}

TEST_CASE("coin order is balanced within binomial limits") {
  const std::size_t n = 2000;
  const auto store = fixtures::paired_store(n, {"m"});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pairs = build_pairs(store, {"m", ComparisonKind::EvaluatorVsHuman, "", seed, OrderMode::Coin});
    std::size_t first = 0;
    for (const auto& p : pairs) first += p.evaluator_position(store) == Position::First;
    // 4 standard deviations of Binomial(n, 1/2).
    CHECK(std::abs(static_cast<double>(first) - n / 2.0) < 4 * std::sqrt(n / 4.0));
  }
}

TEST_CASE("blocked order puts the evaluator first in exactly half the pairs") {
  for (std::size_t n : {10u, 11u}) {
    const auto store = fixtures::paired_store(n, {"m"});
    const auto pairs = build_pairs(store, {"m", ComparisonKind::EvaluatorVsHuman, "", 4, OrderMode::Blocked});
    std::size_t first = 0;
    for (const auto& p : pairs) first += p.evaluator_position(store) == Position::First;
    CHECK(first >= n / 2);
    CHECK(first <= n / 2 + n % 2);
  }
}

TEST_CASE("missing counterfactuals are listed") {
  auto store = fixtures::paired_store(3, {"m"});
  store.add(fixtures::human("lonely", "no twin"));
  CHECK_THROWS_WITH_AS(build_pairs(store, {"m"}), doctest::Contains("lonely"), ValidationError);
}

TEST_CASE("pairs manifest round trip") {
  const auto store = fixtures::paired_store(12, {"m"});
  PairSpec spec{"m", ComparisonKind::EvaluatorVsHuman, "", 11, OrderMode::Coin};
  const auto pairs = build_pairs(store, spec);
  const auto back = pairs_from_json(nlohmann::json::parse(pairs_to_json(pairs, spec).dump()));
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(back[i].pair_id == pairs[i].pair_id);
    CHECK(back[i].member_first == pairs[i].member_first);
    CHECK(back[i].member_second == pairs[i].member_second);
    CHECK(back[i].order_seed == pairs[i].order_seed);
  }
  CHECK_THROWS_AS(pairs_from_json(nlohmann::json{{"schema", "other"}}), ParseError);
}

TEST_CASE("record JSON round trip") {
  auto r = fixtures::record("p1", true, false);
  r.raw_response = "B";
  const auto back = record_from_json(record_to_json(r));
  CHECK(back.pair_id == "p1");
  CHECK(back.chosen_position == Position::Second);
  CHECK(back.chosen_source == Source::human());
  CHECK(back.first_source == Source::model("m"));
  CHECK_FALSE(back.chose_self());
  const auto m = record_from_json(record_to_json(fixtures::malformed("p2")));
  CHECK_FALSE(m.resolved());
  CHECK_FALSE(m.chose_self());
}

TEST_CASE("an interrupted run resumes without repeating resolved pairs") {
  const auto dir = scratch("resume");
  const auto store = fixtures::paired_store(2245, {"m"});
  const auto pairs = build_pairs(store, {"m", ComparisonKind::EvaluatorVsHuman, "", 5, OrderMode::Coin});
  const RunLog::Header header{"counting", PromptVariant::Standard, "m_vs_human", "abc"};

  {
    CountingJudge j;
    j.fail_after = 100;
    auto log = RunLog::open(dir / "run.jsonl", header);
    const auto s = run_comparisons(pairs, store, j, PromptVariant::Standard, &log);
    CHECK(s.resolved == 100);
    CHECK(s.malformed == 2145);
  }
  // Simulate a crash mid-write.
  {
    std::ofstream out(dir / "run.jsonl", std::ios::app);
    out << "{\"pair_id\": \"trunc";
  }
  CountingJudge j;
  auto log = RunLog::open(dir / "run.jsonl", header);
  const auto s = run_comparisons(pairs, store, j, PromptVariant::Standard, &log);
  CHECK(s.new_requests == 2145);
  CHECK(j.calls == 2145);
  CHECK(s.resolved == 2245);
  CHECK(s.records.size() == 2245);

  RunLog::Header read_header;
  const auto all = RunLog::read(dir / "run.jsonl", &read_header);
  CHECK(read_header.manifest == "m_vs_human");
  CHECK(all.size() == 100 + 2145 + 2145);

  CountingJudge again;
  auto log2 = RunLog::open(dir / "run.jsonl", header);
  CHECK(run_comparisons(pairs, store, again, PromptVariant::Standard, &log2).new_requests == 0);
  CHECK(again.calls == 0);

  CHECK_THROWS_AS(RunLog::open(dir / "run.jsonl", {"other", PromptVariant::Standard, "m_vs_human", "abc"}),
                  ValidationError);
  CHECK_THROWS_AS(RunLog::open(dir / "run.jsonl", {"counting", PromptVariant::Debias, "m_vs_human", "abc"}),
                  ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("annotation ingestion") {
  std::string csv = annotation_header();
  std::set<std::string> known;
  for (int p = 0; p < 30; ++p) {
    known.insert("p" + std::to_string(p));
    for (int a = 0; a < 3; ++a) {
      csv += annotation_row("p" + std::to_string(p), "a" + std::to_string(a), a == 2 ? "second" : "first");
    }
  }
  csv += annotation_row("p0", "a9", "", 3);
  csv += annotation_row("p1", "a9", "first", 9);
  csv += annotation_row("p2", "a9", "sideways", 3);
  csv += annotation_row("p3", "a9", "first", 3, "yes");
  const auto set = parse_annotations(csv, {}, &known);
  CHECK(set.votes.size() == 90);
  CHECK(set.rejected.size() == 3);
  CHECK(set.attention_checks == 1);
  CHECK(set.votes[0].ratings.at("overall") == std::pair{3, 3});
  CHECK(set.votes[0].rationale == "because");

  CHECK_THROWS_AS(parse_annotations(annotation_header() + annotation_row("zz", "a", "first"), {}, &known),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotations(annotation_header() + annotation_row("p0", "a", "first") +
                                        annotation_row("p0", "a", "second")),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotations("pair_id,better\n"), Error);
}

TEST_CASE("bootstrap majority matches the 27-resample enumeration") {
  const std::vector<AnnotationVote> votes = {vote("x", "1", Position::First), vote("x", "2", Position::First),
                                             vote("x", "3", Position::Second)};
  const auto g = bootstrap_majority(votes, 10000, 1);
  REQUIRE(g.size() == 1);
  CHECK(g[0].label == TruthLabel::First);
  CHECK(g[0].votes == 3);
  CHECK(g[0].first_votes == 2);
  CHECK(std::abs(g[0].majority_share - 20.0 / 27.0) <= 0.02);
  CHECK(g[0].ci_low == 0.0);  // P(no first vote drawn) = 1/27 > 2.5%
  CHECK(g[0].ci_high == doctest::Approx(1.0));

  const auto u = bootstrap_majority({vote("u", "1", Position::Second), vote("u", "2", Position::Second),
                                     vote("u", "3", Position::Second)},
                                    500, 1);
  CHECK(u[0].label == TruthLabel::Second);
  CHECK(u[0].majority_share == 1.0);

  const auto s = bootstrap_majority({vote("s", "1", Position::First)}, 100, 1);
  CHECK(s[0].label == TruthLabel::First);
  CHECK(s[0].majority_share == 1.0);

  // Two opposing votes: first 1/4, second 1/4, tie 1/2.
  const auto t = bootstrap_majority({vote("t", "1", Position::First), vote("t", "2", Position::Second)}, 20000, 2);
  CHECK(t[0].label == TruthLabel::Tie);
  CHECK(std::abs(t[0].majority_share - 0.5) < 0.02);

  CHECK(bootstrap_majority(votes, 2000, 5)[0].majority_share == bootstrap_majority(votes, 2000, 5)[0].majority_share);
  CHECK_THROWS_AS(bootstrap_majority(votes, 0, 1), ValidationError);
}

TEST_CASE("truth labels CSV round trip") {
  const std::vector<AnnotationVote> votes = {vote("a", "1", Position::First), vote("b", "1", Position::Second)};
  const auto labels = bootstrap_majority(votes, 100, 3);
  const auto back = parse_truth_labels(truth_labels_csv(labels));
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == TruthLabel::First);
  CHECK(back[1].label == TruthLabel::Second);
  const auto minimal = parse_truth_labels("pair_id,label\nq,tie\n");
  CHECK(minimal[0].label == TruthLabel::Tie);
  CHECK_THROWS_AS(parse_truth_labels("pair_id,label\nq,maybe\n"), Error);
  CHECK_THROWS_AS(parse_truth_labels("pair_id,label\nq,first\nq,second\n"), ParseError);
}
