#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "selfpref/error.hpp"
#include "selfpref/io.hpp"
#include "selfpref/porter.hpp"
#include "selfpref/random.hpp"
#include "selfpref/textmetrics.hpp"
#include "selfpref/tokenize.hpp"

using namespace selfpref;
using namespace selfpref::text;

namespace {

Tokens toks(std::string_view s) { return words(s); }

// Longest common subsequence by enumerating every subsequence of `a`.
std::size_t brute_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::size_t len = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

}  // namespace

TEST_CASE("Porter stemmer reference vectors") {
  const std::vector<std::pair<const char*, const char*>> cases = {
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
      {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
      {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
      {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
      {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
      {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
      {"digitizer", "digit"},   {"conformabli", "conform"}, {"radicalli", "radic"},
      {"differentli", "differ"}, {"vileli", "vile"},        {"analogousli", "analog"},
      {"vietnamization", "vietnam"}, {"predication", "predic"}, {"operator", "oper"},
      {"feudalism", "feudal"},  {"decisiveness", "decis"},  {"hopefulness", "hope"},
      {"callousness", "callous"}, {"formaliti", "formal"},  {"sensitiviti", "sensit"},
      {"sensibiliti", "sensibl"}, {"triplicate", "triplic"}, {"formative", "form"},
      {"formalize", "formal"},  {"electriciti", "electr"},  {"electrical", "electr"},
      {"hopeful", "hope"},      {"goodness", "good"},       {"revival", "reviv"},
      {"allowance", "allow"},   {"inference", "infer"},     {"airliner", "airlin"},
      {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"}, {"defensible", "defens"},
      {"irritant", "irrit"},    {"replacement", "replac"},  {"adjustment", "adjust"},
      {"dependent", "depend"},  {"adoption", "adopt"},      {"homologou", "homolog"},
      {"communism", "commun"},  {"activate", "activ"},      {"angulariti", "angular"},
      {"homologous", "homolog"}, {"effective", "effect"},   {"bowdlerize", "bowdler"},
      {"probate", "probat"},    {"rate", "rate"},           {"cease", "ceas"},
      {"controll", "control"},  {"roll", "roll"},           {"generalizations", "gener"},
      {"oscillators", "oscil"}, {"manages", "manag"},       {"managing", "manag"},
      {"at", "at"},             {"café", "café"}};
  for (const auto& [in, out] : cases) {
    INFO(in);
    CHECK(porter_stem(in) == out);
  }
}

TEST_CASE("lexicon feature examples") {
  const Lexicon lex({{"pronoun", {"i", "my"}}, {"work", {"manag*"}}, {"manner", {"*ly"}}});
  const auto f = lexicon_features("I manage my team", lex);
  CHECK(f.at("lex.pronoun") == 50.0);
  CHECK(f.at("lex.work") == 25.0);
  CHECK(f.at("lex.manner") == 0.0);
  CHECK(f.at("word_count") == 4.0);

  CHECK(lexicon_features("extraordinary accomplishments", lex).at("long_words_pct") == 100.0);
  CHECK(lexicon_features("quickly and quietly", lex).at("lex.manner") ==
        doctest::Approx(200.0 / 3.0));

  const auto empty = lexicon_features("", lex);
  CHECK(empty.at("word_count") == 0.0);
  for (const auto& e : empty.entries()) CHECK(e.value == 0.0);
}

TEST_CASE("lexicon validation and JSON round trip") {
  using Cats = std::map<std::string, std::vector<std::string>>;
  CHECK_THROWS_AS(Lexicon(Cats{{"x", {}}}), ValidationError);
  CHECK_THROWS_AS(Lexicon(Cats{{"x", {"Upper"}}}), ValidationError);
  CHECK_THROWS_AS(Lexicon(Cats{{"x", {""}}}), ValidationError);
  CHECK_THROWS_AS(Lexicon::from_json("[1]"), ParseError);
  const auto s = Lexicon::starter();
  CHECK(Lexicon::from_json(s.to_json()).raw() == s.raw());
  for (const char* cat : {"i_pronoun", "determiner", "preposition", "negation", "quantity", "verb",
                          "adjective", "adverb"}) {
    INFO(cat);
    CHECK(s.raw().count(cat) == 1);
  }
}

TEST_CASE("bundled starter lexicon file equals the built-in starter") {
  const auto path = std::filesystem::path(SELFPREF_SOURCE_DIR) / "data/lexicon/starter.json";
  CHECK(Lexicon::load(path).raw() == Lexicon::starter().raw());
}

TEST_CASE("feature extraction is deterministic") {
  const auto lex = Lexicon::starter();
  const std::string t = "Detail-oriented analyst; I never miss deadlines, and I deliver 20% gains.";
  CHECK(lexicon_features(t, lex) == lexicon_features(t, lex));
  for (const auto& e : lexicon_features(t, lex).entries()) {
    CHECK(std::isfinite(e.value));
    CHECK(e.value >= 0.0);
    if (e.id.rfind("lex.", 0) == 0) CHECK(e.value <= 100.0);
  }
}

TEST_CASE("BLEU oracles") {
  CHECK(bleu(toks("the cat sat on the mat"), toks("the cat sat on the mat")) == doctest::Approx(1.0));
  CHECK(bleu(toks("dog runs"), toks("the cat sat")) < 1e-6);
  CHECK(bleu(toks("the cat sat"), toks("the cat sat down")) ==
        doctest::Approx(std::exp(1.0 - 4.0 / 3.0)).epsilon(1e-9));
  CHECK(bleu(toks("a b c d"), toks("a b c e"), 2) == doctest::Approx(std::sqrt(0.75 * 2.0 / 3.0)));
  CHECK(bleu(toks("the the the the"), toks("the cat")) < 1e-6);
  CHECK(bleu({}, toks("a")) == 0.0);
  CHECK_THROWS_AS(bleu(toks("a"), {}), ValidationError);
}

TEST_CASE("ROUGE oracles") {
  const auto l = rouge_l(toks("a b c"), toks("a x c"));
  CHECK(l.precision == 2.0 / 3.0);
  CHECK(l.recall == 2.0 / 3.0);
  CHECK(l.f1 == 2.0 / 3.0);
  CHECK(rouge_n(toks("a b c"), toks("a x c"), 1).f1 == doctest::Approx(2.0 / 3.0));
  CHECK(rouge_n(toks("a b c"), toks("a x c"), 2).f1 == 0.0);
  CHECK(rouge_n(toks("x y"), toks("x y"), 2).f1 == 1.0);
  CHECK(rouge_l(toks("p q"), toks("r s")).f1 == 0.0);
  CHECK(rouge_l({}, toks("a")).f1 == 0.0);
  CHECK(rouge_n(toks("a"), {}, 1).precision == 0.0);
}

TEST_CASE("METEOR oracles") {
  const double single_chunk_3 = 1.0 - 0.5 * std::pow(1.0 / 3.0, 3);
  CHECK(meteor(toks("a b c"), toks("a b c")) == doctest::Approx(single_chunk_3));
  CHECK(meteor(toks("p q"), toks("r s")) == 0.0);
  CHECK(meteor({}, toks("a")) == 0.0);

  const auto al = meteor_align(toks("manages teams"), toks("managing team"));
  CHECK(al.exact_matches == 0);
  CHECK(al.stem_matches == 2);
  CHECK(al.chunks == 1);
  CHECK(meteor(toks("manages teams"), toks("managing team")) == doctest::Approx(0.9375));

  // Two chunks: (a b) and (c d) appear swapped in the reference.
  CHECK(meteor(toks("a b c d"), toks("c d a b")) == doctest::Approx(1.0 - 0.5 * std::pow(0.5, 3)));
  // P = 1, R = 1/2, Fmean = PR / (0.9 P + 0.1 R).
  const double fmean = 0.5 / (0.9 + 0.05);
  CHECK(meteor(toks("a b"), toks("a b c d")) == doctest::Approx(fmean * (1.0 - 0.5 * 0.125)));
}

TEST_CASE("identity and bounds on random token sequences") {
  Engine eng = make_engine(11);
  const Tokens vocab = {"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 300; ++trial) {
    Tokens x, y;
    const auto n = 1 + uniform_index(eng, 10), m = 1 + uniform_index(eng, 10);
    for (std::uint64_t i = 0; i < n; ++i) x.push_back(vocab[uniform_index(eng, vocab.size())]);
    for (std::uint64_t i = 0; i < m; ++i) y.push_back(vocab[uniform_index(eng, vocab.size())]);
    CHECK(bleu(x, x) == doctest::Approx(1.0));
    CHECK(rouge_l(x, x).f1 == doctest::Approx(1.0));
    for (double v : {bleu(x, y), rouge_n(x, y, 1).f1, rouge_n(x, y, 2).f1, rouge_l(x, y).f1, meteor(x, y)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
    const bool overlap = std::any_of(x.begin(), x.end(),
                                     [&](const auto& t) { return std::find(y.begin(), y.end(), t) != y.end(); });
    CHECK((rouge_n(x, y, 1).f1 == 0.0) == !overlap);
  }
}

TEST_CASE("ROUGE-L LCS agrees with brute force on 1,000 random sequences") {
  Engine eng = make_engine(5);
  const Tokens vocab = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 1000; ++trial) {
    Tokens x, y;
    const auto n = uniform_index(eng, 13), m = uniform_index(eng, 13);
    for (std::uint64_t i = 0; i < n; ++i) x.push_back(vocab[uniform_index(eng, vocab.size())]);
    for (std::uint64_t i = 0; i < m; ++i) y.push_back(vocab[uniform_index(eng, vocab.size())]);
    REQUIRE(lcs_length(x, y) == brute_lcs(x, y));
  }
}

TEST_CASE("automatic scores against the resume body") {
  const std::string body = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10";
  const auto r = auto_scores("w1 w2 w3 w4", body);
  CHECK(r.scores.at("rouge1") == doctest::Approx(2.0 * 4 / (10 + 4)));
  CHECK(r.scores.at("rougeL") == doctest::Approx(2.0 * 4 / (10 + 4)));
  CHECK(r.warnings.empty());

  const auto e = auto_scores("some summary", "");
  CHECK(e.warnings.size() == 1);
  for (const char* id : {"bleu", "rouge1", "rouge2", "rougeL", "meteor"}) CHECK(e.scores.at(id) == 0.0);
  for (const auto& f : e.scores.entries()) CHECK(f.family == FeatureFamily::AutoScore);
}

TEST_CASE("external score sidecar") {
  const auto s = parse_external_scores_csv("resume_id,score_name,value\na,bertscore,0.91\nb,bertscore,0.5\nc,bertscore,0.7\n");
  CHECK(s.size() == 3);
  CHECK(s.at("a").at("bertscore") == 0.91);
  CHECK(s.at("a").entries()[0].family == FeatureFamily::AutoScore);

  CHECK_THROWS_AS(parse_external_scores_csv("resume_id,score_name,value\na,x,1\na,x,2\n"), ValidationError);
  CHECK_THROWS_AS(parse_external_scores_csv("resume_id,score_name,value\na,x,nan\n"), Error);
  CHECK_THROWS_AS(parse_external_scores_csv("resume_id,score_name,value\na,x,inf\n"), Error);
  CHECK_THROWS_AS(parse_external_scores_csv("resume_id,score_name,value\na,x,abc\n"), ParseError);
  const std::vector<std::string> known = {"a"};
  CHECK_THROWS_WITH_AS(
      parse_external_scores_csv("resume_id,score_name,value\nzz,x,1\nyy,x,1\n", &known),
      doctest::Contains("zz"), ValidationError);

  const auto dir = std::filesystem::temp_directory_path() / "selfpref_ext_test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "s.json", R"([{"resume_id": "a", "score_name": "bertscore", "value": 0.5}])");
  CHECK(load_external_scores(dir / "s.json").at("a").at("bertscore") == 0.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("FeatureVector stays ordered and rejects non-finite values") {
  FeatureVector v;
  v.set("b", FeatureFamily::Summary, 1);
  v.set("a", FeatureFamily::Summary, 2);
  CHECK(v.entries()[0].id == "a");
  CHECK_THROWS_AS(v.set("c", FeatureFamily::Summary, std::numeric_limits<double>::infinity()), ValidationError);
  FeatureVector w;
  w.set("a", FeatureFamily::Lexicon, 5);
  v.merge(w);
  CHECK(v.at("a") == 5);
  CHECK(v.size() == 2);
}
