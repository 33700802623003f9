#include <doctest.h>

#include <filesystem>

#include "selfpref/io.hpp"
#include "selfpref/prompts.hpp"

using namespace selfpref;
using namespace selfpref::prompts;

TEST_CASE("prompt files under prompts/ match the embedded templates") {
  const auto dir = std::filesystem::path(SELFPREF_SOURCE_DIR) / "prompts";
  const std::pair<const char*, std::string_view> files[] = {
      {"generation_system.txt", kGenerationSystem}, {"generation_user.txt", kGenerationUser},
      {"evaluation_system.txt", kEvaluationSystem}, {"evaluation_user.txt", kEvaluationUser},
      {"debias_instruction.txt", kDebiasInstruction}, {"shortlist_system.txt", kShortlistSystem},
      {"shortlist_user.txt", kShortlistUser}};
  for (const auto& [name, text] : files) {
    INFO(name);
    CHECK(read_text_file(dir / name) == text);
  }
}

TEST_CASE("generation prompts carry the word range") {
  const auto sys = generation_system(30, 80);
  CHECK(sys.find("between 30 and 80 words") != std::string::npos);
  CHECK(sys.find('{') == std::string::npos);
  const auto user = generation_user("RESUME BODY", 30, 80);
  CHECK(user.find("RESUME BODY") != std::string::npos);
  CHECK(user.find('{') == std::string::npos);
}

TEST_CASE("evaluation prompts") {
  CHECK(evaluation_system(false) == kEvaluationSystem);
  const auto d = evaluation_system(true);
  CHECK(d == std::string(kEvaluationSystem) + "\n" + std::string(kDebiasInstruction));
  CHECK(d.find("written by a human or by AI") != std::string::npos);
  const auto u = evaluation_user("first text", "second text");
  CHECK(u.find("Resume A:\nfirst text\nResume B:\nsecond text\n") != std::string::npos);
}

TEST_CASE("shortlist prompts spell counts as words") {
  const auto s = shortlist_system(10, 4);
  CHECK(s.find("given ten candidate") != std::string::npos);
  CHECK(s.find("exactly four candidates") != std::string::npos);
  CHECK(count_word(0) == "zero");
  CHECK(count_word(20) == "twenty");
  CHECK(count_word(21) == "21");
  CHECK(shortlist_user({{"c1", "alpha"}, {"c2", "beta"}}) ==
        "Candidates:\nCandidate c1:\nalpha\n\nCandidate c2:\nbeta");
}

TEST_CASE("fill leaves unknown and unterminated placeholders alone") {
  CHECK(fill("{a}-{b}-{a", {{"a", "x"}}) == "x-{b}-{a");
  CHECK(fill("{a}{a}", {{"a", "{a}"}}) == "{a}{a}");
}
