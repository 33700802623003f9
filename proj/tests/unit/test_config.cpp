#include <doctest.h>

#include <filesystem>

#include "selfpref/config.hpp"
#include "selfpref/error.hpp"
#include "selfpref/random.hpp"

using namespace selfpref;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[project]
seed = 9

[corpus.synthetic]
categories = 2
per_category = 3

[models.m]
mock = "synthetic"

[evaluators.judge]
kind = "mock"
self_model = "m"
recognition_rate = 1.0
)";

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](std::string_view k) -> std::optional<std::string> {
    auto it = vars.find(std::string(k));
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST_CASE("minimal config") {
  const auto c = parse_config(kMinimal, "/base");
  CHECK(c.seed == 9);
  CHECK(c.output_dir == fs::path("/base/out"));
  REQUIRE(c.synthetic.has_value());
  CHECK(c.synthetic->categories == 2);
  CHECK(c.evaluator("judge").mock.recognition_rate == 1.0);
  CHECK(c.evaluator("judge").mock.seed == derive_seed(9, std::string_view("judge")));
  CHECK(c.model("m").mock == "synthetic");
  CHECK_THROWS_AS(c.evaluator("nobody"), ValidationError);
  CHECK_THROWS_AS(c.model("nobody"), ValidationError);
}

TEST_CASE("hash covers the text and seed override, not the output directory") {
  const auto a = parse_config(kMinimal, "/base");
  const auto b = parse_config(kMinimal, "/base", {std::nullopt, fs::path("/elsewhere")});
  const auto c = parse_config(kMinimal, "/base", {std::uint64_t{10}, std::nullopt});
  const auto d = parse_config(std::string(kMinimal) + "\n# comment\n", "/base");
  CHECK(a.hash == b.hash);
  CHECK(b.output_dir == fs::path("/elsewhere"));
  CHECK(a.hash != c.hash);
  CHECK(c.seed == 10);
  CHECK(a.hash != d.hash);
  CHECK(a.hash.size() == 16);
}

TEST_CASE("environment interpolation") {
  CHECK(interpolate_env("a${X}b", env_of({{"X", "1"}})) == "a1b");
  CHECK(interpolate_env("$$5", env_of({})) == "$5");
  CHECK_THROWS_AS(interpolate_env("${MISSING}", env_of({})), ValidationError);
  CHECK_THROWS_AS(interpolate_env("${OPEN", env_of({})), ValidationError);
}

TEST_CASE("provider endpoints read the key variable name, never the key") {
  const std::string text = std::string(kMinimal) + R"(
[models.live]
model = "gpt-x"
provider = "openai"
base_url = "${BASE}/v1"
api_key_env = "OPENAI_API_KEY"
max_parallel = 2

[evaluators.live]
kind = "llm"
)";
  const auto c = parse_config(text, "/base", {}, env_of({{"BASE", "http://localhost:9"}}));
  const auto& e = *c.model("live").endpoint;
  CHECK(e.model == "gpt-x");
  CHECK(e.base_url == "http://localhost:9/v1");
  CHECK(e.api_key_env == "OPENAI_API_KEY");
  CHECK(e.max_parallel == 2);
  CHECK(c.evaluator("live").kind == EvaluatorConfig::Kind::Llm);
}

TEST_CASE("invalid configs are rejected") {
  const std::string base = kMinimal;
  CHECK_THROWS_AS(parse_config(base + "\n[surprise]\nx = 1\n", "/b"), ValidationError);
  CHECK_THROWS_AS(parse_config(base + "\n[evaluators.bad]\nkind = \"mock\"\np_self = 2.0\n", "/b"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(base + "\n[evaluators.p]\nkind = \"panel\"\nmembers = [\"judge\"]\n", "/b"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config(base + "\n[evaluators.p]\nkind = \"panel\"\nmembers = [\"judge\", \"judge\", \"ghost\"]\n", "/b"),
      ValidationError);
  CHECK_THROWS_AS(parse_config(base + "\n[evaluators.l]\nkind = \"llm\"\nmodel = \"m\"\n", "/b"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("[project]\nseed = 1\n", "/b"), ValidationError);
  CHECK_THROWS_AS(parse_config("[project\n", "/b"), ParseError);
  CHECK_THROWS_AS(parse_config(base + "\n[pairing]\norder = \"zigzag\"\n", "/b"), ValidationError);
}

TEST_CASE("the bundled mock config loads") {
  const auto c = load_config(fs::path(SELFPREF_SOURCE_DIR) / "configs/mock_audit.toml");
  CHECK(c.models.size() == 2);
  CHECK(c.evaluators.count("panel:majority") == 1);
  CHECK(c.evaluator("panel:majority").members.size() == 3);
  CHECK(c.lexicon_path.has_value());
  CHECK(c.simulation.slots == 4);
}
