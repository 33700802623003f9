#include <doctest.h>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"

using namespace selfpref;

TEST_CASE("quoted fields, embedded commas, quotes and newlines") {
  const auto t = csv::parse("id,text\n1,\"a, b\"\n2,\"say \"\"hi\"\"\"\n3,\"two\nlines\"\n");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].fields[1] == "a, b");
  CHECK(t.rows[1].fields[1] == "say \"hi\"");
  CHECK(t.rows[2].fields[1] == "two\nlines");
  CHECK(t.rows[2].line == 4);
}

TEST_CASE("comment lines before the header, BOM and CRLF are tolerated") {
  const auto t = csv::parse("\xEF\xBB\xBF# config_hash: abc\n# more\r\nx,y\r\n1,2\r\n\r\n");
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].fields[1] == "2");
  CHECK(t.rows[0].line == 4);
}

TEST_CASE("malformed input reports a line locator") {
  try {
    csv::parse("a,b\n1,2\n3\n", "f.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(csv::parse("a\n\"open\n"), ParseError);
  CHECK_THROWS_AS(csv::parse("a\nx\"y\n"), ParseError);
  CHECK_THROWS_AS(csv::parse("a\n\"x\"y\n"), ParseError);
}

TEST_CASE("require_column names the missing column") {
  const auto t = csv::parse("a,b\n1,2\n");
  CHECK(t.require_column("b", "ctx") == 1);
  CHECK_THROWS_WITH_AS(t.require_column("c", "ctx"), doctest::Contains("'c'"), ParseError);
}

TEST_CASE("escape and join round-trip through parse") {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  const auto text = csv::join_row({"a", "b", "c", "d", "e"}) + "\n" + csv::join_row(fields) + "\n";
  const auto t = csv::parse(text);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].fields == fields);
}
