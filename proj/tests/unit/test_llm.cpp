#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "selfpref/bounded.hpp"
#include "selfpref/error.hpp"
#include "selfpref/judge.hpp"
#include "selfpref/llm.hpp"

using namespace selfpref;
using namespace selfpref::llm;

namespace {

// Replays a scripted sequence of answers; an entry starting with "!" throws a
// retryable TransportError, "!!" a non-retryable one.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::deque<std::string> script) : script_(std::move(script)) {}

  ChatResponse complete(const ModelEndpoint&, const ChatRequest& req) override {
    ++calls;
    last = req;
    if (script_.empty()) return {"A"};
    std::string s = script_.front();
    script_.pop_front();
    if (s.rfind("!!", 0) == 0) throw TransportError("fatal", false);
    if (s.rfind("!", 0) == 0) throw TransportError("flaky", true);
    return {s};
  }

  int calls = 0;
  ChatRequest last;

 private:
  std::deque<std::string> script_;
};

ModelEndpoint endpoint(int retries = 3) {
  ModelEndpoint e;
  e.model = "test-model";
  e.max_retries = retries;
  e.initial_backoff_seconds = 1.0;
  return e;
}

std::string words_n(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
  return s;
}

}  // namespace

TEST_CASE("parse_choice accepts only a bare A or B") {
  CHECK(parse_choice("A") == Position::First);
  CHECK(parse_choice(" b\n") == Position::Second);
  CHECK(parse_choice("\"A\".") == Position::First);
  CHECK(parse_choice("**B**") == Position::Second);
  CHECK(parse_choice("[A]") == Position::First);
  CHECK_FALSE(parse_choice("AB").has_value());
  CHECK_FALSE(parse_choice("Resume A").has_value());
  CHECK_FALSE(parse_choice("").has_value());
  CHECK_FALSE(parse_choice("C").has_value());
}

TEST_CASE("parse_shortlist") {
  const std::vector<std::string> pool = {"c1", "c2", "c3", "c4", "c5"};
  CHECK(parse_shortlist("c3, c1", pool, 2) == std::vector<std::string>{"c3", "c1"});
  CHECK(parse_shortlist("Candidate C2,\nc5", pool, 2) == std::vector<std::string>{"c2", "c5"});
  CHECK_FALSE(parse_shortlist("c1, c1", pool, 2).has_value());
  CHECK_FALSE(parse_shortlist("c1, c9", pool, 2).has_value());
  CHECK_FALSE(parse_shortlist("c1, c2, c3", pool, 2).has_value());
  CHECK_FALSE(parse_shortlist("c1", pool, 2).has_value());
}

TEST_CASE("variant and position names round trip") {
  for (auto v : {PromptVariant::Standard, PromptVariant::Debias}) CHECK(parse_variant(variant_name(v)) == v);
  for (auto p : {Position::First, Position::Second}) CHECK(parse_position(position_name(p)) == p);
  CHECK_THROWS_AS(parse_variant("loud"), ValidationError);
  CHECK(parse_provider("anthropic") == Provider::Anthropic);
  CHECK_THROWS_AS(parse_provider("acme"), ValidationError);
}

TEST_CASE("retries back off exponentially and stop at the limit") {
  std::vector<double> slept;
  SleepFn sleep = [&](std::chrono::duration<double> d) { slept.push_back(d.count()); };

  ScriptedTransport ok({"!", "!", "B"});
  CHECK(complete_with_retries(ok, endpoint(), {}, sleep).text == "B");
  CHECK(ok.calls == 3);
  CHECK(slept == std::vector<double>{1.0, 2.0});

  slept.clear();
  ScriptedTransport bad({"!", "!", "!", "!", "A"});
  CHECK_THROWS_AS(complete_with_retries(bad, endpoint(), {}, sleep), TransportError);
  CHECK(bad.calls == 4);
  CHECK(slept == std::vector<double>{1.0, 2.0, 4.0});

  ScriptedTransport fatal({"!!", "A"});
  CHECK_THROWS_AS(complete_with_retries(fatal, endpoint(), {}, sleep), TransportError);
  CHECK(fatal.calls == 1);
}

TEST_CASE("evaluate_pair retries malformed answers then gives up") {
  SleepFn sleep = [](auto) {};
  ScriptedTransport t({"maybe", "A or B", "B"});
  const auto c = evaluate_pair("x", "y", endpoint(), t, PromptVariant::Debias, sleep);
  CHECK(c.chosen == Position::Second);
  CHECK(c.attempts == 3);
  CHECK(t.last.system.find("written by a human or by AI") != std::string::npos);
  CHECK(t.last.temperature == 0.0);

  ScriptedTransport junk({"?", "?", "?", "?", "A"});
  try {
    evaluate_pair("x", "y", endpoint(), junk, PromptVariant::Standard, sleep);
    FAIL("expected MalformedResponse");
  } catch (const MalformedResponse& e) {
    CHECK(e.raw() == "?");
    CHECK(junk.calls == 1 + kMalformedRetries);
  }
  CHECK_THROWS_AS(evaluate_pair("", "y", endpoint(), junk, PromptVariant::Standard, sleep), ValidationError);
}

TEST_CASE("generation keeps the in-range answer or the closest one") {
  SleepFn sleep = [](auto) {};
  ScriptedTransport t({words_n(10), "", words_n(40)});
  const auto g = generate_summary("resume", endpoint(), t, {}, sleep);
  CHECK(g.in_range);
  CHECK(g.word_count == 40);
  CHECK(g.attempts == 3);
  CHECK(t.last.system.find("between 30 and 80 words") != std::string::npos);

  ScriptedTransport far({words_n(5), words_n(90), words_n(20), words_n(100)});
  const auto h = generate_summary("resume", endpoint(), far, {}, sleep);
  CHECK_FALSE(h.in_range);
  CHECK(h.word_count == 90);  // first of the two closest
  CHECK(h.attempts == 4);

  ScriptedTransport empty({"", " ", "\n", ""});
  CHECK_THROWS_AS(generate_summary("resume", endpoint(), empty, {}, sleep), MalformedResponse);

  GenerationOptions bad;
  bad.range = {80, 30};
  CHECK_THROWS_AS(generate_summary("resume", endpoint(), t, bad, sleep), ValidationError);
}

TEST_CASE("echo transport returns the leading words of the resume") {
  EchoSummaryTransport echo(5);
  const auto g = generate_summary(words_n(50), endpoint(), echo, {{3, 10}});
  CHECK(g.text == "w0 w1 w2 w3 w4");
  CHECK(g.in_range);
}

TEST_CASE("shortlist call validates its inputs and retries") {
  SleepFn sleep = [](auto) {};
  std::vector<ShortlistCandidate> cands = {{"c1", "a"}, {"c2", "b"}, {"c3", "c"}};
  ScriptedTransport t({"c1, c7", "c3, c1"});
  const auto r = llm::shortlist(cands, 2, endpoint(), t, sleep);
  CHECK(r.ranked_ids == std::vector<std::string>{"c3", "c1"});
  CHECK(r.attempts == 2);
  CHECK_THROWS_AS(llm::shortlist(cands, 3, endpoint(), t, sleep), ValidationError);
  cands.push_back({"c1", "dup"});
  CHECK_THROWS_AS(llm::shortlist(cands, 2, endpoint(), t, sleep), ValidationError);
}

TEST_CASE("endpoint validation") {
  auto e = endpoint();
  CHECK_NOTHROW(e.validate());
  e.max_parallel = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = endpoint(-1);
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = endpoint();
  e.model.clear();
  CHECK_THROWS_AS(e.validate(), ValidationError);
}

TEST_CASE("request bodies and response parsing per provider") {
  ModelEndpoint e = endpoint();
  ChatRequest req{"sys", "usr", 0.0, 16};
  const auto oa = nlohmann::json::parse(HttpChatTransport::request_body(e, req));
  CHECK(oa["messages"].size() == 2);
  CHECK(oa["messages"][0]["role"] == "system");
  CHECK(oa["model"] == "test-model");
  e.provider = Provider::Anthropic;
  const auto an = nlohmann::json::parse(HttpChatTransport::request_body(e, req));
  CHECK(an["system"] == "sys");
  CHECK(an["messages"].size() == 1);

  CHECK(HttpChatTransport::parse_response_body(
            Provider::OpenAiCompatible, R"({"choices":[{"message":{"content":"A"}}]})") == "A");
  CHECK(HttpChatTransport::parse_response_body(
            Provider::Anthropic, R"({"content":[{"type":"text","text":"B"}]})") == "B");
  CHECK_THROWS_AS(HttpChatTransport::parse_response_body(Provider::Anthropic, "{}"), TransportError);
  CHECK_THROWS_AS(HttpChatTransport::parse_response_body(Provider::OpenAiCompatible, "not json"),
                  TransportError);
}

TEST_CASE("HTTP adapters against a local server") {
  httplib::Server server;
  std::mutex mu;
  std::vector<std::string> auth;
  int fails_left = 1;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    auth.push_back(req.get_header_value("Authorization"));
    if (fails_left > 0) {
      --fails_left;
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"B"}}]})", "application/json");
  });
  server.Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    auth.push_back(req.get_header_value("x-api-key") + "|" + req.get_header_value("anthropic-version"));
    res.set_content(R"({"content":[{"type":"text","text":" A "}]})", "application/json");
  });
  server.Post("/v2/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("nope", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("SELFPREF_TEST_KEY", "sk-local", 1);
  HttpChatTransport http;
  SleepFn sleep = [](auto) {};
  ModelEndpoint e = endpoint();
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  e.api_key_env = "SELFPREF_TEST_KEY";
  e.timeout_seconds = 5;

  CHECK(evaluate_pair("x", "y", e, http, PromptVariant::Standard, sleep).chosen == Position::Second);
  e.provider = Provider::Anthropic;
  CHECK(evaluate_pair("x", "y", e, http, PromptVariant::Standard, sleep).chosen == Position::First);
  {
    std::lock_guard lock(mu);
    REQUIRE(auth.size() == 3);
    CHECK(auth[0] == "Bearer sk-local");
    CHECK(auth[1] == "Bearer sk-local");
    CHECK(auth[2] == "sk-local|2023-06-01");
  }

  e.provider = Provider::OpenAiCompatible;
  e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v2";
  try {
    complete_with_retries(http, e, {}, sleep);
    FAIL("expected TransportError");
  } catch (const TransportError& err) {
    CHECK_FALSE(err.retryable());
    CHECK(std::string(err.what()).find("401") != std::string::npos);
  }

  e.api_key_env = "SELFPREF_TEST_KEY_UNSET";
  ::unsetenv("SELFPREF_TEST_KEY_UNSET");
  CHECK_THROWS_WITH_AS(http.complete(e, {}), doctest::Contains("SELFPREF_TEST_KEY_UNSET"),
                       TransportError);

  server.stop();
  th.join();
}

TEST_CASE("bounded runner never exceeds the parallelism limit and keeps order") {
  std::atomic<int> in_flight{0}, peak{0};
  std::vector<std::size_t> order;
  run_bounded(
      64, 3,
      [&](std::size_t i) {
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::microseconds(200 + (i * 37) % 500));
        --in_flight;
        return i;
      },
      [&](std::size_t i, std::size_t r) {
        CHECK(i == r);
        order.push_back(i);
      });
  CHECK(peak.load() <= 3);
  REQUIRE(order.size() == 64);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == i);
}
