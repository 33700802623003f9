#include "selfpref/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "selfpref/error.hpp"
#include "selfpref/prompts.hpp"
#include "selfpref/tokenize.hpp"

namespace selfpref::llm {

using nlohmann::json;

std::string_view provider_name(Provider p) {
  return p == Provider::Anthropic ? "anthropic" : "openai";
}

Provider parse_provider(std::string_view name) {
  if (name == "openai" || name == "openai-compatible") return Provider::OpenAiCompatible;
  if (name == "anthropic") return Provider::Anthropic;
  throw ValidationError("unknown provider '" + std::string(name) + "'");
}

void ModelEndpoint::validate() const {
  if (model.empty()) throw ValidationError("endpoint model name must be non-empty");
  if (max_retries < 0) throw ValidationError("endpoint '" + model + "': max_retries must be >= 0");
  if (max_parallel < 1) {
    throw ValidationError("endpoint '" + model + "': max_parallel must be >= 1");
  }
  if (timeout_seconds <= 0) {
    throw ValidationError("endpoint '" + model + "': timeout_seconds must be > 0");
  }
}

// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError("base_url '" + url + "' lacks a scheme", false);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) out.path_prefix = url.substr(path_start);
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

std::string default_base_url(Provider p) {
  return p == Provider::Anthropic ? "https://api.anthropic.com/v1" : "https://api.openai.com/v1";
}

}  // namespace

std::string HttpChatTransport::request_body(const ModelEndpoint& endpoint,
                                            const ChatRequest& request) {
  json body;
  body["model"] = endpoint.model;
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  if (endpoint.provider == Provider::Anthropic) {
    body["system"] = request.system;
    body["messages"] = json::array({{{"role", "user"}, {"content", request.user}}});
  } else {
    body["messages"] = json::array({{{"role", "system"}, {"content", request.system}},
                                    {{"role", "user"}, {"content", request.user}}});
  }
  return body.dump();
}

std::string HttpChatTransport::parse_response_body(Provider provider, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("provider returned invalid JSON: ") + e.what());
  }
  try {
    if (provider == Provider::Anthropic) {
      std::string text;
      for (const auto& block : doc.at("content")) {
        if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
      }
      return text;
    }
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected provider payload: ") + e.what());
  }
}

ChatResponse HttpChatTransport::complete(const ModelEndpoint& endpoint,
                                         const ChatRequest& request) {
  const std::string base =
      endpoint.base_url.empty() ? default_base_url(endpoint.provider) : endpoint.base_url;
  const ParsedUrl url = split_url(base);

  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw TransportError("environment variable " + endpoint.api_key_env +
                               " is not set (API key for " + endpoint.model + ")",
                           false);
    }
    if (endpoint.provider == Provider::Anthropic) {
      headers.emplace("x-api-key", key);
    } else {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  if (endpoint.provider == Provider::Anthropic) headers.emplace("anthropic-version", "2023-06-01");

  httplib::Client client(url.scheme_host_port);
  const auto secs = static_cast<time_t>(std::ceil(endpoint.timeout_seconds));
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);

  const std::string path = url.path_prefix + (endpoint.provider == Provider::Anthropic
                                                   ? "/messages"
                                                   : "/chat/completions");
  auto res = client.Post(path, headers, request_body(endpoint, request), "application/json");
  if (!res) {
    throw TransportError(std::string(provider_name(endpoint.provider)) + " request to " +
                         url.scheme_host_port + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    const bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
    std::string detail = res->body.substr(0, 500);
    throw TransportError(std::string(provider_name(endpoint.provider)) + " HTTP " +
                             std::to_string(res->status) + ": " + detail,
                         retryable);
  }
  return ChatResponse{parse_response_body(endpoint.provider, res->body)};
}

ChatResponse complete_with_retries(ChatTransport& transport, const ModelEndpoint& endpoint,
                                   const ChatRequest& request, const SleepFn& sleep) {
  for (int attempt = 0;; ++attempt) {
    try {
      return transport.complete(endpoint, request);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= endpoint.max_retries) {
        throw TransportError(e.what() + std::string(" (after ") + std::to_string(attempt + 1) +
                                 " attempt" + (attempt ? "s" : "") + ")",
                             false);
      }
      const double delay =
          std::min(30.0, endpoint.initial_backoff_seconds * std::pow(2.0, attempt));
      if (delay > 0) {
        if (sleep) {
          sleep(std::chrono::duration<double>(delay));
        } else {
          std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(chars);
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

GeneratedSummary generate_summary(std::string_view resume_text, const ModelEndpoint& endpoint,
                                  ChatTransport& transport, const GenerationOptions& options,
                                  const SleepFn& sleep) {
  const auto& range = options.range;
  if (range.min_words >= range.max_words || range.min_words < 1) {
    throw ValidationError("word range must satisfy 1 <= min < max");
  }
  ChatRequest req;
  req.system = prompts::generation_system(range.min_words, range.max_words);
  req.user = prompts::generation_user(resume_text, range.min_words, range.max_words);
  req.temperature = options.temperature;
  req.max_tokens = options.max_tokens;

  std::optional<GeneratedSummary> best;
  long best_distance = 0;
  std::string last_raw;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const auto response = complete_with_retries(transport, endpoint, req, sleep);
    last_raw = response.text;
    std::string text = trim(response.text);
    if (text.empty()) continue;
    GeneratedSummary g;
    g.word_count = text::words(text).size();
    g.text = std::move(text);
    g.attempts = attempt;
    const long wc = static_cast<long>(g.word_count);
    const long distance = wc < range.min_words   ? range.min_words - wc
                          : wc > range.max_words ? wc - range.max_words
                                                 : 0;
    if (distance == 0) {
      g.in_range = true;
      return g;
    }
    if (!best || distance < best_distance) {
      best = g;
      best_distance = distance;
    }
  }
  if (!best) throw MalformedResponse("provider returned only empty completions", last_raw);
  best->attempts = options.max_attempts;
  return *best;
}

// ---------------------------------------------------------------------------

std::string_view variant_name(PromptVariant v) {
  return v == PromptVariant::Debias ? "debias" : "standard";
}

PromptVariant parse_variant(std::string_view s) {
  if (s == "standard") return PromptVariant::Standard;
  if (s == "debias") return PromptVariant::Debias;
  throw ValidationError("unknown prompt variant '" + std::string(s) + "'");
}

std::string_view position_name(Position p) { return p == Position::First ? "first" : "second"; }

Position parse_position(std::string_view s) {
  const auto l = lower(s);
  if (l == "first" || l == "a") return Position::First;
  if (l == "second" || l == "b") return Position::Second;
  throw ValidationError("expected first|second, got '" + std::string(s) + "'");
}

std::optional<Position> parse_choice(std::string_view response) {
  const std::string core = trim(response, " \t\r\n\"'`*()[]{}.:!");
  if (core == "A" || core == "a") return Position::First;
  if (core == "B" || core == "b") return Position::Second;
  return std::nullopt;
}

PairChoice evaluate_pair(std::string_view text_a, std::string_view text_b,
                         const ModelEndpoint& endpoint, ChatTransport& transport,
                         PromptVariant variant, const SleepFn& sleep) {
  if (text_a.empty() || text_b.empty()) {
    throw ValidationError("evaluate_pair requires two non-empty resumes");
  }
  ChatRequest req;
  req.system = prompts::evaluation_system(variant == PromptVariant::Debias);
  req.user = prompts::evaluation_user(text_a, text_b);
  req.temperature = 0.0;
  req.max_tokens = 16;

  std::string last;
  for (int attempt = 1; attempt <= 1 + kMalformedRetries; ++attempt) {
    last = complete_with_retries(transport, endpoint, req, sleep).text;
    if (auto choice = parse_choice(last)) return PairChoice{*choice, last, attempt};
  }
  throw MalformedResponse("unparseable comparison answer after " +
                              std::to_string(1 + kMalformedRetries) + " attempts",
                          last);
}

// ---------------------------------------------------------------------------

std::optional<std::vector<std::string>> parse_shortlist(std::string_view response,
                                                        const std::vector<std::string>& pool,
                                                        std::size_t slots) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : response) {
    if (c == ',' || c == '\n' || c == ';') {
      tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  tokens.push_back(cur);

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : tokens) {
    std::string t = trim(raw, " \t\r\"'`*.()[]");
    if (t.empty()) continue;
    std::string lt = lower(t);
    if (lt.rfind("candidate ", 0) == 0) lt = trim(lt.substr(10));
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](const std::string& id) { return lower(id) == lt; });
    if (it == pool.end()) return std::nullopt;
    if (!seen.insert(*it).second) return std::nullopt;
    out.push_back(*it);
  }
  if (out.size() != slots) return std::nullopt;
  return out;
}

ShortlistResult shortlist(const std::vector<ShortlistCandidate>& candidates, std::size_t slots,
                          const ModelEndpoint& endpoint, ChatTransport& transport,
                          const SleepFn& sleep) {
  std::vector<std::string> ids;
  std::vector<prompts::ShortlistEntry> entries;
  std::unordered_set<std::string> unique;
  for (const auto& c : candidates) {
    if (!unique.insert(c.id).second) throw ValidationError("duplicate candidate id '" + c.id + "'");
    ids.push_back(c.id);
    entries.push_back({c.id, c.summary});
  }
  if (slots == 0 || slots >= candidates.size()) {
    throw ValidationError("shortlist needs 0 < slots < number of candidates");
  }
  ChatRequest req;
  req.system = prompts::shortlist_system(candidates.size(), slots);
  req.user = prompts::shortlist_user(entries);
  req.temperature = 0.0;
  req.max_tokens = 64;

  std::string last;
  for (int attempt = 1; attempt <= 1 + kMalformedRetries; ++attempt) {
    last = complete_with_retries(transport, endpoint, req, sleep).text;
    if (auto ranked = parse_shortlist(last, ids, slots)) {
      return ShortlistResult{std::move(*ranked), last, attempt};
    }
  }
  throw MalformedResponse("shortlist response invalid after " +
                              std::to_string(1 + kMalformedRetries) + " attempts",
                          last);
}

}  // namespace selfpref::llm
