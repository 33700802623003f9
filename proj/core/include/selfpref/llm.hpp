#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selfpref::llm {

enum class Provider { OpenAiCompatible, Anthropic };

std::string_view provider_name(Provider p);
Provider parse_provider(std::string_view name);

struct ModelEndpoint {
  std::string model;     // model identifier sent to the provider and used as source tag
  Provider provider = Provider::OpenAiCompatible;
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key_env;
  int max_retries = 3;
  double timeout_seconds = 60;
  std::size_t max_parallel = 4;
  double initial_backoff_seconds = 1.0;

  void validate() const;  // retries >= 0, parallelism >= 1, model non-empty
};

// Provider-neutral chat request.
struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 16;
};

struct ChatResponse {
  std::string text;
};

// One completion call. Implementations throw TransportError on network,
// HTTP or payload failures; TransportError::retryable() tells callers whether
// another attempt is worthwhile.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatResponse complete(const ModelEndpoint& endpoint, const ChatRequest& request) = 0;
};

// HTTPS JSON adapter for OpenAI-compatible /chat/completions and Anthropic
// /messages endpoints. Reads the API key from the endpoint's environment
// variable at call time.
class HttpChatTransport : public ChatTransport {
 public:
  ChatResponse complete(const ModelEndpoint& endpoint, const ChatRequest& request) override;

  // Exposed for tests: request body and response parsing per provider.
  static std::string request_body(const ModelEndpoint& endpoint, const ChatRequest& request);
  static std::string parse_response_body(Provider provider, std::string_view body);
};

using SleepFn = std::function<void(std::chrono::duration<double>)>;

// Calls `transport` up to 1 + endpoint.max_retries times, backing off
// exponentially between retryable failures. Non-retryable failures (auth,
// bad request) propagate immediately.
ChatResponse complete_with_retries(ChatTransport& transport, const ModelEndpoint& endpoint,
                                   const ChatRequest& request, const SleepFn& sleep = {});

// ---------------------------------------------------------------------------
// Generation

struct WordRange {
  int min_words = 30;
  int max_words = 80;
};

struct GenerationOptions {
  WordRange range;
  int max_attempts = 4;  // initial try + 3 retries for out-of-range or empty output
  double temperature = 0.7;
  int max_tokens = 256;
};

struct GeneratedSummary {
  std::string text;
  std::size_t word_count = 0;
  bool in_range = false;
  int attempts = 0;
};

GeneratedSummary generate_summary(std::string_view resume_text, const ModelEndpoint& endpoint,
                                  ChatTransport& transport, const GenerationOptions& options = {},
                                  const SleepFn& sleep = {});

// ---------------------------------------------------------------------------
// Pairwise evaluation

enum class PromptVariant { Standard, Debias };
enum class Position { First, Second };

std::string_view variant_name(PromptVariant v);
PromptVariant parse_variant(std::string_view s);
std::string_view position_name(Position p);
Position parse_position(std::string_view s);
inline Position other(Position p) { return p == Position::First ? Position::Second : Position::First; }

// Accepts "A"/"B" with surrounding whitespace, quotes, asterisks, brackets or
// a trailing period; anything else is rejected.
std::optional<Position> parse_choice(std::string_view response);

struct PairChoice {
  Position chosen = Position::First;
  std::string raw_response;
  int attempts = 0;
};

inline constexpr int kMalformedRetries = 3;

// Throws MalformedResponse after 1 + kMalformedRetries unparseable answers.
PairChoice evaluate_pair(std::string_view text_a, std::string_view text_b,
                         const ModelEndpoint& endpoint, ChatTransport& transport,
                         PromptVariant variant, const SleepFn& sleep = {});

// ---------------------------------------------------------------------------
// Shortlisting

// Parses a comma-separated ranked id list. Returns nullopt unless exactly
// `slots` distinct ids, all from `pool`, are present (ids match
// case-insensitively; the pool's spelling is returned).
std::optional<std::vector<std::string>> parse_shortlist(std::string_view response,
                                                        const std::vector<std::string>& pool,
                                                        std::size_t slots);

struct ShortlistCandidate {
  std::string id;
  std::string summary;
};

struct ShortlistResult {
  std::vector<std::string> ranked_ids;
  std::string raw_response;
  int attempts = 0;
};

ShortlistResult shortlist(const std::vector<ShortlistCandidate>& candidates, std::size_t slots,
                          const ModelEndpoint& endpoint, ChatTransport& transport,
                          const SleepFn& sleep = {});

}  // namespace selfpref::llm
