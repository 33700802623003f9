#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "selfpref/corpus.hpp"
#include "selfpref/llm.hpp"

namespace selfpref::llm {

// What a judge sees for one comparison. The quality covariates are only
// consulted by the mock; real providers see the rendered resume texts.
struct PairView {
  std::string pair_id;
  const Resume* first = nullptr;
  const Resume* second = nullptr;
  double quality_first = 0;
  double quality_second = 0;
};

struct Judgement {
  Position chosen = Position::First;
  std::string raw_response;
};

// Decides which of two resumes is stronger. Throws MalformedResponse or
// TransportError when no decision could be obtained.
class PairJudge {
 public:
  virtual ~PairJudge() = default;
  virtual Judgement judge(const PairView& pair, PromptVariant variant) = 0;
  // Model whose self-preference is being measured (the evaluator).
  virtual std::string evaluator() const = 0;
  virtual std::size_t max_parallel() const { return 1; }
};

struct PoolCandidate {
  std::string id;  // presentation label, e.g. "c3"
  const Resume* resume = nullptr;
  double quality = 0;
};

class Shortlister {
 public:
  virtual ~Shortlister() = default;
  // Ranked ids of exactly `slots` pool members. Throws MalformedResponse when
  // no valid list could be obtained.
  virtual std::vector<std::string> shortlist(const std::vector<PoolCandidate>& pool,
                                             std::size_t slots) = 0;
  virtual std::string evaluator() const = 0;
  virtual std::size_t max_parallel() const { return 1; }
};

// ---------------------------------------------------------------------------
// Provider-backed implementations

class LlmJudge : public PairJudge {
 public:
  LlmJudge(ModelEndpoint endpoint, std::shared_ptr<ChatTransport> transport, SleepFn sleep = {});

  Judgement judge(const PairView& pair, PromptVariant variant) override;
  std::string evaluator() const override { return endpoint_.model; }
  std::size_t max_parallel() const override { return endpoint_.max_parallel; }

 private:
  ModelEndpoint endpoint_;
  std::shared_ptr<ChatTransport> transport_;
  SleepFn sleep_;
};

class LlmShortlister : public Shortlister {
 public:
  LlmShortlister(ModelEndpoint endpoint, std::shared_ptr<ChatTransport> transport,
                 SleepFn sleep = {});

  std::vector<std::string> shortlist(const std::vector<PoolCandidate>& pool,
                                     std::size_t slots) override;
  std::string evaluator() const override { return endpoint_.model; }
  std::size_t max_parallel() const override { return endpoint_.max_parallel; }

 private:
  ModelEndpoint endpoint_;
  std::shared_ptr<ChatTransport> transport_;
  SleepFn sleep_;
};

// ---------------------------------------------------------------------------
// Mock evaluator: a seeded stand-in that exposes exactly the self-recognition
// mechanism. With probability `recognition_rate` it recognises its own text
// and then picks it with probability `p_self`; otherwise it chooses by
// logistic(quality_weight * (q_first - q_second) + position_bias).

struct MockEvaluatorConfig {
  std::string self_model;  // model whose outputs count as "own"
  double p_self = 1.0;
  double recognition_rate = 0.0;
  double quality_weight = 0.0;
  double position_bias = 0.0;
  // Under the debias prompt variant the recognition rate is scaled by
  // (1 - debias_effectiveness).
  double debias_effectiveness = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic in (config, pair_id, variant, stream).
Position mock_decide(const PairView& pair, const MockEvaluatorConfig& config,
                     PromptVariant variant = PromptVariant::Standard, std::uint64_t stream = 0);

class MockJudge : public PairJudge {
 public:
  explicit MockJudge(MockEvaluatorConfig config);

  Judgement judge(const PairView& pair, PromptVariant variant) override;
  std::string evaluator() const override { return config_.self_model; }
  const MockEvaluatorConfig& config() const { return config_; }

 private:
  MockEvaluatorConfig config_;
};

// Shortlists by tiers: recognised own resumes promoted (prob p_self) or
// demoted, then a random-utility ranking on quality, position bias and Gumbel
// noise. Deterministic in (config, pool ids and resume ids).
class MockShortlister : public Shortlister {
 public:
  explicit MockShortlister(MockEvaluatorConfig config);

  std::vector<std::string> shortlist(const std::vector<PoolCandidate>& pool,
                                     std::size_t slots) override;
  std::string evaluator() const override { return config_.self_model; }

 private:
  MockEvaluatorConfig config_;
};

// Mock generator transport: answers a generation prompt with the first
// `echo_words` words of the resume text found in the user message.
class EchoSummaryTransport : public ChatTransport {
 public:
  explicit EchoSummaryTransport(std::size_t echo_words) : echo_words_(echo_words) {}
  ChatResponse complete(const ModelEndpoint& endpoint, const ChatRequest& request) override;

 private:
  std::size_t echo_words_;
};

}  // namespace selfpref::llm
