#include "selfpref/judge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "selfpref/error.hpp"
#include "selfpref/random.hpp"

namespace selfpref::llm {

LlmJudge::LlmJudge(ModelEndpoint endpoint, std::shared_ptr<ChatTransport> transport,
                   SleepFn sleep)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
  endpoint_.validate();
}

Judgement LlmJudge::judge(const PairView& pair, PromptVariant variant) {
  const auto choice = evaluate_pair(render_resume(*pair.first), render_resume(*pair.second),
                                    endpoint_, *transport_, variant, sleep_);
  return Judgement{choice.chosen, choice.raw_response};
}

LlmShortlister::LlmShortlister(ModelEndpoint endpoint, std::shared_ptr<ChatTransport> transport,
                               SleepFn sleep)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
  endpoint_.validate();
}

std::vector<std::string> LlmShortlister::shortlist(const std::vector<PoolCandidate>& pool,
                                                   std::size_t slots) {
  std::vector<ShortlistCandidate> candidates;
  candidates.reserve(pool.size());
  for (const auto& c : pool) candidates.push_back({c.id, c.resume->summary});
  return llm::shortlist(candidates, slots, endpoint_, *transport_, sleep_).ranked_ids;
}

// ---------------------------------------------------------------------------

void MockEvaluatorConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(p_self)) throw ValidationError("mock p_self must be in [0, 1]");
  if (!unit(recognition_rate)) throw ValidationError("mock recognition_rate must be in [0, 1]");
  if (!unit(debias_effectiveness)) {
    throw ValidationError("mock debias_effectiveness must be in [0, 1]");
  }
  if (!(quality_weight >= 0.0)) throw ValidationError("mock quality_weight must be >= 0");
  if (!(position_bias >= -1.0 && position_bias <= 1.0)) {
    throw ValidationError("mock position_bias must be in [-1, 1]");
  }
}

namespace {

double effective_recognition(const MockEvaluatorConfig& c, PromptVariant v) {
  return v == PromptVariant::Debias ? c.recognition_rate * (1.0 - c.debias_effectiveness)
                                    : c.recognition_rate;
}

bool is_own(const Resume* r, const MockEvaluatorConfig& c) {
  return !c.self_model.empty() && !r->source.is_human() && r->source.model_name() == c.self_model;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Position mock_decide(const PairView& pair, const MockEvaluatorConfig& config,
                     PromptVariant variant, std::uint64_t stream) {
  const std::uint64_t variant_key = variant == PromptVariant::Debias ? 1 : 0;
  Engine eng = make_engine(
      derive_seed(derive_seed(derive_seed(config.seed, pair.pair_id), variant_key), stream));
  // Both draws are always taken so the stream layout does not depend on the
  // outcome of the first.
  const double u_recognise = uniform01(eng);
  const double u_choice = uniform01(eng);

  const bool own_first = is_own(pair.first, config);
  const bool own_second = is_own(pair.second, config);
  if (own_first != own_second && u_recognise < effective_recognition(config, variant)) {
    const bool pick_own = u_choice < config.p_self;
    return (pick_own == own_first) ? Position::First : Position::Second;
  }
  const double p_first = logistic(
      config.quality_weight * (pair.quality_first - pair.quality_second) + config.position_bias);
  return u_choice < p_first ? Position::First : Position::Second;
}

MockJudge::MockJudge(MockEvaluatorConfig config) : config_(std::move(config)) {
  config_.validate();
}

Judgement MockJudge::judge(const PairView& pair, PromptVariant variant) {
  const Position p = mock_decide(pair, config_, variant);
  return Judgement{p, p == Position::First ? "A" : "B"};
}

MockShortlister::MockShortlister(MockEvaluatorConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<std::string> MockShortlister::shortlist(const std::vector<PoolCandidate>& pool,
                                                    std::size_t slots) {
  if (slots == 0 || slots >= pool.size()) {
    throw ValidationError("shortlist needs 0 < slots < pool size");
  }
  std::string key;
  for (const auto& c : pool) key += c.id + "=" + c.resume->id + ";";
  Engine eng = make_engine(derive_seed(config_.seed, key));

  struct Scored {
    int tier;
    double utility;
    std::size_t index;
  };
  std::vector<Scored> scored;
  const double n = static_cast<double>(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const double u_recognise = uniform01(eng);
    const double u_choice = uniform01(eng);
    const double u_noise = uniform01(eng);
    int tier = 1;
    if (is_own(pool[k].resume, config_) &&
        u_recognise < effective_recognition(config_, PromptVariant::Standard)) {
      tier = u_choice < config_.p_self ? 0 : 2;
    }
    const double gumbel = -std::log(-std::log(std::max(u_noise, 1e-300)));
    const double position_term =
        n > 1 ? config_.position_bias * (1.0 - 2.0 * static_cast<double>(k) / (n - 1)) : 0.0;
    scored.push_back({tier, config_.quality_weight * pool[k].quality + position_term + gumbel, k});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    if (a.utility != b.utility) return a.utility > b.utility;
    return a.index < b.index;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < slots; ++i) out.push_back(pool[scored[i].index].id);
  return out;
}

ChatResponse EchoSummaryTransport::complete(const ModelEndpoint&, const ChatRequest& request) {
  // The resume text sits between the "Resume:\n" header and the final
  // instruction line of the generation user prompt.
  std::string_view user = request.user;
  const std::string_view header = "Resume:\n";
  if (user.rfind(header, 0) == 0) user.remove_prefix(header.size());
  const auto last_nl = user.rfind('\n');
  if (last_nl != std::string_view::npos) user = user.substr(0, last_nl);

  std::istringstream in{std::string(user)};
  std::string word, out;
  std::size_t n = 0;
  while (n < echo_words_ && in >> word) {
    if (!out.empty()) out.push_back(' ');
    out += word;
    ++n;
  }
  return ChatResponse{out};
}

}  // namespace selfpref::llm
