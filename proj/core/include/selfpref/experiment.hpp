#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfpref/corpus.hpp"
#include "selfpref/judge.hpp"

namespace selfpref {

using llm::Position;
using llm::PromptVariant;

// ---------------------------------------------------------------------------
// Pairs

enum class ComparisonKind { EvaluatorVsHuman, EvaluatorVsAlternative };
enum class OrderMode { Coin, Blocked };

std::string_view kind_name(ComparisonKind k);
ComparisonKind parse_kind(std::string_view s);
std::string_view order_mode_name(OrderMode m);
OrderMode parse_order_mode(std::string_view s);

struct ResumePair {
  std::string pair_id;
  std::string origin_id;
  std::string member_first;   // resume ids
  std::string member_second;
  ComparisonKind kind = ComparisonKind::EvaluatorVsHuman;
  std::string evaluator_model;  // model whose counterfactual is one member
  std::uint64_t order_seed = 0;  // seed of the draw that fixed the order

  // Position of the evaluator-generated member.
  Position evaluator_position(const ResumeStore& store) const;
};

struct PairSpec {
  std::string evaluator_model;
  ComparisonKind kind = ComparisonKind::EvaluatorVsHuman;
  std::string alternative_model;  // only for EvaluatorVsAlternative
  std::uint64_t seed = 0;
  OrderMode order = OrderMode::Coin;
};

// One pair per human resume in `store`. Coin order flips an independent fair
// coin per origin; blocked order puts the evaluator member first in exactly
// floor(n/2) pairs (plus one coin for odd n). Throws ValidationError listing
// origins whose counterfactual is missing.
std::vector<ResumePair> build_pairs(const ResumeStore& store, const PairSpec& spec);

// Pair id scheme: "<origin>|<evaluator>~<other source>".
std::string make_pair_id(std::string_view origin, std::string_view evaluator,
                         std::string_view other);

nlohmann::json pairs_to_json(const std::vector<ResumePair>& pairs, const PairSpec& spec);
std::vector<ResumePair> pairs_from_json(const nlohmann::json& manifest);
std::vector<ResumePair> load_pairs(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation records and run logs

enum class RecordStatus { Resolved, Malformed };

struct EvaluationRecord {
  std::string pair_id;
  std::string evaluator;   // judge name
  std::string self_model;  // model whose self-preference the pair measures
  PromptVariant variant = PromptVariant::Standard;
  RecordStatus status = RecordStatus::Resolved;
  std::optional<Position> chosen_position;
  Source first_source;
  Source second_source;
  std::optional<Source> chosen_source;
  std::string raw_response;
  std::string error;

  bool resolved() const { return status == RecordStatus::Resolved; }
  bool chose_self() const;  // resolved and chosen_source is self_model
};

nlohmann::json record_to_json(const EvaluationRecord& r);
EvaluationRecord record_from_json(const nlohmann::json& j);

inline constexpr int kRunLogSchema = 1;

// Append-only JSONL log. The first line is a header object
// {"schema": "selfpref.runlog", "version": 1, ...}; every other line is one
// record. Reopening an existing log resumes it: the header must match.
class RunLog {
 public:
  struct Header {
    std::string evaluator;
    PromptVariant variant = PromptVariant::Standard;
    std::string manifest;  // stem of the pairs manifest the run evaluates
    std::string config_hash;
  };

  static RunLog open(const std::filesystem::path& path, const Header& header);
  static std::vector<EvaluationRecord> read(const std::filesystem::path& path,
                                            Header* header = nullptr);

  void append(const EvaluationRecord& r);
  bool is_resolved(std::string_view pair_id) const { return resolved_.count(std::string(pair_id)) > 0; }
  // Latest record per pair, resolved records taking precedence.
  const std::map<std::string, EvaluationRecord>& latest() const { return latest_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, EvaluationRecord> latest_;
  std::set<std::string> resolved_;

  void remember(const EvaluationRecord& r);
};

// Latent quality per resume id, used only by mock evaluators.
using QualityMap = std::map<std::string, double>;

struct ComparisonSummary {
  std::vector<EvaluationRecord> records;  // one per pair, in pair order
  std::size_t new_requests = 0;
  std::size_t resolved = 0;
  std::size_t malformed = 0;
};

// Evaluates every pair not already resolved in `log` (if given) and appends
// the new records. Transport and parse failures become malformed records.
ComparisonSummary run_comparisons(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                  llm::PairJudge& judge, PromptVariant variant,
                                  RunLog* log = nullptr, const QualityMap* quality = nullptr);

// ---------------------------------------------------------------------------
// Human annotations

inline constexpr std::array<std::string_view, 5> kAnnotationDimensions = {
    "clarity", "fluency", "coherence", "conciseness", "overall"};

struct RatingScale {
  int min = 1;
  int max = 5;
};

struct AnnotationVote {
  std::string pair_id;
  std::string annotator_id;
  Position better = Position::First;
  std::map<std::string, std::pair<int, int>> ratings;  // dimension -> (first, second)
  std::string rationale;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct AnnotationSet {
  std::vector<AnnotationVote> votes;
  std::size_t attention_checks = 0;  // rows flagged and excluded
  std::vector<RejectedRow> rejected;
};

// Columns: pair_id, annotator_id, <dim>_a, <dim>_b for every dimension,
// better (first|second); optional rationale and attention_check. Rows with a
// missing/invalid `better` or an out-of-scale rating are rejected and
// reported. Unknown pair ids (when `known_pairs` is given) and duplicate
// (pair, annotator) rows throw ValidationError.
AnnotationSet parse_annotations(std::string_view csv_text, const RatingScale& scale = {},
                                const std::set<std::string>* known_pairs = nullptr,
                                std::string_view source_name = "<memory>");
AnnotationSet ingest_annotations(const std::filesystem::path& path, const RatingScale& scale = {},
                                 const std::set<std::string>* known_pairs = nullptr);

enum class TruthLabel { First, Second, Tie };

std::string_view truth_name(TruthLabel t);
TruthLabel parse_truth(std::string_view s);

struct GroundTruthLabel {
  std::string pair_id;
  TruthLabel label = TruthLabel::Tie;
  std::size_t votes = 0;
  std::size_t first_votes = 0;
  // Fraction of resamples whose majority is the labelled side (for a tie
  // label: fraction of tied resamples).
  double majority_share = 0;
  // Percentile 95% interval of the labelled side's vote share across
  // resamples (first side for ties).
  double ci_low = 0;
  double ci_high = 0;
};

// Per pair: B resamples of the annotator votes with replacement, each seeded
// from (seed, pair_id). A resample's majority is the side with more than
// half the votes, otherwise a tie; the label is the modal outcome, with ties
// between modes labelled tie.
std::vector<GroundTruthLabel> bootstrap_majority(const std::vector<AnnotationVote>& votes,
                                                 std::size_t resamples = 10000,
                                                 std::uint64_t seed = 0);

std::string truth_labels_csv(const std::vector<GroundTruthLabel>& labels);
// Reads pair_id,label[,...] rows; extra columns are ignored.
std::vector<GroundTruthLabel> parse_truth_labels(std::string_view csv_text,
                                                 std::string_view source_name = "<memory>");

}  // namespace selfpref
