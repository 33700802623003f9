#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfpref/tokenize.hpp"

namespace selfpref::text {

// ---------------------------------------------------------------------------
// Feature vectors

enum class FeatureFamily { Summary, Lexicon, Punctuation, AutoScore };

std::string_view family_name(FeatureFamily f);

struct Feature {
  std::string id;
  FeatureFamily family = FeatureFamily::Summary;
  double value = 0;
};

// Ordered by feature id.
class FeatureVector {
 public:
  void set(std::string id, FeatureFamily family, double value);
  std::optional<double> get(std::string_view id) const;
  double at(std::string_view id) const;
  bool contains(std::string_view id) const { return get(id).has_value(); }
  void merge(const FeatureVector& other);  // other's values win

  const std::vector<Feature>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const FeatureVector& a, const FeatureVector& b);

 private:
  std::vector<Feature> entries_;
};

// ---------------------------------------------------------------------------
// Lexicon: category -> word patterns. "manag*" is a stem prefix, "*ly" a
// suffix, anything else a literal word.

class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::map<std::string, std::vector<std::string>> categories);

  static Lexicon from_json(std::string_view json_text);
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon starter();

  std::string to_json() const;

  bool matches(std::string_view category, std::string_view token) const;
  std::vector<std::string> categories() const;
  const std::map<std::string, std::vector<std::string>>& raw() const { return raw_; }

 private:
  struct Patterns {
    std::vector<std::string> words;  // sorted
    std::vector<std::string> prefixes;
    std::vector<std::string> suffixes;
  };
  std::map<std::string, std::vector<std::string>> raw_;
  std::map<std::string, Patterns, std::less<>> compiled_;
};

// Text-structure, lexicon-category and punctuation features. Category values
// and long-word share are percentages of word tokens; punctuation values are
// raw counts. Feature ids: word_count, sentence_count, words_per_sentence,
// long_words_pct, lex.<category>, punct.<class>.
FeatureVector lexicon_features(std::string_view text, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Similarity metrics over lowercase token sequences

using Tokens = std::vector<std::string>;

inline constexpr double kBleuEpsilon = 1e-9;

// Corpus-free sentence BLEU: geometric mean of clipped n-gram precisions for
// n = 1..min(max_n, |candidate|), times the brevity penalty. Zero match counts
// are smoothed by adding kBleuEpsilon to the numerator.
double bleu(const Tokens& candidate, const Tokens& reference, int max_n = 4);

struct PrfScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

PrfScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);
PrfScore rouge_l(const Tokens& candidate, const Tokens& reference);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::size_t exact_matches = 0;
  std::size_t stem_matches = 0;
};

// Exact-then-Porter-stem unigram alignment; synonym stages are not used.
MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference);
double meteor(const Tokens& candidate, const Tokens& reference, const MeteorParams& params = {});

// ---------------------------------------------------------------------------
// Automatic scores of a summary against its context (normally the resume
// body). Feature ids: bleu, rouge1, rouge2, rougeL (F1 values), meteor.

struct AutoScoreResult {
  FeatureVector scores;
  std::vector<std::string> warnings;
};

AutoScoreResult auto_scores(std::string_view summary, std::string_view context);

// resume_id -> externally computed scores (e.g. bertscore), merged as
// AutoScore features.
using ExternalScores = std::map<std::string, FeatureVector>;

// CSV sidecar with columns resume_id,score_name,value (or a JSON array of
// objects with the same keys). `known_ids`, when given, must contain every
// resume_id in the file.
ExternalScores load_external_scores(const std::filesystem::path& path,
                                    const std::vector<std::string>* known_ids = nullptr);
ExternalScores parse_external_scores_csv(std::string_view content,
                                         const std::vector<std::string>* known_ids = nullptr);

}  // namespace selfpref::text
