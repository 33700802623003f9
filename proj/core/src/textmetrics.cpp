#include "selfpref/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/porter.hpp"

namespace selfpref::text {

std::string_view family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::Summary:
      return "summary";
    case FeatureFamily::Lexicon:
      return "lexicon";
    case FeatureFamily::Punctuation:
      return "punctuation";
    case FeatureFamily::AutoScore:
      return "auto";
  }
  return "unknown";
}

void FeatureVector::set(std::string id, FeatureFamily family, double value) {
  if (!std::isfinite(value)) throw ValidationError("feature '" + id + "' is not finite");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Feature& f, const std::string& key) { return f.id < key; });
  if (it != entries_.end() && it->id == id) {
    it->family = family;
    it->value = value;
    return;
  }
  entries_.insert(it, Feature{std::move(id), family, value});
}

std::optional<double> FeatureVector::get(std::string_view id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Feature& f, std::string_view key) { return f.id < key; });
  if (it != entries_.end() && it->id == id) return it->value;
  return std::nullopt;
}

double FeatureVector::at(std::string_view id) const {
  if (auto v = get(id)) return *v;
  throw ValidationError("feature '" + std::string(id) + "' not present");
}

void FeatureVector::merge(const FeatureVector& other) {
  for (const auto& f : other.entries_) set(f.id, f.family, f.value);
}

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.id != y.id || x.family != y.family || x.value != y.value) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

FeatureVector lexicon_features(std::string_view text, const Lexicon& lexicon) {
  const TokenizedText tok = tokenize(text);
  const double n = static_cast<double>(tok.word_count());
  FeatureVector fv;
  fv.set("word_count", FeatureFamily::Summary, n);
  fv.set("sentence_count", FeatureFamily::Summary, static_cast<double>(tok.sentence_count()));
  fv.set("words_per_sentence", FeatureFamily::Summary,
         tok.sentence_count() ? n / static_cast<double>(tok.sentence_count()) : 0.0);

  std::size_t long_words = 0;
  for (const auto& t : tok.tokens) {
    if (codepoint_length(t) >= 7) ++long_words;
  }
  fv.set("long_words_pct", FeatureFamily::Summary, n > 0 ? 100.0 * long_words / n : 0.0);

  for (const auto& cat : lexicon.categories()) {
    std::size_t hits = 0;
    for (const auto& t : tok.tokens) {
      if (lexicon.matches(cat, t)) ++hits;
    }
    fv.set("lex." + cat, FeatureFamily::Lexicon, n > 0 ? 100.0 * hits / n : 0.0);
  }
  for (std::size_t c = 0; c < kPunctClassCount; ++c) {
    fv.set("punct." + std::string(punct_class_name(static_cast<PunctClass>(c))),
           FeatureFamily::Punctuation, static_cast<double>(tok.punctuation[c]));
  }
  return fv;
}

// ---------------------------------------------------------------------------

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  const auto un = static_cast<std::size_t>(n);
  if (tokens.size() < un) return counts;
  for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < un; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t total = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) total += std::min(c, it->second);
  }
  return total;
}

PrfScore make_prf(double overlap, double cand_total, double ref_total) {
  PrfScore s;
  if (cand_total <= 0 || ref_total <= 0 || overlap <= 0) return s;
  s.precision = overlap / cand_total;
  s.recall = overlap / ref_total;
  s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, int max_n) {
  if (reference.empty()) throw ValidationError("bleu: reference must be non-empty");
  if (max_n < 1) throw ValidationError("bleu: max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  const int order = std::min<int>(max_n, static_cast<int>(candidate.size()));
  double log_sum = 0;
  for (int n = 1; n <= order; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    const double matches = static_cast<double>(clipped_overlap(cand, ref));
    const double total = static_cast<double>(candidate.size() - static_cast<std::size_t>(n) + 1);
    const double p = (matches > 0 ? matches : kBleuEpsilon) / total;
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / order);
}

PrfScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw ValidationError("rouge_n: n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (candidate.size() < un || reference.size() < un) return {};
  const auto cand = count_ngrams(candidate, n);
  const auto ref = count_ngrams(reference, n);
  return make_prf(static_cast<double>(clipped_overlap(cand, ref)),
                  static_cast<double>(candidate.size() - un + 1),
                  static_cast<double>(reference.size() - un + 1));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return {};
  return make_prf(static_cast<double>(lcs_length(candidate, reference)),
                  static_cast<double>(candidate.size()), static_cast<double>(reference.size()));
}

// ---------------------------------------------------------------------------

namespace {

using MatchPairs = std::vector<std::pair<std::size_t, std::size_t>>;  // (cand idx, ref idx)

// Matches unmatched positions whose keys are equal, pairing the k-th
// occurrence in the candidate with the k-th in the reference.
std::size_t align_stage(const std::vector<std::string>& cand_keys,
                        const std::vector<std::string>& ref_keys, std::vector<bool>& cand_used,
                        std::vector<bool>& ref_used, MatchPairs& out) {
  std::unordered_map<std::string, std::vector<std::size_t>> ref_positions;
  for (std::size_t j = 0; j < ref_keys.size(); ++j) {
    if (!ref_used[j]) ref_positions[ref_keys[j]].push_back(j);
  }
  std::unordered_map<std::string, std::size_t> next;
  std::size_t added = 0;
  for (std::size_t i = 0; i < cand_keys.size(); ++i) {
    if (cand_used[i]) continue;
    auto it = ref_positions.find(cand_keys[i]);
    if (it == ref_positions.end()) continue;
    auto& k = next[cand_keys[i]];
    if (k >= it->second.size()) continue;
    const std::size_t j = it->second[k++];
    cand_used[i] = true;
    ref_used[j] = true;
    out.emplace_back(i, j);
    ++added;
  }
  return added;
}

}  // namespace

MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  MeteorAlignment a;
  if (candidate.empty() || reference.empty()) return a;
  std::vector<bool> cand_used(candidate.size(), false), ref_used(reference.size(), false);
  MatchPairs pairs;
  a.exact_matches = align_stage(candidate, reference, cand_used, ref_used, pairs);

  std::vector<std::string> cand_stems, ref_stems;
  cand_stems.reserve(candidate.size());
  ref_stems.reserve(reference.size());
  for (const auto& t : candidate) cand_stems.push_back(porter_stem(t));
  for (const auto& t : reference) ref_stems.push_back(porter_stem(t));
  a.stem_matches = align_stage(cand_stems, ref_stems, cand_used, ref_used, pairs);

  a.matches = pairs.size();
  if (a.matches == 0) return a;
  std::sort(pairs.begin(), pairs.end());
  a.chunks = 1;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const bool contiguous =
        pairs[k].first == pairs[k - 1].first + 1 && pairs[k].second == pairs[k - 1].second + 1;
    if (!contiguous) ++a.chunks;
  }
  return a;
}

double meteor(const Tokens& candidate, const Tokens& reference, const MeteorParams& params) {
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return fmean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------

AutoScoreResult auto_scores(std::string_view summary, std::string_view context) {
  AutoScoreResult out;
  const Tokens cand = words(summary);
  const Tokens ref = words(context);
  auto put = [&](const char* id, double v) { out.scores.set(id, FeatureFamily::AutoScore, v); };
  if (ref.empty() || cand.empty()) {
    out.warnings.push_back(ref.empty() ? "empty context: automatic scores set to 0"
                                       : "empty summary: automatic scores set to 0");
    for (const char* id : {"bleu", "rouge1", "rouge2", "rougeL", "meteor"}) put(id, 0.0);
    return out;
  }
  put("bleu", bleu(cand, ref));
  put("rouge1", rouge_n(cand, ref, 1).f1);
  put("rouge2", rouge_n(cand, ref, 2).f1);
  put("rougeL", rouge_l(cand, ref).f1);
  put("meteor", meteor(cand, ref));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ScoreRow {
  std::string locator, id, name;
  double value;
};

ExternalScores assemble_scores(const std::vector<ScoreRow>& rows,
                               const std::vector<std::string>* known_ids) {
  std::set<std::string> known;
  if (known_ids) known.insert(known_ids->begin(), known_ids->end());
  ExternalScores out;
  std::vector<std::string> unknown;
  for (const auto& r : rows) {
    if (!std::isfinite(r.value)) {
      throw ValidationError(r.locator + ": score '" + r.name + "' for '" + r.id +
                            "' is not finite");
    }
    if (r.name.empty()) throw ValidationError(r.locator + ": empty score_name");
    if (known_ids && !known.count(r.id)) {
      unknown.push_back(r.id);
      continue;
    }
    auto& fv = out[r.id];
    if (fv.contains(r.name)) {
      throw ValidationError(r.locator + ": duplicate score ('" + r.id + "', '" + r.name + "')");
    }
    fv.set(r.name, FeatureFamily::AutoScore, r.value);
  }
  if (!unknown.empty()) {
    std::string msg = "external scores reference unknown resume ids:";
    std::sort(unknown.begin(), unknown.end());
    unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
    for (const auto& id : unknown) msg += " " + id;
    throw ValidationError(msg);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& locator) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // "nan"/"inf" parse fine with stod; anything else lands here.
    throw ParseError(locator + ": value '" + s + "' is not a number");
  }
}

}  // namespace

ExternalScores parse_external_scores_csv(std::string_view content,
                                         const std::vector<std::string>* known_ids) {
  const auto table = csv::parse(content, "external scores");
  const auto id_col = table.require_column("resume_id", "external scores");
  const auto name_col = table.require_column("score_name", "external scores");
  const auto value_col = table.require_column("value", "external scores");
  std::vector<ScoreRow> rows;
  for (const auto& row : table.rows) {
    const std::string loc = "external scores:" + std::to_string(row.line);
    rows.push_back({loc, row.fields[id_col], row.fields[name_col],
                    parse_number(row.fields[value_col], loc)});
  }
  return assemble_scores(rows, known_ids);
}

ExternalScores load_external_scores(const std::filesystem::path& path,
                                    const std::vector<std::string>* known_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open external scores " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (path.extension() != ".json") return parse_external_scores_csv(ss.str(), known_ids);

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string loc = path.string() + ": record " + std::to_string(i);
    const auto& o = doc[i];
    if (!o.is_object() || !o.contains("resume_id") || !o.contains("score_name") ||
        !o.contains("value") || !o["value"].is_number()) {
      throw ParseError(loc + ": expected {resume_id, score_name, value:number}");
    }
    rows.push_back({loc, o["resume_id"].get<std::string>(), o["score_name"].get<std::string>(),
                    o["value"].get<double>()});
  }
  return assemble_scores(rows, known_ids);
}

}  // namespace selfpref::text
