#include "selfpref/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "selfpref/bounded.hpp"
#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/io.hpp"
#include "selfpref/numeric.hpp"
#include "selfpref/random.hpp"

namespace selfpref {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string_view kind_name(ComparisonKind k) {
  return k == ComparisonKind::EvaluatorVsHuman ? "evaluator-vs-human" : "evaluator-vs-alternative";
}

ComparisonKind parse_kind(std::string_view s) {
  if (s == "evaluator-vs-human" || s == "human") return ComparisonKind::EvaluatorVsHuman;
  if (s == "evaluator-vs-alternative" || s == "alternative") {
    return ComparisonKind::EvaluatorVsAlternative;
  }
  throw ValidationError("unknown comparison kind '" + std::string(s) + "'");
}

std::string_view order_mode_name(OrderMode m) { return m == OrderMode::Coin ? "coin" : "blocked"; }

OrderMode parse_order_mode(std::string_view s) {
  if (s == "coin") return OrderMode::Coin;
  if (s == "blocked") return OrderMode::Blocked;
  throw ValidationError("unknown order mode '" + std::string(s) + "' (expected coin|blocked)");
}

Position ResumePair::evaluator_position(const ResumeStore& store) const {
  const Source own = Source::model(evaluator_model);
  if (store.at(member_first).source == own) return Position::First;
  if (store.at(member_second).source == own) return Position::Second;
  throw ValidationError("pair " + pair_id + " has no member generated by " + evaluator_model);
}

std::string make_pair_id(std::string_view origin, std::string_view evaluator,
                         std::string_view other) {
  return std::string(origin) + "|" + std::string(evaluator) + "~" + std::string(other);
}

std::vector<ResumePair> build_pairs(const ResumeStore& store, const PairSpec& spec) {
  if (spec.evaluator_model.empty()) throw ValidationError("pairing requires an evaluator model");
  const bool alternative = spec.kind == ComparisonKind::EvaluatorVsAlternative;
  if (alternative) {
    if (spec.alternative_model.empty()) {
      throw ValidationError("evaluator-vs-alternative pairing requires an alternative model");
    }
    if (spec.alternative_model == spec.evaluator_model) {
      throw ValidationError("alternative model must differ from the evaluator");
    }
  }
  const std::string other_tag = alternative ? spec.alternative_model : "human";

  std::vector<ResumePair> pairs;
  std::vector<std::string> missing;
  for (const auto& r : store.all()) {
    if (!r.source.is_human()) continue;
    const auto own_id = counterfactual_id(r.id, spec.evaluator_model);
    const Resume* own = store.find(own_id);
    const Resume* other = alternative ? store.find(counterfactual_id(r.id, spec.alternative_model))
                                      : &r;
    if (!own || !other) {
      missing.push_back(r.id);
      continue;
    }
    ResumePair p;
    p.pair_id = make_pair_id(r.id, spec.evaluator_model, other_tag);
    p.origin_id = r.id;
    p.kind = spec.kind;
    p.evaluator_model = spec.evaluator_model;
    p.member_first = own->id;
    p.member_second = other->id;
    pairs.push_back(std::move(p));
  }
  if (!missing.empty()) {
    const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
    std::vector<std::string> head(missing.begin(), missing.begin() + static_cast<long>(shown));
    throw ValidationError("missing counterpart for " + std::to_string(missing.size()) +
                          " origin(s): " + join(head, ", ") +
                          (missing.size() > shown ? ", ..." : ""));
  }

  auto flip = [](ResumePair& p) { std::swap(p.member_first, p.member_second); };
  if (spec.order == OrderMode::Coin) {
    for (auto& p : pairs) {
      p.order_seed = derive_seed(spec.seed, p.origin_id);
      Engine eng = make_engine(p.order_seed);
      if (!bernoulli(eng, 0.5)) flip(p);
    }
  } else {
    const std::uint64_t block_seed = derive_seed(spec.seed, std::string_view("blocked-order"));
    std::vector<std::size_t> perm(pairs.size());
    std::iota(perm.begin(), perm.end(), 0);
    Engine eng = make_engine(block_seed);
    shuffle(perm, eng);
    const std::size_t half = pairs.size() / 2;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      auto& p = pairs[perm[k]];
      p.order_seed = block_seed;
      bool evaluator_first = k < half;
      if (pairs.size() % 2 == 1 && k == perm.size() - 1) evaluator_first = bernoulli(eng, 0.5);
      if (!evaluator_first) flip(p);
    }
  }
  return pairs;
}

nlohmann::json pairs_to_json(const std::vector<ResumePair>& pairs, const PairSpec& spec) {
  nlohmann::json j;
  j["schema"] = "selfpref.pairs";
  j["version"] = 1;
  j["evaluator"] = spec.evaluator_model;
  j["kind"] = kind_name(spec.kind);
  if (spec.kind == ComparisonKind::EvaluatorVsAlternative) j["alternative"] = spec.alternative_model;
  j["seed"] = spec.seed;
  j["order"] = order_mode_name(spec.order);
  auto& arr = j["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) {
    arr.push_back({{"pair_id", p.pair_id},
                   {"origin_id", p.origin_id},
                   {"first", p.member_first},
                   {"second", p.member_second},
                   {"order_seed", p.order_seed}});
  }
  return j;
}

std::vector<ResumePair> pairs_from_json(const nlohmann::json& m) {
  try {
    if (m.value("schema", "") != "selfpref.pairs") throw ParseError("not a pairs manifest");
    const auto kind = parse_kind(m.at("kind").get<std::string>());
    const auto evaluator = m.at("evaluator").get<std::string>();
    std::vector<ResumePair> out;
    std::set<std::string> seen;
    for (const auto& e : m.at("pairs")) {
      ResumePair p;
      p.pair_id = e.at("pair_id").get<std::string>();
      p.origin_id = e.at("origin_id").get<std::string>();
      p.member_first = e.at("first").get<std::string>();
      p.member_second = e.at("second").get<std::string>();
      p.order_seed = e.value("order_seed", std::uint64_t{0});
      p.kind = kind;
      p.evaluator_model = evaluator;
      if (!seen.insert(p.pair_id).second) throw ParseError("duplicate pair_id " + p.pair_id);
      out.push_back(std::move(p));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("pairs manifest: ") + e.what());
  }
}

std::vector<ResumePair> load_pairs(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return pairs_from_json(j);
}

// ---------------------------------------------------------------------------

bool EvaluationRecord::chose_self() const {
  return resolved() && chosen_source && !chosen_source->is_human() &&
         chosen_source->model_name() == self_model;
}

nlohmann::json record_to_json(const EvaluationRecord& r) {
  nlohmann::json j;
  j["pair_id"] = r.pair_id;
  j["evaluator"] = r.evaluator;
  j["self_model"] = r.self_model;
  j["variant"] = llm::variant_name(r.variant);
  j["status"] = r.resolved() ? "resolved" : "malformed";
  j["chosen_position"] =
      r.chosen_position ? nlohmann::json(llm::position_name(*r.chosen_position)) : nlohmann::json();
  j["first_source"] = r.first_source.to_string();
  j["second_source"] = r.second_source.to_string();
  j["chosen_source"] = r.chosen_source ? nlohmann::json(r.chosen_source->to_string()) : nlohmann::json();
  j["raw_response"] = r.raw_response;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

EvaluationRecord record_from_json(const nlohmann::json& j) {
  EvaluationRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.evaluator = j.at("evaluator").get<std::string>();
  r.self_model = j.at("self_model").get<std::string>();
  r.variant = llm::parse_variant(j.at("variant").get<std::string>());
  const auto status = j.at("status").get<std::string>();
  if (status == "resolved") {
    r.status = RecordStatus::Resolved;
  } else if (status == "malformed") {
    r.status = RecordStatus::Malformed;
  } else {
    throw ParseError("unknown record status '" + status + "'");
  }
  r.first_source = Source::parse(j.at("first_source").get<std::string>());
  r.second_source = Source::parse(j.at("second_source").get<std::string>());
  if (!j.at("chosen_position").is_null()) {
    r.chosen_position = llm::parse_position(j["chosen_position"].get<std::string>());
    r.chosen_source = *r.chosen_position == Position::First ? r.first_source : r.second_source;
  }
  r.raw_response = j.value("raw_response", "");
  r.error = j.value("error", "");
  if (r.resolved() && !r.chosen_position) {
    throw ParseError("resolved record " + r.pair_id + " lacks chosen_position");
  }
  return r;
}

namespace {

nlohmann::json header_json(const RunLog::Header& h) {
  return {{"schema", "selfpref.runlog"},
          {"version", kRunLogSchema},
          {"evaluator", h.evaluator},
          {"variant", llm::variant_name(h.variant)},
          {"manifest", h.manifest},
          {"config_hash", h.config_hash}};
}

// Returns complete lines; a trailing unterminated line (an interrupted
// write) is reported through `partial_offset`.
std::vector<std::string> split_lines(const std::string& text, std::size_t* complete_bytes) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (complete_bytes) *complete_bytes = start;
  return lines;
}

}  // namespace

std::vector<EvaluationRecord> RunLog::read(const std::filesystem::path& path, Header* header) {
  const std::string text = read_text_file(path);
  const auto lines = split_lines(text, nullptr);
  if (lines.empty()) throw ParseError(path.string() + ": empty run log");
  std::vector<EvaluationRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string loc = path.string() + ":" + std::to_string(i + 1);
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      if (i == 0) {
        if (j.value("schema", "") != "selfpref.runlog") throw ParseError("missing run log header");
        if (j.value("version", 0) != kRunLogSchema) throw ParseError("unsupported run log version");
        if (header) {
          header->evaluator = j.at("evaluator").get<std::string>();
          header->variant = llm::parse_variant(j.at("variant").get<std::string>());
          header->manifest = j.value("manifest", "");
          header->config_hash = j.value("config_hash", "");
        }
        continue;
      }
      out.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(loc + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(loc + ": " + e.what());
    }
  }
  return out;
}

RunLog RunLog::open(const std::filesystem::path& path, const Header& header) {
  RunLog log;
  log.path_ = path;
  std::error_code ec;
  if (std::filesystem::exists(path, ec) && std::filesystem::file_size(path) > 0) {
    std::size_t complete = 0;
    split_lines(read_text_file(path), &complete);
    if (complete < std::filesystem::file_size(path)) std::filesystem::resize_file(path, complete);
    Header existing;
    for (const auto& r : read(path, &existing)) log.remember(r);
    if (existing.evaluator != header.evaluator || existing.variant != header.variant) {
      throw ValidationError(path.string() + " belongs to evaluator '" + existing.evaluator +
                            "' (" + std::string(llm::variant_name(existing.variant)) +
                            "); refusing to mix runs");
    }
    return log;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot create run log " + path.string());
  out << header_json(header).dump() << '\n';
  return log;
}

void RunLog::append(const EvaluationRecord& r) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw ValidationError("cannot append to " + path_.string());
  out << record_to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw ValidationError("write failed for " + path_.string());
  remember(r);
}

void RunLog::remember(const EvaluationRecord& r) {
  if (resolved_.count(r.pair_id)) return;
  latest_[r.pair_id] = r;
  if (r.resolved()) resolved_.insert(r.pair_id);
}

ComparisonSummary run_comparisons(const std::vector<ResumePair>& pairs, const ResumeStore& store,
                                  llm::PairJudge& judge, PromptVariant variant, RunLog* log,
                                  const QualityMap* quality) {
  auto q = [&](const std::string& id) {
    if (!quality) return 0.0;
    auto it = quality->find(id);
    return it == quality->end() ? 0.0 : it->second;
  };

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!log || !log->is_resolved(pairs[i].pair_id)) todo.push_back(i);
  }

  std::map<std::string, EvaluationRecord> fresh;
  auto task = [&](std::size_t k) {
    const auto& p = pairs[todo[k]];
    const Resume& a = store.at(p.member_first);
    const Resume& b = store.at(p.member_second);
    EvaluationRecord r;
    r.pair_id = p.pair_id;
    r.evaluator = judge.evaluator();
    r.self_model = p.evaluator_model;
    r.variant = variant;
    r.first_source = a.source;
    r.second_source = b.source;
    llm::PairView view{p.pair_id, &a, &b, q(a.id), q(b.id)};
    try {
      const auto verdict = judge.judge(view, variant);
      r.status = RecordStatus::Resolved;
      r.chosen_position = verdict.chosen;
      r.chosen_source = verdict.chosen == Position::First ? a.source : b.source;
      r.raw_response = verdict.raw_response;
    } catch (const MalformedResponse& e) {
      r.status = RecordStatus::Malformed;
      r.raw_response = e.raw();
      r.error = e.what();
    } catch (const TransportError& e) {
      r.status = RecordStatus::Malformed;
      r.error = e.what();
    }
    return r;
  };
  auto consume = [&](std::size_t, EvaluationRecord r) {
    if (log) log->append(r);
    fresh[r.pair_id] = std::move(r);
  };
  run_bounded(todo.size(), judge.max_parallel(), task, consume);

  ComparisonSummary s;
  s.new_requests = todo.size();
  for (const auto& p : pairs) {
    const EvaluationRecord* r = nullptr;
    if (auto it = fresh.find(p.pair_id); it != fresh.end()) {
      r = &it->second;
    } else if (log) {
      if (auto jt = log->latest().find(p.pair_id); jt != log->latest().end()) r = &jt->second;
    }
    if (!r) continue;
    (r->resolved() ? s.resolved : s.malformed)++;
    s.records.push_back(*r);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Annotations

namespace {

bool truthy(std::string_view s) {
  const auto l = lower(trim(s));
  return l == "1" || l == "true" || l == "yes" || l == "y";
}

std::optional<int> parse_int(std::string_view s) {
  const auto t = trim(s);
  if (t.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const int v = std::stoi(t, &used);
    if (used != t.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

AnnotationSet parse_annotations(std::string_view csv_text, const RatingScale& scale,
                                const std::set<std::string>* known_pairs,
                                std::string_view source_name) {
  if (scale.min >= scale.max) throw ValidationError("rating scale needs min < max");
  const auto table = csv::parse(csv_text, source_name);
  const std::string ctx(source_name);
  const auto c_pair = table.require_column("pair_id", ctx);
  const auto c_annot = table.require_column("annotator_id", ctx);
  const auto c_better = table.require_column("better", ctx);
  std::vector<std::pair<std::size_t, std::size_t>> c_dims;
  for (auto dim : kAnnotationDimensions) {
    c_dims.emplace_back(table.require_column(std::string(dim) + "_a", ctx),
                        table.require_column(std::string(dim) + "_b", ctx));
  }
  const auto c_rationale = table.column("rationale");
  const auto c_attention = table.column("attention_check");

  AnnotationSet out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : table.rows) {
    const auto& f = row.fields;
    const std::string loc = ctx + ":" + std::to_string(row.line);
    if (c_attention && truthy(f[*c_attention])) {
      ++out.attention_checks;
      continue;
    }
    AnnotationVote v;
    v.pair_id = trim(f[c_pair]);
    v.annotator_id = trim(f[c_annot]);
    if (v.pair_id.empty() || v.annotator_id.empty()) {
      out.rejected.push_back({row.line, "empty pair_id or annotator_id"});
      continue;
    }
    if (known_pairs && !known_pairs->count(v.pair_id)) {
      throw ValidationError(loc + ": unknown pair_id '" + v.pair_id + "'");
    }
    if (!seen.emplace(v.pair_id, v.annotator_id).second) {
      throw ValidationError(loc + ": duplicate annotation for pair '" + v.pair_id +
                            "' by annotator '" + v.annotator_id + "'");
    }
    const auto better = lower(trim(f[c_better]));
    if (better == "first") {
      v.better = Position::First;
    } else if (better == "second") {
      v.better = Position::Second;
    } else {
      out.rejected.push_back(
          {row.line, better.empty() ? "missing 'better'" : "invalid 'better' value '" + better + "'"});
      continue;
    }
    std::string problem;
    for (std::size_t d = 0; d < kAnnotationDimensions.size() && problem.empty(); ++d) {
      const auto a = parse_int(f[c_dims[d].first]);
      const auto b = parse_int(f[c_dims[d].second]);
      const std::string dim(kAnnotationDimensions[d]);
      if (!a || !b) {
        problem = "missing or non-integer " + dim + " rating";
      } else if (*a < scale.min || *a > scale.max || *b < scale.min || *b > scale.max) {
        problem = dim + " rating outside [" + std::to_string(scale.min) + ", " +
                  std::to_string(scale.max) + "]";
      } else {
        v.ratings[dim] = {*a, *b};
      }
    }
    if (!problem.empty()) {
      out.rejected.push_back({row.line, problem});
      continue;
    }
    if (c_rationale) v.rationale = f[*c_rationale];
    out.votes.push_back(std::move(v));
  }
  return out;
}

AnnotationSet ingest_annotations(const std::filesystem::path& path, const RatingScale& scale,
                                 const std::set<std::string>* known_pairs) {
  return parse_annotations(read_text_file(path), scale, known_pairs, path.string());
}

std::string_view truth_name(TruthLabel t) {
  switch (t) {
    case TruthLabel::First: return "first";
    case TruthLabel::Second: return "second";
    case TruthLabel::Tie: return "tie";
  }
  return "tie";
}

TruthLabel parse_truth(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "first") return TruthLabel::First;
  if (l == "second") return TruthLabel::Second;
  if (l == "tie") return TruthLabel::Tie;
  throw ValidationError("expected first|second|tie, got '" + std::string(s) + "'");
}

std::vector<GroundTruthLabel> bootstrap_majority(const std::vector<AnnotationVote>& votes,
                                                 std::size_t resamples, std::uint64_t seed) {
  if (resamples == 0) throw ValidationError("bootstrap needs at least one resample");
  std::map<std::string, std::vector<Position>> by_pair;
  for (const auto& v : votes) by_pair[v.pair_id].push_back(v.better);

  std::vector<GroundTruthLabel> out;
  for (const auto& [pair_id, vs] : by_pair) {
    const std::size_t n = vs.size();
    Engine eng = make_engine(derive_seed(seed, pair_id));
    std::array<std::size_t, 3> outcome{};  // first, second, tie
    std::vector<double> first_share(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (vs[uniform_index(eng, n)] == Position::First) ++k;
      }
      first_share[b] = static_cast<double>(k) / static_cast<double>(n);
      if (2 * k > n) {
        ++outcome[0];
      } else if (2 * k < n) {
        ++outcome[1];
      } else {
        ++outcome[2];
      }
    }
    GroundTruthLabel g;
    g.pair_id = pair_id;
    g.votes = n;
    g.first_votes = static_cast<std::size_t>(std::count(vs.begin(), vs.end(), Position::First));
    const std::size_t top = *std::max_element(outcome.begin(), outcome.end());
    const auto modes = std::count(outcome.begin(), outcome.end(), top);
    std::size_t idx = 2;
    if (modes == 1) idx = static_cast<std::size_t>(std::max_element(outcome.begin(), outcome.end()) - outcome.begin());
    g.label = idx == 0 ? TruthLabel::First : idx == 1 ? TruthLabel::Second : TruthLabel::Tie;
    g.majority_share = static_cast<double>(outcome[idx]) / static_cast<double>(resamples);

    std::vector<double> side = first_share;
    if (g.label == TruthLabel::Second) {
      for (auto& x : side) x = 1.0 - x;
    }
    std::sort(side.begin(), side.end());
    g.ci_low = quantile_sorted(side, 0.025);
    g.ci_high = quantile_sorted(side, 0.975);
    out.push_back(std::move(g));
  }
  return out;
}

std::string truth_labels_csv(const std::vector<GroundTruthLabel>& labels) {
  std::string out = "pair_id,label,votes,first_votes,majority_share,ci_low,ci_high\n";
  for (const auto& g : labels) {
    out += csv::join_row({g.pair_id, std::string(truth_name(g.label)), std::to_string(g.votes),
                          std::to_string(g.first_votes), fixed(g.majority_share, 4),
                          fixed(g.ci_low, 4), fixed(g.ci_high, 4)});
    out += '\n';
  }
  return out;
}

std::vector<GroundTruthLabel> parse_truth_labels(std::string_view csv_text,
                                                 std::string_view source_name) {
  const auto table = csv::parse(csv_text, source_name);
  const std::string ctx(source_name);
  const auto c_pair = table.require_column("pair_id", ctx);
  const auto c_label = table.require_column("label", ctx);
  std::vector<GroundTruthLabel> out;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    GroundTruthLabel g;
    g.pair_id = trim(row.fields[c_pair]);
    try {
      g.label = parse_truth(row.fields[c_label]);
    } catch (const ValidationError& e) {
      throw ParseError(ctx + ":" + std::to_string(row.line) + ": " + e.what());
    }
    if (!seen.insert(g.pair_id).second) {
      throw ParseError(ctx + ":" + std::to_string(row.line) + ": duplicate pair_id '" +
                       g.pair_id + "'");
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace selfpref
