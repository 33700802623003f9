#include "selfpref/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "selfpref/csv.hpp"
#include "selfpref/error.hpp"
#include "selfpref/tokenize.hpp"

namespace selfpref {

Source Source::model(std::string name) {
  if (name.empty()) throw ValidationError("model source requires a non-empty model name");
  Source s;
  s.model_ = std::move(name);
  if (s.to_string() == "human") throw ValidationError("'human' is reserved and not a model name");
  return s;
}

Source Source::parse(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.empty() || lower == "human") return human();
  Source s;
  s.model_ = std::string(tag);
  return s;
}

std::string counterfactual_id(std::string_view origin_id, std::string_view model) {
  return std::string(origin_id) + "@" + std::string(model);
}

std::string render_resume(const Resume& r) {
  if (r.body.empty()) return r.summary;
  return r.summary + "\n\n" + r.body;
}

ResumeStore::ResumeStore(std::vector<Resume> resumes) {
  for (auto& r : resumes) add(std::move(r));
}

void ResumeStore::add(Resume r) {
  if (index_.count(r.id)) throw ValidationError("duplicate resume id '" + r.id + "'");
  index_.emplace(r.id, items_.size());
  items_.push_back(std::move(r));
}

const Resume* ResumeStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &items_[it->second];
}

const Resume& ResumeStore::at(std::string_view id) const {
  if (const auto* r = find(id)) return *r;
  throw ValidationError("unknown resume id '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------

namespace {

bool is_zero_width(char32_t cp) {
  return cp == 0x200B || cp == 0x200C || cp == 0x200D || cp == 0x2060 || cp == 0xFEFF;
}

bool is_unicode_space(char32_t cp) {
  return cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

void trim_spaces(std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) {
    s.clear();
    return;
  }
  const auto e = s.find_last_not_of(' ');
  s = s.substr(b, e - b + 1);
}

void strip_line_bullets(std::string& line, std::string_view ascii_bullets) {
  for (;;) {
    trim_spaces(line);
    if (line.empty()) return;
    const auto is_bullet = [&](char c) { return ascii_bullets.find(c) != std::string_view::npos; };
    if (is_bullet(line.front()) && (line.size() == 1 || line[1] == ' ')) {
      line.erase(0, 1);
      continue;
    }
    if (is_bullet(line.back()) && (line.size() == 1 || line[line.size() - 2] == ' ')) {
      line.pop_back();
      continue;
    }
    return;
  }
}

}  // namespace

std::string clean_summary(std::string_view text, const CleaningRules& rules) {
  std::string normalized;
  normalized.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = text::decode_utf8(text, pos);
    if (cp == U'\n' || cp == U'\r') {
      normalized.push_back('\n');
    } else if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F) || is_unicode_space(cp)) {
      normalized.push_back(' ');
    } else if (is_zero_width(cp) || cp == 0xFFFD) {
      continue;
    } else {
      text::append_utf8(normalized, cp);
    }
  }
  for (const auto& glyph : rules.bullet_glyphs) replace_all(normalized, glyph, " ");

  std::string out;
  std::istringstream lines(normalized);
  std::string line;
  while (std::getline(lines, line)) {
    strip_line_bullets(line, rules.ascii_bullets);
    if (line.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += line;
  }

  std::string collapsed;
  collapsed.reserve(out.size());
  for (char c : out) {
    if (c == ' ' && !collapsed.empty() && collapsed.back() == ' ') continue;
    collapsed.push_back(c);
  }
  trim_spaces(collapsed);
  return collapsed;
}

// ---------------------------------------------------------------------------

std::optional<CorpusFormat> format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".csv") return CorpusFormat::Csv;
  if (ext == ".json") return CorpusFormat::Json;
  return std::nullopt;
}

namespace {

struct HeadingMatch {
  std::size_t start = std::string::npos;
  std::size_t end = 0;
};

bool boundary_before(std::string_view text, std::size_t pos) {
  if (pos == 0) return true;
  std::size_t spaces = 0;
  std::size_t i = pos;
  while (i > 0 && (text[i - 1] == ' ' || text[i - 1] == '\t')) {
    --i;
    ++spaces;
  }
  if (i == 0) return true;
  if (text[i - 1] == '\n' || text[i - 1] == '\r') return true;
  return spaces >= 2;
}

bool boundary_after(std::string_view text, std::size_t pos) {
  if (pos < text.size() && text[pos] == ':') ++pos;
  if (pos >= text.size()) return true;
  std::size_t spaces = 0;
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
    ++pos;
    ++spaces;
  }
  if (pos >= text.size()) return true;
  if (text[pos] == '\n' || text[pos] == '\r') return true;
  return spaces >= 2;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

HeadingMatch first_heading(std::string_view lower_text, const std::vector<std::string>& headings,
                           std::size_t from) {
  HeadingMatch best;
  for (const auto& h : headings) {
    const std::string needle = ascii_lower(h);
    std::size_t pos = from;
    while ((pos = lower_text.find(needle, pos)) != std::string_view::npos) {
      const std::size_t end = pos + needle.size();
      if (boundary_before(lower_text, pos) && boundary_after(lower_text, end)) {
        const bool better = pos < best.start || (pos == best.start && end > best.end);
        if (better) best = {pos, end};
        break;
      }
      ++pos;
    }
  }
  if (best.start != std::string::npos && best.end < lower_text.size() &&
      lower_text[best.end] == ':') {
    ++best.end;
  }
  return best;
}

}  // namespace

ExtractedSections extract_summary_section(std::string_view full_text,
                                          const SectionHeadings& headings) {
  const std::string lower = ascii_lower(full_text);
  const HeadingMatch summary = first_heading(lower, headings.summary, 0);
  if (summary.start == std::string::npos) return {"", std::string(full_text)};

  std::vector<std::string> all = headings.other;
  all.insert(all.end(), headings.summary.begin(), headings.summary.end());
  const HeadingMatch next = first_heading(lower, all, summary.end);
  const std::size_t stop = next.start == std::string::npos ? full_text.size() : next.start;

  ExtractedSections out;
  out.summary = std::string(full_text.substr(summary.end, stop - summary.end));
  out.body = std::string(full_text.substr(0, summary.start));
  if (stop < full_text.size()) {
    if (!out.body.empty()) out.body += "\n";
    out.body += std::string(full_text.substr(stop));
  }
  return out;
}

namespace {

struct RawRecord {
  std::string locator;
  std::string id, category, summary, body, source, origin_id;
  bool has_summary = false;
};

LoadResult finish_load(std::vector<RawRecord> raw, const LoadOptions& options) {
  LoadResult result;
  result.input_count = raw.size();
  std::unordered_set<std::string> seen;
  for (auto& r : raw) {
    if (r.id.empty()) throw ParseError(r.locator + ": empty id");
    if (!seen.insert(r.id).second) {
      throw ParseError(r.locator + ": duplicate id '" + r.id + "'");
    }
    if (!options.columns.full_text.empty()) {
      auto sections = extract_summary_section(r.body, options.headings);
      r.summary = std::move(sections.summary);
      r.body = std::move(sections.body);
    }
    std::string cleaned = clean_summary(r.summary, options.cleaning);
    if (cleaned.empty()) {
      result.dropped_ids.push_back(r.id);
      continue;
    }
    Resume resume;
    resume.id = r.id;
    resume.category = r.category;
    resume.summary = std::move(cleaned);
    resume.body = std::move(r.body);
    resume.source = Source::parse(r.source);
    resume.origin_id = r.origin_id.empty() ? r.id : r.origin_id;
    if (resume.source.is_human() && resume.origin_id != resume.id) {
      throw ParseError(r.locator + ": human resume '" + r.id + "' must be its own origin");
    }
    result.resumes.push_back(std::move(resume));
  }
  return result;
}

std::vector<RawRecord> read_csv_records(std::string_view content, const ColumnMap& cols,
                                        std::string_view source_name) {
  const csv::Table table = csv::parse(content, source_name);
  const std::string ctx(source_name);
  const auto id_col = table.require_column(cols.id, ctx);
  const auto cat_col = table.require_column(cols.category, ctx);
  std::optional<std::size_t> summary_col, body_col, text_col;
  if (cols.full_text.empty()) {
    summary_col = table.require_column(cols.summary, ctx);
    body_col = table.require_column(cols.body, ctx);
  } else {
    text_col = table.require_column(cols.full_text, ctx);
  }
  const auto source_col = table.column(cols.source);
  const auto origin_col = table.column(cols.origin_id);

  std::vector<RawRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    RawRecord r;
    r.locator = ctx + ":" + std::to_string(row.line);
    r.id = row.fields[id_col];
    r.category = row.fields[cat_col];
    if (text_col) {
      r.body = row.fields[*text_col];
    } else {
      r.summary = row.fields[*summary_col];
      r.body = row.fields[*body_col];
    }
    if (source_col) r.source = row.fields[*source_col];
    if (origin_col) r.origin_id = row.fields[*origin_col];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RawRecord> read_json_records(std::string_view content, const ColumnMap& cols,
                                         std::string_view source_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(source_name) + ": " + e.what());
  }
  if (!doc.is_array()) throw ParseError(std::string(source_name) + ": expected a JSON array");

  auto field = [&](const nlohmann::json& obj, const std::string& key, const std::string& locator,
                   bool required) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) throw ParseError(locator + ": missing field '" + key + "'");
      return {};
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    throw ParseError(locator + ": field '" + key + "' must be a string");
  };

  std::vector<RawRecord> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    RawRecord r;
    r.locator = std::string(source_name) + ": record " + std::to_string(i);
    if (!obj.is_object()) throw ParseError(r.locator + ": expected an object");
    r.id = field(obj, cols.id, r.locator, true);
    r.category = field(obj, cols.category, r.locator, true);
    if (cols.full_text.empty()) {
      r.summary = field(obj, cols.summary, r.locator, false);
      r.body = field(obj, cols.body, r.locator, true);
    } else {
      r.body = field(obj, cols.full_text, r.locator, true);
    }
    r.source = field(obj, cols.source, r.locator, false);
    r.origin_id = field(obj, cols.origin_id, r.locator, false);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

LoadResult parse_resumes(std::string_view content, const LoadOptions& options,
                         std::string_view source_name) {
  auto raw = options.format == CorpusFormat::Csv
                 ? read_csv_records(content, options.columns, source_name)
                 : read_json_records(content, options.columns, source_name);
  return finish_load(std::move(raw), options);
}

LoadResult load_resumes(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_resumes(ss.str(), options, path.string());
}

// ---------------------------------------------------------------------------

Resume splice_summary(const Resume& origin, std::string new_summary, const std::string& model) {
  if (!origin.source.is_human()) {
    throw ValidationError("splice origin '" + origin.id + "' is not a human-written resume");
  }
  if (clean_summary(new_summary).empty()) {
    throw ValidationError("refusing to splice an empty summary into '" + origin.id + "'");
  }
  Resume cf;
  cf.id = counterfactual_id(origin.id, model);
  cf.category = origin.category;
  cf.summary = std::move(new_summary);
  cf.body = origin.body;
  cf.source = Source::model(model);
  cf.origin_id = origin.id;
  return cf;
}

// ---------------------------------------------------------------------------

Distribution describe(std::vector<double> values) {
  Distribution d;
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0;
  for (double v : values) sum += v;
  d.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.sd = std::sqrt(ss / (n - 1));
  }
  auto quantile = [&](double p) {
    const double h = (n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  d.min = values.front();
  d.q1 = quantile(0.25);
  d.median = quantile(0.5);
  d.q3 = quantile(0.75);
  d.max = values.back();
  return d;
}

SummaryMeasures measure_summary(std::string_view summary) {
  const auto tok = text::tokenize(summary);
  SummaryMeasures m;
  m.n_words = static_cast<double>(tok.word_count());
  m.n_sentences = static_cast<double>(tok.sentence_count());
  m.words_per_sentence = m.n_sentences > 0 ? m.n_words / m.n_sentences : 0.0;
  const std::set<std::string> unique(tok.tokens.begin(), tok.tokens.end());
  m.n_unique_words = static_cast<double>(unique.size());
  m.type_token_ratio = m.n_words > 0 ? m.n_unique_words / m.n_words : 0.0;
  m.presence_of_numbers =
      std::any_of(summary.begin(), summary.end(), [](char c) { return c >= '0' && c <= '9'; })
          ? 1.0
          : 0.0;
  return m;
}

const GroupStats* CorpusStats::find(std::string_view group) const {
  for (const auto& g : groups) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

CorpusStats corpus_stats(const std::vector<Resume>& resumes,
                         const std::vector<Source>& expected_groups) {
  std::map<Source, std::vector<SummaryMeasures>> by_group;
  for (const auto& r : resumes) by_group[r.source].push_back(measure_summary(r.summary));

  CorpusStats stats;
  for (const auto& expected : expected_groups) {
    if (!by_group.count(expected)) {
      stats.warnings.push_back("group '" + expected.to_string() + "' has no resumes; omitted");
    }
  }
  // std::map<Source> orders human (empty model name) first.
  for (const auto& [source, rows] : by_group) {
    GroupStats g;
    g.group = source.to_string();
    g.n = rows.size();
    auto column = [&](double SummaryMeasures::*field) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (const auto& m : rows) v.push_back(m.*field);
      return describe(std::move(v));
    };
    g.measures["n_words"] = column(&SummaryMeasures::n_words);
    g.measures["n_sentences"] = column(&SummaryMeasures::n_sentences);
    g.measures["words_per_sentence"] = column(&SummaryMeasures::words_per_sentence);
    g.measures["n_unique_words"] = column(&SummaryMeasures::n_unique_words);
    g.measures["type_token_ratio"] = column(&SummaryMeasures::type_token_ratio);
    g.measures["presence_of_numbers"] = column(&SummaryMeasures::presence_of_numbers);
    stats.groups.push_back(std::move(g));
  }
  return stats;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string corpus_stats_csv(const CorpusStats& stats) {
  std::string out = "group,n,measure,mean,sd,min,q1,median,q3,max\n";
  for (const auto& g : stats.groups) {
    for (auto name : kMeasureNames) {
      const auto& d = g.measures.at(std::string(name));
      out += csv::join_row({g.group, std::to_string(g.n), std::string(name), fixed(d.mean, 6),
                            fixed(d.sd, 6), fixed(d.min, 6), fixed(d.q1, 6), fixed(d.median, 6),
                            fixed(d.q3, 6), fixed(d.max, 6)});
      out += "\n";
    }
  }
  return out;
}

std::string corpus_stats_table(const CorpusStats& stats) {
  static const std::map<std::string, std::string> labels = {
      {"n_words", "Number of words"},
      {"n_sentences", "Number of sentences"},
      {"words_per_sentence", "Average words per sentence"},
      {"n_unique_words", "Number of unique words"},
      {"type_token_ratio", "Type-Token Ratio"},
      {"presence_of_numbers", "Presence of numbers"}};
  std::ostringstream os;
  char line[256];
  for (const auto& g : stats.groups) {
    os << "(" << g.group << ", n = " << g.n << ")\n";
    std::snprintf(line, sizeof line, "%-28s %9s %9s %9s %9s %9s %9s %9s\n", "Measure", "Mean",
                  "Std.Dev.", "Min", "Q1", "Median", "Q3", "Max");
    os << line;
    for (auto name : kMeasureNames) {
      const auto& d = g.measures.at(std::string(name));
      std::snprintf(line, sizeof line, "%-28s %9.2f %9.2f %9.2f %9.2f %9.2f %9.2f %9.2f\n",
                    labels.at(std::string(name)).c_str(), d.mean, d.sd, d.min, d.q1, d.median,
                    d.q3, d.max);
      os << line;
    }
    os << "\n";
  }
  for (const auto& w : stats.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace selfpref
