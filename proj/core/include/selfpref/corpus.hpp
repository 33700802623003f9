#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace selfpref {

// Provenance of a resume summary: written by a person, or generated by a
// named model.
class Source {
 public:
  static Source human() { return Source(); }
  static Source model(std::string name);
  // "human" (case-insensitive) maps to human; anything else is a model name.
  static Source parse(std::string_view tag);

  bool is_human() const { return model_.empty(); }
  const std::string& model_name() const { return model_; }
  std::string to_string() const { return is_human() ? std::string("human") : model_; }

  auto operator<=>(const Source&) const = default;

 private:
  std::string model_;
};

struct Resume {
  std::string id;
  std::string category;
  std::string summary;
  std::string body;
  Source source;
  std::string origin_id;
};

// Id scheme for counterfactuals: "<origin>@<model>".
std::string counterfactual_id(std::string_view origin_id, std::string_view model);

// Full resume text as shown to an evaluator: the summary, a blank line, then
// the untouched body.
std::string render_resume(const Resume& r);

class ResumeStore {
 public:
  ResumeStore() = default;
  explicit ResumeStore(std::vector<Resume> resumes);

  void add(Resume r);  // throws ValidationError on duplicate id
  const Resume* find(std::string_view id) const;
  const Resume& at(std::string_view id) const;
  std::size_t size() const { return index_.size(); }
  const std::vector<Resume>& all() const { return items_; }

 private:
  std::vector<Resume> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Cleaning

struct CleaningRules {
  // Glyphs treated as list bullets; removed wherever they occur.
  std::vector<std::string> bullet_glyphs = {
      "•", "◦", "▪", "▫", "●", "○", "■", "□",
      "➢", "➤", "►", "▸", "✓", "✔", "❖", "◆",
      "◇", "·", "‣", "⁃",
      // Symbol-font private-use bullets left behind by word processors.
      "\xEF\x82\xB7", "\xEF\x82\xA7", "\xEF\x83\x98", "\xEF\x81\xB6"};
  // ASCII markers stripped only at the start or end of a line when set off by
  // whitespace: "- item", "* item".
  std::string ascii_bullets = "-*+>";
};

std::string clean_summary(std::string_view text, const CleaningRules& rules = {});

// ---------------------------------------------------------------------------
// Loading

enum class CorpusFormat { Csv, Json };

std::optional<CorpusFormat> format_from_path(const std::filesystem::path& path);

// Maps logical fields onto file column (or JSON key) names. When `full_text`
// is set, summary and body are carved out of that column by heading
// detection instead of being read from `summary`/`body`.
struct ColumnMap {
  std::string id = "id";
  std::string category = "category";
  std::string summary = "summary";
  std::string body = "body";
  std::string source = "source";        // optional column
  std::string origin_id = "origin_id";  // optional column
  std::string full_text;                // e.g. "Resume_str" for the public Kaggle file
};

struct SectionHeadings {
  std::vector<std::string> summary = {
      "Professional Summary", "Executive Summary", "Summary of Qualifications",
      "Qualifications Summary", "Career Summary", "Career Overview", "Executive Profile",
      "Professional Profile", "Professional Overview", "Career Focus", "Summary", "Profile",
      "Objective", "Overview"};
  std::vector<std::string> other = {
      "Highlights", "Skill Highlights", "Skills", "Technical Skills", "Core Qualifications",
      "Qualifications", "Experience", "Work Experience", "Professional Experience",
      "Relevant Experience", "Work History", "Employment History", "Career History",
      "Education", "Education and Training", "Accomplishments", "Core Accomplishments",
      "Certifications", "Licenses", "Interests", "Additional Information", "Languages",
      "Affiliations", "Professional Affiliations", "Presentations", "Publications", "Awards",
      "Activities and Honors", "Volunteer Experience", "Military Experience", "Training",
      "Areas of Expertise", "Personal Information", "Projects", "Skill Summary"};
};

struct ExtractedSections {
  std::string summary;  // raw, uncleaned
  std::string body;
};

// Splits a flattened resume into the summary section and everything else. A
// heading matches only when set off by line breaks or runs of two or more
// spaces, as in text flattened from a resume PDF/HTML.
ExtractedSections extract_summary_section(std::string_view full_text,
                                          const SectionHeadings& headings = {});

struct LoadOptions {
  CorpusFormat format = CorpusFormat::Csv;
  ColumnMap columns;
  CleaningRules cleaning;
  SectionHeadings headings;
};

struct LoadResult {
  std::vector<Resume> resumes;
  std::size_t input_count = 0;
  std::vector<std::string> dropped_ids;  // empty summary after cleaning

  std::size_t retained_count() const { return resumes.size(); }
  std::size_t dropped_count() const { return dropped_ids.size(); }
};

LoadResult load_resumes(const std::filesystem::path& path, const LoadOptions& options = {});
LoadResult parse_resumes(std::string_view content, const LoadOptions& options,
                         std::string_view source_name = "<memory>");

// ---------------------------------------------------------------------------
// Counterfactuals

Resume splice_summary(const Resume& origin, std::string new_summary, const std::string& model);

// ---------------------------------------------------------------------------
// Summary statistics per provenance group

struct Distribution {
  double mean = 0, sd = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Sample sd (n-1) and type-7 (linear interpolation) quartiles.
Distribution describe(std::vector<double> values);

struct SummaryMeasures {
  double n_words = 0;
  double n_sentences = 0;
  double words_per_sentence = 0;
  double n_unique_words = 0;
  double type_token_ratio = 0;
  double presence_of_numbers = 0;
};

SummaryMeasures measure_summary(std::string_view summary);

inline constexpr std::array<std::string_view, 6> kMeasureNames = {
    "n_words", "n_sentences", "words_per_sentence", "n_unique_words", "type_token_ratio",
    "presence_of_numbers"};

struct GroupStats {
  std::string group;  // Source::to_string()
  std::size_t n = 0;
  std::map<std::string, Distribution> measures;  // keyed by kMeasureNames
};

struct CorpusStats {
  std::vector<GroupStats> groups;  // human first, then models by name
  std::vector<std::string> warnings;

  const GroupStats* find(std::string_view group) const;
};

// `expected_groups`, when non-empty, lists groups that must appear; missing
// ones are omitted with a warning.
CorpusStats corpus_stats(const std::vector<Resume>& resumes,
                         const std::vector<Source>& expected_groups = {});

std::string corpus_stats_csv(const CorpusStats& stats);
std::string corpus_stats_table(const CorpusStats& stats);

}  // namespace selfpref
