#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace selfpref::prompts {

// Raw templates; identical copies live under prompts/ in the repository.
extern const std::string_view kGenerationSystem;
extern const std::string_view kGenerationUser;
extern const std::string_view kEvaluationSystem;
extern const std::string_view kEvaluationUser;
extern const std::string_view kDebiasInstruction;
extern const std::string_view kShortlistSystem;
extern const std::string_view kShortlistUser;

// Replaces every "{key}" occurrence.
std::string fill(std::string_view tmpl,
                 const std::vector<std::pair<std::string_view, std::string_view>>& values);

// "ten", "four", ...; digits above twenty.
std::string count_word(std::size_t n);

std::string generation_system(int min_words, int max_words);
std::string generation_user(std::string_view resume_text, int min_words, int max_words);

std::string evaluation_system(bool debias);
std::string evaluation_user(std::string_view resume_a, std::string_view resume_b);

struct ShortlistEntry {
  std::string id;
  std::string summary;
};

std::string shortlist_system(std::size_t candidate_count, std::size_t slot_count);
std::string shortlist_user(const std::vector<ShortlistEntry>& candidates);

}  // namespace selfpref::prompts
