#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace selfpref::text {

enum class PunctClass : std::size_t {
  Period,
  Comma,
  Colon,
  Semicolon,
  Question,
  Exclamation,
  Apostrophe,
  Quote,
  Dash,
  Parenthesis,
  Other,
};
inline constexpr std::size_t kPunctClassCount = 11;

std::string_view punct_class_name(PunctClass c);

struct TokenizedText {
  std::vector<std::string> tokens;            // lowercase word tokens
  std::vector<std::size_t> sentence_lengths;  // tokens per non-empty sentence
  std::array<std::size_t, kPunctClassCount> punctuation{};

  std::size_t word_count() const { return tokens.size(); }
  std::size_t sentence_count() const { return sentence_lengths.size(); }
  std::size_t punct(PunctClass c) const { return punctuation[static_cast<std::size_t>(c)]; }
};

// Words are maximal runs of alphanumeric code points (ASCII alnum plus any
// non-ASCII letter outside the symbol/punctuation blocks), lowercased.
// Sentences end at [.!?] followed by whitespace or end of text; only
// sentences containing at least one word are counted.
TokenizedText tokenize(std::string_view text);

// Convenience: the token sequence only.
std::vector<std::string> words(std::string_view text);

// Number of Unicode code points in a UTF-8 string.
std::size_t codepoint_length(std::string_view utf8);

// Decodes one code point starting at `pos`, advancing it. Invalid sequences
// yield U+FFFD and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_word_codepoint(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace selfpref::text
