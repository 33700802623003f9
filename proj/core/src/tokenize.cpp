#include "selfpref/tokenize.hpp"

namespace selfpref::text {

namespace {

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_sentence_end(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

PunctClass classify(char32_t cp) {
  switch (cp) {
    case U'.':
    case 0x2026:
      return PunctClass::Period;
    case U',':
      return PunctClass::Comma;
    case U':':
      return PunctClass::Colon;
    case U';':
      return PunctClass::Semicolon;
    case U'?':
      return PunctClass::Question;
    case U'!':
      return PunctClass::Exclamation;
    case U'\'':
    case 0x2018:
    case 0x2019:
      return PunctClass::Apostrophe;
    case U'"':
    case 0x201C:
    case 0x201D:
      return PunctClass::Quote;
    case U'-':
    case 0x2010:
    case 0x2011:
    case 0x2012:
    case 0x2013:
    case 0x2014:
      return PunctClass::Dash;
    case U'(':
    case U')':
    case U'[':
    case U']':
    case U'{':
    case U'}':
      return PunctClass::Parenthesis;
    default:
      return PunctClass::Other;
  }
}

}  // namespace

std::string_view punct_class_name(PunctClass c) {
  static constexpr std::array<std::string_view, kPunctClassCount> names = {
      "period", "comma", "colon", "semicolon", "question", "exclamation",
      "apostrophe", "quote", "dash", "parenthesis", "other"};
  return names[static_cast<std::size_t>(c)];
}

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0 && b0 >= 0xC2) {
      pos += 2;
      return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      const char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
      if (cp >= 0x800 && (cp < 0xD800 || cp > 0xDFFF)) {
        pos += 3;
        return cp;
      }
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      const char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) |
                          (char32_t(c2) << 6) | char32_t(c3);
      if (cp >= 0x10000 && cp <= 0x10FFFF) {
        pos += 4;
        return cp;
      }
    }
  }
  ++pos;
  return 0xFFFD;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_word_codepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
  }
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // C1 + Latin-1 symbols
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, arrows, math, shapes, dingbats
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp == 0xFFFD || cp == 0xFEFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x17F && cp != 0x130 && cp != 0x138 && cp != 0x149) {
    // Latin Extended-A alternates upper/lower, with a parity shift after U+0138.
    const bool shifted = cp >= 0x139 && cp <= 0x148;
    const bool shifted2 = cp >= 0x179 && cp <= 0x17E;
    if (shifted || shifted2) return (cp % 2 == 1) ? cp + 1 : cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

std::size_t codepoint_length(std::string_view utf8) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < utf8.size();) {
    decode_utf8(utf8, pos);
    ++n;
  }
  return n;
}

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  std::string current;
  std::size_t tokens_in_sentence = 0;

  auto flush_word = [&] {
    if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      current.clear();
      ++tokens_in_sentence;
    }
  };
  auto close_sentence = [&] {
    if (tokens_in_sentence > 0) out.sentence_lengths.push_back(tokens_in_sentence);
    tokens_in_sentence = 0;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode_utf8(text, pos);
    if (is_word_codepoint(cp)) {
      append_utf8(current, to_lower(cp));
      continue;
    }
    flush_word();
    if (is_space(cp) || cp < 0x20 || cp == 0x7F) continue;
    ++out.punctuation[static_cast<std::size_t>(classify(cp))];
    if (is_sentence_end(cp)) {
      // Sentence ends only when the terminator is followed by whitespace or EOF.
      std::size_t peek = pos;
      bool boundary = true;
      while (peek < text.size()) {
        const char32_t next = decode_utf8(text, peek);
        if (is_sentence_end(next)) continue;  // "?!" or "..." run
        boundary = is_space(next) || next == U'"' || next == U')' || next == 0x201D;
        if (boundary && !is_space(next)) {
          // closing quote/paren must itself be followed by space or EOF
          if (peek < text.size()) {
            std::size_t p2 = peek;
            boundary = is_space(decode_utf8(text, p2));
          }
        }
        break;
      }
      if (boundary) close_sentence();
    }
  }
  flush_word();
  close_sentence();
  return out;
}

std::vector<std::string> words(std::string_view text) { return tokenize(text).tokens; }

}  // namespace selfpref::text
