#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selfpref/error.hpp"
#include "selfpref/textmetrics.hpp"

namespace selfpref::text {

Lexicon::Lexicon(std::map<std::string, std::vector<std::string>> categories)
    : raw_(std::move(categories)) {
  for (const auto& [name, patterns] : raw_) {
    if (name.empty()) throw ValidationError("lexicon category name must be non-empty");
    if (patterns.empty()) throw ValidationError("lexicon category '" + name + "' is empty");
    Patterns p;
    for (const auto& pat : patterns) {
      if (pat.empty() || pat == "*") {
        throw ValidationError("lexicon category '" + name + "' has an empty pattern");
      }
      const bool lower = std::none_of(pat.begin(), pat.end(),
                                      [](unsigned char c) { return c >= 'A' && c <= 'Z'; });
      if (!lower) {
        throw ValidationError("lexicon pattern '" + pat + "' in '" + name + "' is not lowercase");
      }
      if (pat.back() == '*') {
        p.prefixes.push_back(pat.substr(0, pat.size() - 1));
      } else if (pat.front() == '*') {
        p.suffixes.push_back(pat.substr(1));
      } else {
        p.words.push_back(pat);
      }
    }
    std::sort(p.words.begin(), p.words.end());
    compiled_.emplace(name, std::move(p));
  }
}

Lexicon Lexicon::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("lexicon: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("lexicon: expected an object of category -> [patterns]");
  std::map<std::string, std::vector<std::string>> cats;
  for (const auto& [name, list] : doc.items()) {
    if (!list.is_array()) throw ParseError("lexicon: category '" + name + "' must be an array");
    auto& out = cats[name];
    for (const auto& p : list) {
      if (!p.is_string()) throw ParseError("lexicon: category '" + name + "' has a non-string");
      out.push_back(p.get<std::string>());
    }
  }
  return Lexicon(std::move(cats));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string Lexicon::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, patterns] : raw_) doc[name] = patterns;
  return doc.dump(2);
}

bool Lexicon::matches(std::string_view category, std::string_view token) const {
  auto it = compiled_.find(category);
  if (it == compiled_.end()) return false;
  const Patterns& p = it->second;
  if (std::binary_search(p.words.begin(), p.words.end(), token)) return true;
  for (const auto& pre : p.prefixes) {
    if (token.size() >= pre.size() && token.compare(0, pre.size(), pre) == 0) return true;
  }
  for (const auto& suf : p.suffixes) {
    // Suffix heuristics need a stem of at least two letters ("fly" is not an adverb).
    if (token.size() >= suf.size() + 2 &&
        token.compare(token.size() - suf.size(), suf.size(), suf) == 0) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> Lexicon::categories() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : raw_) out.push_back(name);
  return out;
}

Lexicon Lexicon::starter() {
  return Lexicon({
      {"pronoun",
       {"i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves", "you",
        "your", "yours", "yourself", "he", "him", "his", "himself", "she", "her", "hers",
        "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves"}},
      {"i_pronoun", {"i", "me", "my", "mine", "myself"}},
      {"we_pronoun", {"we", "us", "our", "ours", "ourselves"}},
      {"determiner",
       {"a", "an", "the", "this", "that", "these", "those", "each", "every", "either",
        "neither", "another", "such", "which", "whose", "what"}},
      {"preposition",
       {"about", "above", "across", "after", "against", "along", "among", "around", "as",
        "at", "before", "behind", "below", "beneath", "beside", "between", "beyond", "by",
        "despite", "during", "for", "from", "in", "inside", "into", "like", "near", "of",
        "off", "on", "onto", "out", "outside", "over", "per", "since", "through",
        "throughout", "to", "toward", "towards", "under", "until", "upon", "via", "with",
        "within", "without"}},
      {"conjunction",
       {"and", "but", "or", "nor", "so", "yet", "because", "although", "though", "while",
        "whereas", "unless", "if", "whether"}},
      {"auxiliary_verb",
       {"am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
        "do", "does", "did", "will", "would", "shall", "should", "can", "could", "may",
        "might", "must"}},
      {"negation",
       {"no", "not", "never", "none", "nobody", "nothing", "neither", "nor", "without",
        "cannot", "dont", "didnt", "isnt", "wasnt", "wont"}},
      {"quantity",
       {"all", "any", "both", "few", "fewer", "many", "more", "most", "much", "multiple",
        "numerous", "several", "some", "various", "every", "each", "half", "whole",
        "dozens", "hundreds", "thousands", "millions", "one", "two", "three", "four",
        "five", "six", "seven", "eight", "nine", "ten", "twenty", "percent"}},
      {"verb",
       {"*ed", "*ing", "*ize", "*ise", "*ify", "*ate", "manag*", "lead", "leads", "led",
        "develop*", "achiev*", "deliver*", "driv*", "build", "built", "creat*", "oversee*",
        "oversaw", "implement*", "coordinat*", "improv*", "increas*", "reduc*"}},
      {"adjective",
       {"*ive", "*ful", "*ous", "*able", "*ible", "*ic", "*ical", "*less", "*ent", "*ant",
        "strong", "proven", "skilled", "dedicated", "experienced", "excellent", "new",
        "senior", "key"}},
      {"adverb",
       {"*ly", "also", "very", "well", "often", "always", "never", "highly", "quickly",
        "currently", "consistently", "successfully", "effectively"}},
      {"achievement",
       {"accomplish*", "achiev*", "award*", "success*", "excel*", "exceed*", "improv*",
        "win", "won", "record", "proven", "top"}},
      {"certainty",
       {"always", "never", "definitely", "certain*", "clearly", "undoubtedly", "proven",
        "guarantee*", "committed", "confident*"}},
      {"tentative",
       {"maybe", "perhaps", "possibl*", "might", "seem*", "somewhat", "probably", "guess*",
        "hope*", "try", "tried"}},
      {"work",
       {"work*", "job*", "career*", "business*", "client*", "customer*", "project*",
        "team*", "manag*", "employ*", "company", "companies", "professional*",
        "organization*", "staff*", "department*"}},
  });
}

}  // namespace selfpref::text
