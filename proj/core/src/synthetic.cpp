#include "selfpref/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "selfpref/error.hpp"
#include "selfpref/random.hpp"
#include "selfpref/tokenize.hpp"

namespace selfpref {

namespace {

constexpr std::array<const char*, 24> kCategories = {
    "Accountant", "Advocate",  "Agriculture",     "Apparel",          "Arts",
    "Automobile", "Aviation",  "Banking",         "BPO",              "Business-Development",
    "Chef",       "Construction", "Consultant",   "Designer",         "Digital-Media",
    "Engineering", "Finance",  "Fitness",         "Healthcare",       "HR",
    "Information-Technology", "Public-Relations", "Sales",            "Teacher"};

constexpr std::array<const char*, 10> kHumanOpeners = {
    "Hard working", "Experienced", "Dedicated", "Reliable", "Motivated",
    "Detail oriented", "Friendly", "Organized", "Skilled", "Energetic"};

constexpr std::array<const char*, 10> kHumanDuties = {
    "handled daily operations and reports",
    "worked with customers and vendors on orders",
    "kept records up to date and fixed problems",
    "trained new staff and helped the team",
    "made schedules and tracked budgets",
    "answered calls and emails from clients",
    "prepared documents for managers",
    "checked quality and safety of the work",
    "ran meetings and followed up on tasks",
    "used spreadsheets and company software"};

constexpr std::array<const char*, 8> kHumanClosers = {
    "Looking for a new role where I can grow.",
    "Good with people and deadlines.",
    "Willing to learn new things.",
    "Able to work alone or in a team.",
    "I take pride in doing the job right.",
    "Available for full time work.",
    "Strong work ethic and good attendance.",
    "Comfortable with changing priorities."};

constexpr std::array<const char*, 12> kModelAdjectives = {
    "results-driven", "strategic", "accomplished", "innovative", "versatile", "dynamic",
    "proactive", "data-informed", "collaborative", "meticulous", "forward-thinking", "adaptable"};

constexpr std::array<const char*, 12> kModelClaims = {
    "a proven track record of streamlining operations and elevating team performance",
    "extensive expertise in cross-functional collaboration and stakeholder engagement",
    "demonstrated success in optimizing workflows to deliver measurable outcomes",
    "a strong foundation in process improvement and continuous learning",
    "deep experience leveraging technology to drive efficiency and growth",
    "a commitment to excellence, integrity, and exceptional client service",
    "exceptional communication skills and a keen eye for detail",
    "hands-on experience leading initiatives from concept through execution",
    "a passion for mentoring colleagues and fostering inclusive teams",
    "robust analytical skills that translate complex data into clear decisions",
    "a history of exceeding targets in fast-paced environments",
    "the ability to align daily execution with long-term organizational goals"};

constexpr std::array<const char*, 6> kModelClosers = {
    "Eager to contribute these strengths to a forward-looking organization.",
    "Poised to deliver impactful results in a challenging new role.",
    "Committed to driving sustainable success and operational excellence.",
    "Ready to bring a solutions-oriented mindset to a dynamic team.",
    "Seeking to leverage this expertise to create lasting value.",
    "Dedicated to continuous improvement and meaningful collaboration."};

template <typename A>
const char* pick(const A& arr, Engine& eng) {
  return arr[static_cast<std::size_t>(uniform_index(eng, arr.size()))];
}

std::string category_noun(const std::string& category) {
  std::string out;
  for (char c : category) out.push_back(c == '-' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string with_article(const std::string& word) {
  const bool vowel = std::string("aeiou").find(word[0]) != std::string::npos;
  return (vowel ? "an " : "a ") + word;
}

std::size_t word_count(const std::string& s) { return text::words(s).size(); }

// Appends sentences from `next` until the text reaches at least `min_words`,
// never exceeding `max_words`.
template <typename Next>
std::string fill_words(std::string text, std::size_t min_words, std::size_t max_words, Next next) {
  for (int guard = 0; word_count(text) < min_words && guard < 32; ++guard) {
    const std::string s = next();
    if (word_count(text) + word_count(s) > max_words) continue;
    text += " " + s;
  }
  return text;
}

std::string human_summary(Engine& eng, const std::string& category, int years) {
  const std::string field = category_noun(category);
  std::string text = std::string(pick(kHumanOpeners, eng)) + " " + field + " worker with " +
                     std::to_string(years) + " years of experience.";
  text = fill_words(text, 30, 70, [&] {
    return std::string("In past jobs I ") + pick(kHumanDuties, eng) + ".";
  });
  return text + " " + pick(kHumanClosers, eng);
}

std::string human_body(Engine& eng, const std::string& category, int years) {
  std::ostringstream b;
  const std::string field = category_noun(category);
  b << "Experience\n";
  const int jobs = 2 + static_cast<int>(uniform_index(eng, 2));
  for (int j = 0; j < jobs; ++j) {
    b << field << " position, " << (1 + uniform_index(eng, static_cast<std::uint64_t>(years) + 1))
      << " years. Responsibilities: " << pick(kHumanDuties, eng) << "; " << pick(kHumanDuties, eng)
      << ".\n";
  }
  b << "Skills\n" << field << " practice, scheduling, reporting, customer service\n";
  b << "Education\nDiploma in " << field << " studies";
  return b.str();
}

}  // namespace

std::vector<std::string> synthetic_categories(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < kCategories.size()) {
      out.emplace_back(kCategories[i]);
    } else {
      out.push_back("Category-" + std::to_string(i + 1));
    }
  }
  return out;
}

std::string synthetic_rewrite(const Resume& origin, const std::string& model, std::uint64_t seed) {
  Engine eng = make_engine(derive_seed(derive_seed(seed, origin.id), model));
  // Each model leans on its own subset of the register.
  Engine style = make_engine(derive_seed(fnv1a64(model), std::string_view("style")));
  std::vector<std::size_t> adj(kModelAdjectives.size());
  for (std::size_t k = 0; k < adj.size(); ++k) adj[k] = k;
  shuffle(adj, style);
  adj.resize(4);

  const std::string field = category_noun(origin.category);
  std::string text = with_article(kModelAdjectives[adj[uniform_index(eng, adj.size())]]) + " " +
                     field + " professional with " + pick(kModelClaims, eng) + ".";
  text[0] = 'A';
  text = fill_words(text, 30, 66, [&] {
    return std::string("Brings ") + pick(kModelClaims, eng) + ", complemented by " +
           with_article(kModelAdjectives[adj[uniform_index(eng, adj.size())]]) + " approach.";
  });
  return text + " " + pick(kModelClosers, eng);
}

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusOptions& options) {
  if (options.per_category == 0 || options.categories == 0) {
    throw ValidationError("synthetic corpus needs categories and resumes per category");
  }
  SyntheticCorpus out;
  for (const auto& category : synthetic_categories(options.categories)) {
    for (std::size_t k = 0; k < options.per_category; ++k) {
      char idbuf[96];
      std::snprintf(idbuf, sizeof idbuf, "%s-%04zu", category.c_str(), k + 1);
      Engine eng = make_engine(derive_seed(options.seed, std::string_view(idbuf)));
      const int years = 1 + static_cast<int>(uniform_index(eng, 20));
      Resume r;
      r.id = idbuf;
      r.category = category;
      r.summary = human_summary(eng, category, years);
      r.body = human_body(eng, category, years);
      r.source = Source::human();
      r.origin_id = r.id;
      const double q = standard_normal(eng);
      out.quality[r.id] = q;
      out.store.add(r);
      for (const auto& model : options.models) {
        out.store.add(splice_summary(r, synthetic_rewrite(r, model, options.seed), model));
      }
    }
  }
  extend_quality(out.quality, out.store, options.counterfactual_quality_sd, options.seed);
  return out;
}

void extend_quality(QualityMap& quality, const ResumeStore& store, double sd, std::uint64_t seed) {
  for (const auto& r : store.all()) {
    if (r.source.is_human()) continue;
    auto origin = quality.find(r.origin_id);
    if (origin == quality.end()) continue;
    Engine eng = make_engine(derive_seed(derive_seed(seed, r.id), std::string_view("quality")));
    quality[r.id] = origin->second + sd * standard_normal(eng);
  }
}

}  // namespace selfpref
