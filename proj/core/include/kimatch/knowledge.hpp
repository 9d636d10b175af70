#pragma once

// Domain lexicons (anxiety, depression, COVID-19 events), the categorized
// word dictionary behind psycholinguistic and ADL features, and the word
// happiness scale. All types are immutable after load.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kimatch::knowledge {

// Case-fold, collapse whitespace, drop punctuation. Idempotent.
std::string normalize_phrase(std::string_view phrase);

struct Concept {
  std::string text;  // normalized, tokens joined by single spaces
  std::vector<std::string> tokens;

  bool operator==(const Concept&) const = default;
};

struct ConceptMatch {
  std::string concept_text;
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;

  bool operator==(const ConceptMatch&) const = default;
};

// De-duplicated set of normalized multiword phrases with longest-match lookup.
class PhraseSet {
 public:
  // Returns false when the phrase normalizes to nothing or is a duplicate.
  bool add(std::string_view phrase);

  bool contains(std::string_view normalized_text) const;
  std::size_t size() const { return concepts_.size(); }
  bool empty() const { return concepts_.empty(); }
  const std::vector<Concept>& concepts() const { return concepts_; }

  // Left to right; at each position the longest phrase wins and the scan
  // resumes after it, so reported spans never overlap.
  std::vector<ConceptMatch> match(const std::vector<std::string>& tokens) const;

 private:
  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> by_text_;
  // First token -> concept indices, longest first.
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
};

class Lexicon {
 public:
  Lexicon(std::string name, PhraseSet phrases);

  const std::string& name() const { return name_; }
  const std::vector<Concept>& concepts() const { return phrases_.concepts(); }
  std::size_t size() const { return phrases_.size(); }
  bool contains(std::string_view phrase) const;
  const PhraseSet& phrases() const { return phrases_; }

  bool operator==(const Lexicon& other) const {
    return name_ == other.name_ && concepts() == other.concepts();
  }

 private:
  std::string name_;
  PhraseSet phrases_;
};

// Accepts line-oriented text (one concept per line, '#' comments) or JSON:
// either {"name": str, "concepts": [str]} or a bare array of strings.
// `default_name` names text and bare-array sources.
// Throws FormatError on malformed input and EmptyLexicon when nothing is left.
Lexicon parse_lexicon(std::string_view source, std::string_view default_name = "lexicon");
Lexicon load_lexicon_file(const std::string& path);

// JSON form; parse_lexicon(serialize_lexicon(l)) == l.
std::string serialize_lexicon(const Lexicon& lexicon);

std::vector<ConceptMatch> match_concepts(const std::vector<std::string>& tokens,
                                         const Lexicon& lexicon);

enum class Category {
  Emotional,
  Social,
  Biological,
  Cognitive,
  FocusFuture,
  Modals,
  InstADL,
  BasicADL,
  Equipment,
};

inline constexpr std::size_t kCategoryCount = 9;
inline constexpr std::array<Category, 6> kPsyCategories{
    Category::Emotional, Category::Social,      Category::Biological,
    Category::Cognitive, Category::FocusFuture, Category::Modals};
inline constexpr std::array<Category, 3> kCovidCategories{Category::InstADL, Category::BasicADL,
                                                          Category::Equipment};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

class CategoryDictionary {
 public:
  explicit CategoryDictionary(std::array<PhraseSet, kCategoryCount> categories);

  const PhraseSet& phrases(Category c) const { return categories_[static_cast<std::size_t>(c)]; }
  // Categories containing the (normalized) word or phrase.
  std::vector<Category> categories_of(std::string_view phrase) const;
  bool empty() const;

 private:
  std::array<PhraseSet, kCategoryCount> categories_;
};

// JSON {"categories": {name: [str]}}; every category must be present.
CategoryDictionary load_category_dictionary(std::string_view source);
CategoryDictionary load_category_dictionary_file(const std::string& path);

class EmotionScale {
 public:
  EmotionScale(double min, double max, double neutral,
               std::unordered_map<std::string, double> scores);

  double min() const { return min_; }
  double max() const { return max_; }
  double neutral() const { return neutral_; }
  std::optional<double> score(std::string_view word) const;
  std::size_t size() const { return scores_.size(); }

 private:
  double min_;
  double max_;
  double neutral_;
  std::unordered_map<std::string, double> scores_;
};

// TSV `word<TAB>score`. An optional first line `# min=1 max=9 neutral=5`
// declares the scale; without it the scale is 1..9 with neutral 5.
EmotionScale load_emotion_scale(std::string_view source);
EmotionScale load_emotion_scale_file(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace kimatch::knowledge
