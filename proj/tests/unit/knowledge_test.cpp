#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "kimatch/error.hpp"
#include "kimatch/knowledge.hpp"
#include "kimatch/tokenizer.hpp"
#include "test_support.hpp"

using namespace kimatch;
using namespace kimatch::knowledge;

namespace {

// Lowercase, turn punctuation into spaces, collapse whitespace.
std::string oracle_normalize(const std::string& line) {
  std::string s;
  for (char ch : line) {
    const auto c = static_cast<unsigned char>(ch);
    s.push_back(std::isalnum(c) || ch == '\'' ? static_cast<char>(std::tolower(c)) : ' ');
  }
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) out += (out.empty() ? "" : " ") + word;
  return out;
}

// Every (begin, end) span that spells a concept.
std::vector<std::pair<std::size_t, std::size_t>> all_spans(const std::vector<std::string>& tokens,
                                                            const Lexicon& lex) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t b = 0; b < tokens.size(); ++b) {
    std::string joined;
    for (std::size_t e = b; e < tokens.size(); ++e) {
      joined += (e == b ? "" : " ") + tokens[e];
      if (lex.contains(joined)) spans.emplace_back(b, e + 1);
    }
  }
  return spans;
}

}  // namespace

TEST(Knowledge, ParsesAppendixStyleLexicon) {
  const auto lex = parse_lexicon("panic attacks\nagoraphobia\non edge\n", "anxiety");
  EXPECT_EQ(lex.name(), "anxiety");
  ASSERT_EQ(lex.size(), 3u);
  EXPECT_TRUE(lex.contains("panic attacks"));
  EXPECT_TRUE(lex.contains("agoraphobia"));
  EXPECT_TRUE(lex.contains("on edge"));
}

TEST(Knowledge, NormalizationDeduplicates) {
  const auto lex = parse_lexicon("Fear\nfear\nFEAR \n");
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.concepts()[0].text, "fear");
}

TEST(Knowledge, NormalizeIsIdempotent) {
  for (const char* s : {"  Panic   Attacks! ", "Fear-of eating", "on\tedge"}) {
    const auto once = normalize_phrase(s);
    EXPECT_EQ(normalize_phrase(once), once);
  }
  EXPECT_EQ(normalize_phrase("  Panic   Attacks! "), "panic attacks");
}

TEST(Knowledge, FiftyLineFixtureMatchesIndependentCount) {
  std::ostringstream src;
  std::set<std::string> expected;
  for (int i = 0; i < 50; ++i) {
    std::string line;
    if (i % 10 == 0) line = "# comment " + std::to_string(i);
    else if (i % 7 == 0) line = "   ";
    else if (i % 5 == 0) line = "Concept " + std::to_string(i % 20);  // repeats after normalization
    else line = "term" + std::to_string(i) + (i % 3 == 0 ? "  Phrase" : "");
    src << line << "\n";
    if (line.rfind('#', 0) == 0) continue;
    const auto n = oracle_normalize(line);
    if (!n.empty()) expected.insert(n);
  }
  const auto lex = parse_lexicon(src.str());
  EXPECT_EQ(lex.size(), expected.size());
  for (const auto& c : expected) EXPECT_TRUE(lex.contains(c)) << c;
}

TEST(Knowledge, JsonFormsAndRoundTrip) {
  const auto a = parse_lexicon(R"({"name": "dep", "concepts": ["anhedonia", "Low Mood"]})");
  EXPECT_EQ(a.name(), "dep");
  EXPECT_TRUE(a.contains("low mood"));
  const auto b = parse_lexicon(R"(["x", "y z"])", "bare");
  EXPECT_EQ(b.name(), "bare");
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(parse_lexicon(serialize_lexicon(a)), a);
}

TEST(Knowledge, ParseErrors) {
  try {
    parse_lexicon("# only comments\n\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyLexicon);
  }
  try {
    parse_lexicon(R"({"name": "x", "concepts": 3})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
}

TEST(Knowledge, MatchFindsMultiwordConcept) {
  const auto lex = testkit::resources().anxiety();
  const auto matches = match_concepts(textproc::tokenize("having panic attacks daily"), lex);
  ASSERT_EQ(matches.size(), 1u);
  EXPECT_EQ(matches[0], (ConceptMatch{"panic attacks", 1, 3}));
  EXPECT_TRUE(match_concepts({}, lex).empty());
}

TEST(Knowledge, LongestMatchWins) {
  const auto& lex = testkit::resources().anxiety();
  const auto tokens = textproc::tokenize("my fear of eating in public and plain fear");
  const auto matches = match_concepts(tokens, lex);

  // Oracle: greedy left-to-right over all spans keeping the longest at each start.
  const auto spans = all_spans(tokens, lex);
  std::vector<std::pair<std::size_t, std::size_t>> expected;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    std::size_t best = pos;
    for (const auto& [b, e] : spans)
      if (b == pos) best = std::max(best, e);
    if (best > pos) expected.emplace_back(pos, best), pos = best;
    else ++pos;
  }
  ASSERT_EQ(matches.size(), expected.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    EXPECT_EQ(matches[i].begin, expected[i].first);
    EXPECT_EQ(matches[i].end, expected[i].second);
  }
  EXPECT_EQ(matches[0].concept_text, "fear of eating in public");
  EXPECT_EQ(matches.back().concept_text, "fear");
}

TEST(Knowledge, CategoryDictionaryLookups) {
  std::string src = R"({"categories": {)";
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    const auto name = std::string(to_string(static_cast<Category>(i)));
    std::string words = "[\"w" + std::to_string(i) + "\"]";
    if (name == "Modals") words = R"(["will", "will", "might"])";
    if (name == "Social") words = R"(["friend"])";
    src += (i ? "," : "") + ("\"" + name + "\": " + words);
  }
  src += "}}";
  const auto dict = load_category_dictionary(src);
  EXPECT_EQ(dict.categories_of("will"), std::vector<Category>{Category::Modals});
  EXPECT_EQ(dict.categories_of("friend"), std::vector<Category>{Category::Social});
  EXPECT_EQ(dict.phrases(Category::Modals).size(), 2u);
  EXPECT_TRUE(dict.categories_of("unknown").empty());
}

TEST(Knowledge, CategoryDictionaryRequiresEveryCategory) {
  try {
    load_category_dictionary(R"({"categories": {"Emotional": ["sad"]}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
}

TEST(Knowledge, ShippedDictionaryHasNineCategories) {
  const auto& dict = testkit::resources().dictionary();
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    EXPECT_FALSE(dict.phrases(static_cast<Category>(i)).empty()) << to_string(static_cast<Category>(i));
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    const auto c = static_cast<Category>(i);
    EXPECT_EQ(parse_category(to_string(c)), c);
  }
}

TEST(Knowledge, EmotionScaleHeaderAndDefaults) {
  const auto scale = load_emotion_scale("# min=0 max=10 neutral=4\nhappy\t9\nsad\t1.5\n");
  EXPECT_EQ(scale.min(), 0.0);
  EXPECT_EQ(scale.max(), 10.0);
  EXPECT_EQ(scale.neutral(), 4.0);
  EXPECT_EQ(scale.score("sad"), 1.5);
  EXPECT_FALSE(scale.score("table").has_value());

  const auto plain = load_emotion_scale("calm\t6\n");
  EXPECT_EQ(plain.min(), 1.0);
  EXPECT_EQ(plain.max(), 9.0);
  EXPECT_EQ(plain.neutral(), 5.0);
}
