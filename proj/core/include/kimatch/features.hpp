#pragma once

// Per-post feature vectors (psycholinguistic, COVID-19 ADL/equipment,
// emotion), point-biserial correlation of features against condition labels,
// and the SS/SP concept-overlap metric.

#include <array>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kimatch/knowledge.hpp"
#include "kimatch/textproc.hpp"

namespace kimatch::features {

// Layout: psy = {Emotional, Social, Biological, Cognitive, FocusFuture, Modals},
// covid = {InstADL, BasicADL, Equipment}. role_prob is filled by the role model.
struct FeatureVector {
  std::array<double, 6> psy{};
  std::array<double, 3> covid{};
  double emotion = 0.0;
  double role_prob = 0.0;

  bool operator==(const FeatureVector&) const = default;
};

// Fraction of word tokens covered by each category's phrases (longest match).
// Sentence punctuation is ignored; no words gives all zeros.
std::array<double, 6> psy_vector(const std::vector<std::string>& tokens,
                                 const knowledge::CategoryDictionary& dict);
std::array<double, 3> covid_vector(const std::vector<std::string>& tokens,
                                   const knowledge::CategoryDictionary& dict);

// Mean score of covered words; the scale's neutral value when none is covered.
double emotion_score(const std::vector<std::string>& tokens, const knowledge::EmotionScale& scale);

FeatureVector extract(const std::vector<std::string>& tokens, const knowledge::CategoryDictionary& dict,
                      const knowledge::EmotionScale& scale);

// Element-wise mean, used for user-level vectors. Empty input gives zeros.
FeatureVector average(std::span<const FeatureVector> vectors);

struct Correlation {
  std::string feature;
  char condition = 'D';  // 'D' depression, 'A' anxiety
  double r = 0.0;
  double p = 1.0;
  bool raw_significant = false;
  bool bonferroni_significant = false;
};

struct CorrelationTable {
  std::vector<Correlation> rows;
  // (feature, condition) pairs skipped because a column had zero variance.
  std::vector<std::pair<std::string, char>> degenerate;
  double alpha = 0.05;
  double adjusted_alpha = 0.05;  // alpha / number of tests
};

// Pearson correlation; throws DegenerateColumn when either side is constant and
// DimensionMismatch on unequal lengths.
double pearson(std::span<const double> x, std::span<const double> y);

// Two-sided p-value of a correlation from the t distribution with n - 2
// degrees of freedom.
double correlation_p_value(double r, std::size_t n);

// Feature columns: the 6 psy, 3 covid, "Emotion", then one indicator per event.
// Labels: Depression ('D') and Anxiety ('A') membership. Requires at least two
// posts with and two without each label (InvalidArgument otherwise).
CorrelationTable correlate(std::span<const textproc::Post> posts, std::span<const FeatureVector> features,
                           double alpha = 0.05);

void write_csv(std::ostream& out, const CorrelationTable& table);

// Concepts of `lexicon` found in any of the posts.
std::set<std::string> concept_footprint(std::span<const textproc::Post> posts,
                                        const knowledge::Lexicon& lexicon);

// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct Overlap {
  double o = 0.0;        // in [0, 2]
  double percent = 0.0;  // o / 2 * 100
};

Overlap concept_overlap(std::span<const textproc::Post> ss_posts, std::span<const textproc::Post> sp_posts,
                        const knowledge::Lexicon& anxiety, const knowledge::Lexicon& depression);

}  // namespace kimatch::features
