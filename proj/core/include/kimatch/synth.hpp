#pragma once

// Seeded synthetic corpora with planted structure, standing in for the
// unavailable social-media data: role-labeled posts, condition-labeled posts
// with category-rate differences, and SS/SP populations whose good matches
// share a latent cluster expressed through category word usage.

#include <cstdint>
#include <string>
#include <vector>

#include "kimatch/knowledge.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/pipeline.hpp"
#include "kimatch/textproc.hpp"

namespace kimatch::synth {

// Neutral words used as filler; none belongs to a shipped lexicon or category.
const std::vector<std::string>& filler_words();

struct RoleCorpusConfig {
  int num_seekers = 1000;
  int num_providers = 10;
  int posts_per_user = 2;
  int words_per_post = 24;
  double marker_rate = 0.3;
  std::uint64_t seed = 0;
};

struct RolePost {
  textproc::Post post;
  int label = 0;  // 1 = SS
};

// SS posts use first-person help-seeking markers, SP posts second-person
// advice markers; everything else is shared filler and condition concepts.
std::vector<RolePost> generate_role_posts(const RoleCorpusConfig& config, const knowledge::Lexicon& anxiety,
                                          const knowledge::Lexicon& depression);

struct ConditionCorpusConfig {
  int num_posts = 1000;
  int words_per_post = 30;
  // Per-token probability of a category word of `planted` in anxiety and depression posts.
  double anxiety_rate = 0.15;
  double depression_rate = 0.05;
  knowledge::Category planted = knowledge::Category::Modals;
  std::uint64_t seed = 0;
};

// Each post carries one anxiety concept or one depression concept (half each).
std::vector<textproc::Post> generate_condition_posts(const ConditionCorpusConfig& config,
                                                     const knowledge::Lexicon& anxiety,
                                                     const knowledge::Lexicon& depression,
                                                     const knowledge::CategoryDictionary& dict);

struct MatchSynthConfig {
  int num_seekers = 900;
  int num_providers = 60;
  int num_clusters = 6;
  int words_per_text = 80;
  // Per-token probability of a category word drawn from the cluster profile.
  double knowledge_rate = 0.2;
  // Per-token probability of one of the cluster's own condition concepts.
  double concept_rate = 0.0;
  int dominant_categories = 2;
  int positives_per_seeker = 2;
  int negatives_per_seeker = 2;
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SyntheticEntity {
  std::string id;
  std::string text;
  int cluster = 0;
  double role_prob = 0.0;
};

struct SyntheticMatchData {
  std::vector<SyntheticEntity> seekers;
  std::vector<SyntheticEntity> providers;
  std::vector<matcher::MatchDataset::Pair> train;
  std::vector<matcher::MatchDataset::Pair> validation;
  std::vector<matcher::MatchDataset::Pair> test;
};

// Labels: 1 iff seeker and provider share a cluster. Seekers are split into
// train/validation/test; providers are shared by all splits. Negatives are
// drawn uniformly from providers of other clusters.
SyntheticMatchData generate_match_data(const MatchSynthConfig& config, const knowledge::CategoryDictionary& dict,
                                       const knowledge::Lexicon& anxiety, const knowledge::Lexicon& depression);

// Runs every entity text through the feature pipeline.
matcher::MatchDataset to_dataset(const SyntheticMatchData& data, const pipeline::Resources& resources);

// Held-out (SS, matching SP, non-matching SP) triples from the test split.
std::vector<matcher::Triple> test_triples(const SyntheticMatchData& data, const matcher::MatchDataset& dataset,
                                          const matcher::AblationFlags& flags, std::uint64_t seed);

}  // namespace kimatch::synth
