#include "kimatch/synth.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "kimatch/error.hpp"
#include "kimatch/random.hpp"

namespace kimatch::synth {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the",     "a",       "and",     "of",      "to",      "in",       "on",      "at",      "with",
      "it",      "this",    "that",    "was",     "is",      "are",      "been",    "just",    "really",
      "also",    "very",    "some",    "thing",   "things",  "stuff",    "lot",     "bit",     "day",
      "week",    "month",   "morning", "evening", "weekend", "place",    "city",    "street",  "car",
      "phone",   "computer", "email",  "news",    "story",   "post",     "thread",  "reddit",  "sub",
      "update",  "edit",    "long",    "short",   "big",     "small",    "old",     "new",     "same",
      "different", "other", "around",  "about",   "over",    "under",    "again",   "still",   "already",
      "even",    "though",  "anyway",  "pretty",  "quite",   "kind",     "sort",    "way",     "part",
      "whole",   "half",    "few",     "many",    "much",    "more",     "most",    "less",    "every",
      "each",    "another", "here",    "there",   "where",   "when",     "while",   "since",   "until",
      "before",  "during",  "into",    "onto",    "from",    "out",      "up",      "down",    "off",
      "through", "across",  "between", "near",    "far",     "outside",  "inside",  "window", "door",
      "table",   "chair",   "book",    "movie",   "show",    "game",     "song",    "weather", "rain",
      "snow",    "coffee",  "tea",     "dog",     "cat",     "garden",   "yard",    "kitchen", "office"};
  return words;
}

namespace {

const std::vector<std::string> kSeekerMarkers{"i need help", "i feel", "i am struggling", "i can't cope",
                                              "please help me", "i don't know what to do", "my life",
                                              "i am so", "help me", "i keep"};
const std::vector<std::string> kProviderMarkers{"you should try", "it helps to", "i recommend",
                                                "reach out to", "you are not alone", "in my experience",
                                                "you can", "your doctor", "have you tried", "take care of yourself"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

std::string join_sentences(const std::vector<std::string>& pieces, Rng& rng) {
  std::string text;
  int since_stop = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!text.empty()) text += ' ';
    text += pieces[i];
    if (++since_stop >= 8 && rng.bernoulli(0.2) && i + 1 < pieces.size()) {
      text += '.';
      since_stop = 0;
    }
  }
  return text + '.';
}

std::vector<std::string> concept_texts(const knowledge::Lexicon& lex) {
  std::vector<std::string> out;
  for (const auto& c : lex.concepts()) out.push_back(c.text);
  return out;
}

std::vector<std::string> category_words(const knowledge::CategoryDictionary& dict, knowledge::Category c) {
  std::vector<std::string> out;
  for (const auto& p : dict.phrases(c).concepts()) out.push_back(p.text);
  if (out.empty())
    throw Error(ErrorCode::InvalidArgument, "category " + std::string(knowledge::to_string(c)) + " is empty");
  return out;
}

}  // namespace

std::vector<RolePost> generate_role_posts(const RoleCorpusConfig& config, const knowledge::Lexicon& anxiety,
                                          const knowledge::Lexicon& depression) {
  Rng rng(config.seed);
  const auto anx = concept_texts(anxiety);
  const auto dep = concept_texts(depression);
  const auto& filler = filler_words();

  std::vector<RolePost> out;
  const int users = config.num_seekers + config.num_providers;
  for (int u = 0; u < users; ++u) {
    const bool seeker = u < config.num_seekers;
    const auto& markers = seeker ? kSeekerMarkers : kProviderMarkers;
    const std::string user = (seeker ? "ss" : "sp") + std::to_string(u);
    for (int k = 0; k < config.posts_per_user; ++k) {
      std::vector<std::string> pieces{pick(rng, markers)};
      for (int w = 1; w < config.words_per_post; ++w) {
        const double r = rng.uniform();
        if (r < config.marker_rate) pieces.push_back(pick(rng, markers));
        else if (r < config.marker_rate + 0.08) pieces.push_back(pick(rng, rng.bernoulli(0.5) ? anx : dep));
        else pieces.push_back(pick(rng, filler));
      }
      out.push_back({textproc::make_post(user + "-" + std::to_string(k), user, 1600000000 + u * 100 + k,
                                         join_sentences(pieces, rng)),
                     seeker ? 1 : 0});
    }
  }
  return out;
}

std::vector<textproc::Post> generate_condition_posts(const ConditionCorpusConfig& config,
                                                     const knowledge::Lexicon& anxiety,
                                                     const knowledge::Lexicon& depression,
                                                     const knowledge::CategoryDictionary& dict) {
  Rng rng(config.seed);
  const auto anx = concept_texts(anxiety);
  const auto dep = concept_texts(depression);
  const auto planted = category_words(dict, config.planted);
  const auto& filler = filler_words();

  std::vector<textproc::Post> out;
  for (int i = 0; i < config.num_posts; ++i) {
    const bool is_anxiety = i % 2 == 0;
    const double rate = is_anxiety ? config.anxiety_rate : config.depression_rate;
    std::vector<std::string> pieces{pick(rng, is_anxiety ? anx : dep)};
    for (int w = 1; w < config.words_per_post; ++w)
      pieces.push_back(rng.bernoulli(rate) ? pick(rng, planted) : pick(rng, filler));
    std::swap(pieces[0], pieces[rng.index(pieces.size())]);
    out.push_back(textproc::make_post("c" + std::to_string(i), "u" + std::to_string(i), 1600000000 + i,
                                      join_sentences(pieces, rng)));
  }
  return out;
}

SyntheticMatchData generate_match_data(const MatchSynthConfig& config, const knowledge::CategoryDictionary& dict,
                                       const knowledge::Lexicon& anxiety, const knowledge::Lexicon& depression) {
  if (config.num_seekers < 3 || config.num_providers < config.num_clusters || config.num_clusters < 2)
    throw Error(ErrorCode::InvalidArgument, "synthetic match data needs >= 3 seekers and >= 1 provider per cluster");
  if (config.dominant_categories < 1 || config.dominant_categories > static_cast<int>(knowledge::kCategoryCount))
    throw Error(ErrorCode::InvalidArgument, "dominant_categories out of range");
  Rng rng(config.seed);

  std::array<std::vector<std::string>, knowledge::kCategoryCount> words;
  for (std::size_t c = 0; c < knowledge::kCategoryCount; ++c)
    words[c] = category_words(dict, static_cast<knowledge::Category>(c));
  std::vector<std::string> concepts = concept_texts(anxiety);
  for (const auto& c : concept_texts(depression)) concepts.push_back(c);
  const auto& filler = filler_words();

  // Cluster profiles: a few dominant categories with weight 1, the rest 0.1.
  struct Profile {
    std::array<double, knowledge::kCategoryCount> cdf{};
    std::vector<std::string> concepts;
  };
  std::vector<Profile> profiles(static_cast<std::size_t>(config.num_clusters));
  for (auto& p : profiles) {
    std::array<std::size_t, knowledge::kCategoryCount> idx{};
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    std::array<double, knowledge::kCategoryCount> w{};
    w.fill(0.1);
    for (int d = 0; d < config.dominant_categories; ++d) w[idx[static_cast<std::size_t>(d)]] = 1.0;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double acc = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) p.cdf[c] = (acc += w[c] / total);
    p.concepts = {pick(rng, concepts), pick(rng, concepts)};
  }

  auto make_text = [&](const Profile& p) {
    std::vector<std::string> pieces;
    for (int w = 0; w < config.words_per_text; ++w) {
      const double r = rng.uniform();
      if (r < config.knowledge_rate) {
        const double u = rng.uniform();
        std::size_t c = 0;
        while (c + 1 < p.cdf.size() && u >= p.cdf[c]) ++c;
        pieces.push_back(pick(rng, words[c]));
      } else if (r < config.knowledge_rate + config.concept_rate) {
        pieces.push_back(pick(rng, p.concepts));
      } else {
        pieces.push_back(pick(rng, filler));
      }
    }
    return join_sentences(pieces, rng);
  };

  SyntheticMatchData out;
  for (int i = 0; i < config.num_providers; ++i) {
    const int cluster = i % config.num_clusters;
    out.providers.push_back({"sp" + std::to_string(i), make_text(profiles[static_cast<std::size_t>(cluster)]),
                             cluster, rng.uniform(0.0, 0.3)});
  }
  for (int i = 0; i < config.num_seekers; ++i) {
    const int cluster = static_cast<int>(rng.index(static_cast<std::uint64_t>(config.num_clusters)));
    out.seekers.push_back({"ss" + std::to_string(i), make_text(profiles[static_cast<std::size_t>(cluster)]),
                           cluster, rng.uniform(0.7, 1.0)});
  }

  std::vector<std::vector<int>> by_cluster(static_cast<std::size_t>(config.num_clusters));
  for (int i = 0; i < config.num_providers; ++i)
    by_cluster[static_cast<std::size_t>(out.providers[static_cast<std::size_t>(i)].cluster)].push_back(i);

  std::vector<int> order(static_cast<std::size_t>(config.num_seekers));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const auto n_train = static_cast<std::size_t>(config.train_fraction * config.num_seekers);
  const auto n_val = static_cast<std::size_t>(config.validation_fraction * config.num_seekers);

  for (std::size_t k = 0; k < order.size(); ++k) {
    const int ss = order[k];
    const int cluster = out.seekers[static_cast<std::size_t>(ss)].cluster;
    auto& split = k < n_train ? out.train : k < n_train + n_val ? out.validation : out.test;
    const auto& same = by_cluster[static_cast<std::size_t>(cluster)];
    for (int j = 0; j < config.positives_per_seeker; ++j) split.push_back({ss, pick(rng, same), 1});
    for (int j = 0; j < config.negatives_per_seeker; ++j) {
      int sp = 0;
      do {
        sp = static_cast<int>(rng.index(static_cast<std::uint64_t>(config.num_providers)));
      } while (out.providers[static_cast<std::size_t>(sp)].cluster == cluster);
      split.push_back({ss, sp, 0});
    }
  }
  return out;
}

matcher::MatchDataset to_dataset(const SyntheticMatchData& data, const pipeline::Resources& resources) {
  matcher::MatchDataset ds;
  for (const auto& e : data.seekers) ds.seekers.push_back(resources.input_parts(e.text, e.role_prob));
  for (const auto& e : data.providers) ds.providers.push_back(resources.input_parts(e.text, e.role_prob));
  ds.train = data.train;
  ds.validation = data.validation;
  ds.test = data.test;
  return ds;
}

std::vector<matcher::Triple> test_triples(const SyntheticMatchData& data, const matcher::MatchDataset& dataset,
                                          const matcher::AblationFlags& flags, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<matcher::Triple> out;
  std::vector<int> seen;
  for (const auto& p : data.test) {
    if (std::find(seen.begin(), seen.end(), p.ss) != seen.end()) continue;
    seen.push_back(p.ss);
    const int cluster = data.seekers[static_cast<std::size_t>(p.ss)].cluster;
    std::vector<int> pos, neg;
    for (std::size_t i = 0; i < data.providers.size(); ++i)
      (data.providers[i].cluster == cluster ? pos : neg).push_back(static_cast<int>(i));
    const int sp = pick(rng, pos);
    const int sp_bar = pick(rng, neg);
    out.push_back({matcher::build_input(dataset.seekers[static_cast<std::size_t>(p.ss)], flags),
                   matcher::build_input(dataset.providers[static_cast<std::size_t>(sp)], flags),
                   matcher::build_input(dataset.providers[static_cast<std::size_t>(sp_bar)], flags)});
  }
  return out;
}

}  // namespace kimatch::synth
