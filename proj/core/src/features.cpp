#include "kimatch/features.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "kimatch/error.hpp"

namespace kimatch::features {

namespace {

template <std::size_t N>
std::array<double, N> coverage(const std::vector<std::string>& tokens,
                               const knowledge::CategoryDictionary& dict,
                               const std::array<knowledge::Category, N>& categories) {
  std::array<double, N> out{};
  std::size_t words = 0;
  for (const auto& t : tokens)
    if (!textproc::is_sentence_boundary(t)) ++words;
  if (words == 0) return out;
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t covered = 0;
    for (const auto& m : dict.phrases(categories[i]).match(tokens)) covered += m.end - m.begin;
    out[i] = static_cast<double>(covered) / static_cast<double>(words);
  }
  return out;
}

}  // namespace

std::array<double, 6> psy_vector(const std::vector<std::string>& tokens,
                                 const knowledge::CategoryDictionary& dict) {
  return coverage(tokens, dict, knowledge::kPsyCategories);
}

std::array<double, 3> covid_vector(const std::vector<std::string>& tokens,
                                   const knowledge::CategoryDictionary& dict) {
  return coverage(tokens, dict, knowledge::kCovidCategories);
}

double emotion_score(const std::vector<std::string>& tokens, const knowledge::EmotionScale& scale) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (const auto s = scale.score(t)) {
      sum += *s;
      ++n;
    }
  }
  return n == 0 ? scale.neutral() : sum / static_cast<double>(n);
}

FeatureVector extract(const std::vector<std::string>& tokens, const knowledge::CategoryDictionary& dict,
                      const knowledge::EmotionScale& scale) {
  FeatureVector f;
  f.psy = psy_vector(tokens, dict);
  f.covid = covid_vector(tokens, dict);
  f.emotion = emotion_score(tokens, scale);
  return f;
}

FeatureVector average(std::span<const FeatureVector> vectors) {
  FeatureVector out;
  if (vectors.empty()) return out;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < 6; ++i) out.psy[i] += v.psy[i];
    for (std::size_t i = 0; i < 3; ++i) out.covid[i] += v.covid[i];
    out.emotion += v.emotion;
    out.role_prob += v.role_prob;
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& x : out.psy) x /= n;
  for (auto& x : out.covid) x /= n;
  out.emotion /= n;
  out.role_prob /= n;
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "pearson: length mismatch");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateColumn, "zero-variance column");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

namespace {

struct Column {
  std::string name;
  std::vector<double> values;
};

}  // namespace

CorrelationTable correlate(std::span<const textproc::Post> posts, std::span<const FeatureVector> features,
                           double alpha) {
  if (posts.size() != features.size())
    throw Error(ErrorCode::DimensionMismatch, "correlate: posts and features differ in length");

  // Process posts in a canonical order so the floating-point sums, and hence
  // the table, do not depend on the caller's ordering.
  std::vector<std::size_t> order(posts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (posts[a].id != posts[b].id) return posts[a].id < posts[b].id;
    return a < b;
  });

  std::vector<Column> cols;
  for (auto c : knowledge::kPsyCategories) cols.push_back({std::string(knowledge::to_string(c)), {}});
  for (auto c : knowledge::kCovidCategories) cols.push_back({std::string(knowledge::to_string(c)), {}});
  cols.push_back({"Emotion", {}});
  for (std::size_t e = 0; e < textproc::kEventCount; ++e)
    cols.push_back({std::string(textproc::to_string(static_cast<textproc::Event>(e))), {}});

  std::vector<double> label_d, label_a;
  for (std::size_t i : order) {
    const auto& f = features[i];
    const auto& tags = posts[i].tags;
    std::size_t k = 0;
    for (double v : f.psy) cols[k++].values.push_back(v);
    for (double v : f.covid) cols[k++].values.push_back(v);
    cols[k++].values.push_back(f.emotion);
    for (std::size_t e = 0; e < textproc::kEventCount; ++e)
      cols[k++].values.push_back(tags.events.contains(static_cast<textproc::Event>(e)) ? 1.0 : 0.0);
    label_d.push_back(tags.conditions.contains(textproc::Condition::Depression) ? 1.0 : 0.0);
    label_a.push_back(tags.conditions.contains(textproc::Condition::Anxiety) ? 1.0 : 0.0);
  }

  for (const auto* label : {&label_d, &label_a}) {
    const auto positives = static_cast<std::size_t>(std::count(label->begin(), label->end(), 1.0));
    if (positives < 2 || label->size() - positives < 2)
      throw Error(ErrorCode::InvalidArgument,
                  "correlate needs at least two posts with and without each condition");
  }

  CorrelationTable table;
  table.alpha = alpha;
  const std::array<std::pair<char, const std::vector<double>*>, 2> labels{{{'D', &label_d}, {'A', &label_a}}};
  for (const auto& col : cols) {
    for (const auto& [cond, label] : labels) {
      try {
        Correlation c;
        c.feature = col.name;
        c.condition = cond;
        c.r = pearson(col.values, *label);
        c.p = correlation_p_value(c.r, col.values.size());
        table.rows.push_back(c);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateColumn) throw;
        table.degenerate.emplace_back(col.name, cond);
      }
    }
  }
  table.adjusted_alpha = table.rows.empty() ? alpha : alpha / static_cast<double>(table.rows.size());
  for (auto& c : table.rows) {
    c.raw_significant = c.p < alpha;
    c.bonferroni_significant = c.p < table.adjusted_alpha;
  }
  return table;
}

void write_csv(std::ostream& out, const CorrelationTable& table) {
  out << "feature,condition,r,p,raw_significant,bonferroni_significant\n";
  out << std::setprecision(10);
  for (const auto& c : table.rows)
    out << c.feature << ',' << c.condition << ',' << c.r << ',' << c.p << ','
        << (c.raw_significant ? "true" : "false") << ',' << (c.bonferroni_significant ? "true" : "false")
        << '\n';
}

std::set<std::string> concept_footprint(std::span<const textproc::Post> posts,
                                        const knowledge::Lexicon& lexicon) {
  std::set<std::string> out;
  for (const auto& p : posts) {
    const auto tokens = p.tokens.empty() ? textproc::tokenize(p.text) : p.tokens;
    for (const auto& m : knowledge::match_concepts(tokens, lexicon)) out.insert(m.concept_text);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Overlap concept_overlap(std::span<const textproc::Post> ss_posts, std::span<const textproc::Post> sp_posts,
                        const knowledge::Lexicon& anxiety, const knowledge::Lexicon& depression) {
  if (ss_posts.empty() || sp_posts.empty())
    throw Error(ErrorCode::InvalidArgument, "concept_overlap needs SS and SP posts");
  Overlap o;
  o.o = jaccard(concept_footprint(ss_posts, anxiety), concept_footprint(sp_posts, anxiety)) +
        jaccard(concept_footprint(ss_posts, depression), concept_footprint(sp_posts, depression));
  o.percent = o.o / 2.0 * 100.0;
  return o;
}

}  // namespace kimatch::features
