#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kimatch/error.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/random.hpp"

using namespace kimatch;
using namespace kimatch::matcher;

namespace {

MatcherConfig small_config(std::uint64_t seed, Activation act = Activation::Relu) {
  MatcherConfig c;
  c.rep_dim = 4;
  c.conv_filters = 3;
  c.conv_kernel = 3;
  c.conv_stride = 2;
  c.hidden = 6;
  c.activation = act;
  c.seed = seed;
  c.margin = 0.6;  // hinge active for most random negatives
  return c;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

std::vector<MatchExample> random_batch(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<MatchExample> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({random_vector(dim, rng), random_vector(dim, rng), static_cast<int>(i % 2), 0, 0});
  return out;
}

double cos_of(const std::vector<double>& a, const std::vector<double>& b) {
  const double d = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  return d / std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0) *
                       std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
}

// Tiny network: 1 filter (kernel 2, stride 1), 2 hidden units, 2 outputs.
MatchModel hand_model() {
  MatcherConfig c;
  c.conv_filters = 1;
  c.conv_kernel = 2;
  c.conv_stride = 1;
  c.hidden = 2;
  c.rep_dim = 2;
  auto m = init_model(3, c);
  const auto& l = m.layout;
  auto& p = m.params;
  p[l.conv_w] = 1.0, p[l.conv_w + 1] = -1.0, p[l.conv_b] = 0.5;
  p[l.w1] = 1.0, p[l.w1 + 1] = 2.0, p[l.w1 + 2] = -1.0, p[l.w1 + 3] = 1.0;
  p[l.b1] = 0.0, p[l.b1 + 1] = 0.5;
  p[l.w2] = 2.0, p[l.w2 + 1] = 0.0, p[l.w2 + 2] = 1.0, p[l.w2 + 3] = 3.0;
  p[l.b2] = 0.0, p[l.b2 + 1] = 1.0;
  return m;
}

}  // namespace

TEST(BuildInput, BlockLengths) {
  InputParts parts;
  parts.content = std::vector<double>(256, 0.1);
  parts.features = features::FeatureVector{};
  parts.role_prob = 0.7;
  EXPECT_EQ(build_input(parts, parse_flags("content")).size(), 256u);
  EXPECT_EQ(build_input(parts, AblationFlags{}).size(), 266u);
  const auto x = build_input(parts, parse_flags("psy+prob"));
  ASSERT_EQ(x.size(), 7u);
  EXPECT_EQ(x[6], 0.7);
  EXPECT_EQ(input_dim(AblationFlags{}), 266u);
  EXPECT_EQ(input_dim(parse_flags("psy+prob+covid")), 10u);
}

TEST(BuildInput, MissingComponent) {
  InputParts parts;
  parts.features = features::FeatureVector{};
  try {
    build_input(parts, parse_flags("psy+prob"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingComponent);
  }
}

TEST(AblationFlags, NamesRoundTrip) {
  for (const auto& f : standard_ablation()) EXPECT_EQ(parse_flags(f.name()), f);
  EXPECT_EQ(standard_ablation().size(), 4u);
  EXPECT_EQ(AblationFlags{}.name(), "content+psy+prob+covid");
  EXPECT_THROW(parse_flags("content+liwc"), Error);
}

TEST(Forward, HandPropagatedValues) {
  const auto m = hand_model();
  // conv: [1.5, -0.5] -> relu [1.5, 0]; dense1: [1.5, -1.0] -> [1.5, 0]; dense2: [3, 2.5].
  const std::vector<double> x{1, 0, 1};
  const auto y = forward(m, x);
  const double n = std::sqrt(9.0 + 6.25);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_DOUBLE_EQ(y[0], 3.0 / n);
  EXPECT_DOUBLE_EQ(y[1], 2.5 / n);
}

TEST(Forward, UnitNormDeterministicAndChecked) {
  const auto m = init_model(20, small_config(1));
  Rng rng(2);
  const auto x = random_vector(20, rng);
  const auto y = forward(m, x);
  EXPECT_NEAR(std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0)), 1.0, 1e-12);
  EXPECT_EQ(y, forward(init_model(20, small_config(1)), x));
  EXPECT_THROW(forward(m, std::vector<double>(19, 0.0)), Error);
}

TEST(PairLoss, Fixtures) {
  EXPECT_EQ(pair_loss_from_similarity(1.0, 1, 0.2), 0.0);
  EXPECT_NEAR(pair_loss_from_similarity(1.0, 0, 0.2), 0.04, 1e-15);
  EXPECT_EQ(pair_loss_from_similarity(0.8, 0, 0.2), 0.0);
  EXPECT_EQ(pair_loss_from_similarity(-0.3, 0, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(pair_loss_from_similarity(0.5, 1, 0.2), 0.25);
  const auto m = init_model(5, small_config(3));
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_NEAR(pair_loss(m, {x, x, 1}, 0.2), 0.0, 1e-24);
}

TEST(TripletSatisfaction, TrivialCases) {
  const std::vector<Triple> good{{{1, 0}, {1, 0}, {0, 1}}};
  const std::vector<Triple> same{{{1, 0}, {0.5, 0.5}, {0.5, 0.5}}};
  EXPECT_EQ(triplet_satisfaction_raw(good, 1.0), 1.0);
  EXPECT_EQ(triplet_satisfaction_raw(same, 1e-9), 0.0);
  EXPECT_EQ(triplet_satisfaction_raw({}, 0.2), 0.0);
}

TEST(TripletSatisfaction, MatchesPerTripleOracle) {
  const auto m = init_model(12, small_config(4));
  Rng rng(5);
  std::vector<Triple> triples;
  for (int i = 0; i < 100; ++i) triples.push_back({random_vector(12, rng), random_vector(12, rng), random_vector(12, rng)});
  for (double margin : {0.0, 0.1, 0.2, 0.5}) {
    int ok = 0;
    for (const auto& t : triples) {
      const auto a = forward(m, t.ss), p = forward(m, t.sp), n = forward(m, t.sp_bar);
      ok += cos_of(a, p) >= cos_of(a, n) + margin;
    }
    EXPECT_EQ(triplet_satisfaction(m, triples, margin), ok / 100.0) << margin;
  }
}

TEST(GradCheck, RandomReluNetworks) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    const std::size_t dim = 8 + rng.index(8);
    const auto m = init_model(dim, small_config(seed));
    const auto batch = random_batch(6, dim, rng);
    EXPECT_LE(grad_check(m, batch), 1e-4) << seed;
  }
}

TEST(GradCheck, IdentityNetworkPassesTightly) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(200 + seed);
    const auto m = init_model(10, small_config(seed, Activation::Identity));
    const auto batch = random_batch(4, 10, rng);
    EXPECT_LE(grad_check(m, batch, 1e-5), 1e-6) << seed;
  }
}

TEST(GradCheck, EmptyBatch) {
  const auto m = init_model(10, small_config(0));
  EXPECT_EQ(grad_check(m, {}), 0.0);
  EXPECT_EQ(batch_loss(m, {}), 0.0);
  const auto g = batch_gradient(m, {});
  EXPECT_TRUE(std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }));
}

TEST(GradCheck, AnalyticGradientMatchesIndependentDifference) {
  Rng rng(77);
  auto m = init_model(9, small_config(7));
  const auto batch = random_batch(5, 9, rng);
  const auto g = batch_gradient(m, batch);
  const double h = 1e-6;
  for (std::size_t i = 0; i < m.params.size(); i += 7) {
    const double keep = m.params[i];
    m.params[i] = keep + h;
    double up = 0;
    for (const auto& e : batch) up += pair_loss(m, e, m.config.margin);
    m.params[i] = keep - h;
    double down = 0;
    for (const auto& e : batch) down += pair_loss(m, e, m.config.margin);
    m.params[i] = keep;
    const double numeric = (up - down) / (2 * h) / static_cast<double>(batch.size());
    EXPECT_NEAR(g[i], numeric, 1e-6 + 1e-4 * std::abs(numeric)) << i;
  }
}

TEST(PredictMatch, IdenticalAntipodalAndHand) {
  auto lin = init_model(6, small_config(8, Activation::Identity));
  const auto& l = lin.layout;
  // Zero biases make the identity network odd: f(-x) = -f(x).
  std::fill(lin.params.begin() + l.conv_b, lin.params.begin() + l.conv_b + l.filters, 0.0);
  std::fill(lin.params.begin() + l.b1, lin.params.begin() + l.b1 + l.hidden, 0.0);
  std::fill(lin.params.begin() + l.b2, lin.params.begin() + l.b2 + l.rep, 0.0);
  const std::vector<double> x{0.3, -1, 2, 0.5, 0.1, -0.7};
  std::vector<double> neg(x);
  for (auto& v : neg) v = -v;
  EXPECT_NEAR(predict_match(lin, x, x), 1.0, 1e-12);
  EXPECT_NEAR(predict_match(lin, x, neg), 0.0, 1e-12);

  const auto m = hand_model();
  // (1,0,1) -> z=(3, 2.5); (0,1,0): conv [-0.5, 1.5] -> [0, 1.5]; dense1 [3, 2] -> [3, 2]; dense2 [6, 10].
  const double cos = (3.0 * 6.0 + 2.5 * 10.0) / (std::sqrt(15.25) * std::sqrt(136.0));
  EXPECT_DOUBLE_EQ(predict_match(m, std::vector<double>{1, 0, 1}, std::vector<double>{0, 1, 0}), (cos + 1) / 2);
}

namespace {

// Points around a few well-separated centers; a pair matches iff the centers agree.
struct Planted {
  std::vector<std::vector<double>> centers;
  std::vector<MatchExample> pairs(std::size_t n, Rng& rng) const {
    std::vector<MatchExample> out;
    const std::size_t dim = centers[0].size();
    auto draw = [&](std::size_t c) {
      std::vector<double> v(centers[c]);
      for (auto& x : v) x += rng.uniform(-0.3, 0.3);
      return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = rng.index(centers.size());
      auto b = a;
      if (i % 2) b = (a + 1 + rng.index(centers.size() - 1)) % centers.size();
      out.push_back({draw(a), draw(b), a == b ? 1 : 0, static_cast<int>(i), static_cast<int>(b)});
      (void)dim;
    }
    return out;
  }
};

Planted make_planted(std::size_t k, std::size_t dim, Rng& rng) {
  Planted p;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> v(dim, 0.0);
    for (auto& x : v) x = rng.bernoulli(0.5) ? 1.0 : -1.0;
    p.centers.push_back(v);
  }
  return p;
}

}  // namespace

TEST(TrainMatcher, PlantedSignalIsLearned) {
  Rng rng(12);
  const auto planted = make_planted(4, 16, rng);
  const auto train = planted.pairs(600, rng);
  auto validation = planted.pairs(200, rng);
  const auto test = planted.pairs(400, rng);

  // Oracle: nearest-center assignment separates the test pairs perfectly.
  auto nearest = [&](const std::vector<double>& v) {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t c = 0; c < planted.centers.size(); ++c) {
      double d = 0;
      for (std::size_t i = 0; i < v.size(); ++i) d += (v[i] - planted.centers[c][i]) * (v[i] - planted.centers[c][i]);
      if (d < bd) bd = d, best = c;
    }
    return best;
  };
  for (const auto& e : test) ASSERT_EQ(nearest(e.ss) == nearest(e.sp), e.label == 1);

  auto cfg = small_config(3);
  cfg.margin = 0.3;
  cfg.hidden = 16;
  cfg.rep_dim = 8;
  cfg.epochs = 30;
  auto model = train_matcher(train, cfg);
  EXPECT_LT(model.loss_history.back(), model.loss_history.front());
  fit_threshold(model, validation);
  EXPECT_GE(evaluate_matches(model, test).pooled.f1, 0.9);

  const auto again = train_matcher(train, cfg);
  EXPECT_EQ(again.params, model.params);
  EXPECT_EQ(again.loss_history, model.loss_history);
}

TEST(TrainMatcher, SingleLabelRejected) {
  Rng rng(1);
  auto batch = random_batch(4, 6, rng);
  for (auto& e : batch) e.label = 1;
  try {
    train_matcher(batch, small_config(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClass);
  }
}

TEST(FitThreshold, MaximizesF1OverAllCuts) {
  Rng rng(31);
  auto m = init_model(8, small_config(2));
  const auto val = random_batch(40, 8, rng);
  const double t = fit_threshold(m, val);
  EXPECT_EQ(m.threshold, t);
  auto f1_at = [&](double th) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& e : val) {
      const bool p = predict_match(m, e.ss, e.sp) >= th;
      tp += p && e.label == 1, fp += p && e.label == 0, fn += !p && e.label == 1;
    }
    return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
  };
  double best = 0;
  for (const auto& e : val) best = std::max(best, f1_at(predict_match(m, e.ss, e.sp)));
  EXPECT_NEAR(f1_at(t), best, 1e-12);
}

TEST(EvaluateMatches, PooledAndMacroCounts) {
  auto m = hand_model();
  m.threshold = 0.5;
  const std::vector<double> a{1, 0, 1}, b{0, 1, 0};
  // predict(a, a) = 1 (positive); predict(a, b) > 0.5 as computed above.
  std::vector<MatchExample> test{{a, a, 1, 0, 0}, {a, b, 0, 0, 1}, {a, a, 1, 1, 0}};
  const auto ev = evaluate_matches(m, test);
  EXPECT_DOUBLE_EQ(ev.pooled.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(ev.pooled.recall, 1.0);
  // SS 0: tp 1 fp 1 -> p 0.5; SS 1: tp 1 -> p 1.
  EXPECT_DOUBLE_EQ(ev.ss.precision, 0.75);
  // SP 0: p 1; SP 1: fp only -> p 0, r 0.
  EXPECT_DOUBLE_EQ(ev.sp.precision, 0.5);
}

TEST(MatchModelIo, BitExactRoundTrip) {
  Rng rng(4);
  auto m = init_model(7, small_config(9));
  m.input_shift = random_vector(7, rng);
  m.threshold = 0.6180339887498949;
  m.loss_history = {0.5, 0.25};
  const auto back = load_match_model(save_match_model(m));
  EXPECT_EQ(back.params, m.params);
  EXPECT_EQ(back.input_shift, m.input_shift);
  EXPECT_EQ(back.threshold, m.threshold);
  EXPECT_EQ(back.config.flags, m.config.flags);
  EXPECT_EQ(back.layout.total, m.layout.total);
}

TEST(AblationCsv, ColumnStructure) {
  std::vector<AblationRow> rows{{"content", {}}, {"content+psy+prob+covid", {}}};
  std::ostringstream out;
  write_ablation_csv(out, rows);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "config,precision_ss,precision_sp,recall_ss,recall_sp,f1_ss,f1_sp");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
  }
  EXPECT_EQ(n, 2);
}

TEST(MatcherConfig, Validation) {
  MatcherConfig c;
  c.flags = AblationFlags{false, false, false, false};
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.margin = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.conv_stride = 0;
  EXPECT_THROW(c.validate(), Error);
}
