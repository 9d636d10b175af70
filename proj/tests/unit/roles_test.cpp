#include <gtest/gtest.h>

#include <cmath>

#include "kimatch/error.hpp"
#include "kimatch/random.hpp"
#include "kimatch/roles.hpp"
#include "kimatch/synth.hpp"
#include "test_support.hpp"

using namespace kimatch;
using namespace kimatch::roles;

namespace {

std::vector<RoleExample> random_examples(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<RoleExample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].x.resize(d);
    for (auto& v : out[i].x) v = rng.uniform(-2, 2);
    out[i].label = i % 3 == 0 ? 1 : 0;
  }
  return out;
}

std::vector<double> numeric_gradient(RoleModel m, std::span<const RoleExample> data, const RoleHyperparams& hp) {
  const double h = 1e-6;
  std::vector<double> g;
  for (std::size_t j = 0; j <= m.weights.size(); ++j) {
    double& p = j < m.weights.size() ? m.weights[j] : m.bias;
    const double keep = p;
    p = keep + h;
    const double up = log_loss(m, data, hp);
    p = keep - h;
    const double down = log_loss(m, data, hp);
    p = keep;
    g.push_back((up - down) / (2 * h));
  }
  return g;
}

}  // namespace

TEST(Logistic, StableAtExtremes) {
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(800.0), 1.0, 1e-15);
  EXPECT_GE(logistic(-800.0), 0.0);
  EXPECT_DOUBLE_EQ(logistic(2.0), 1.0 / (1.0 + std::exp(-2.0)));
}

TEST(RoleGradient, MatchesCentralDifference) {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = random_examples(25, 6, rng);
    RoleModel m;
    m.weights.resize(6);
    for (auto& w : m.weights) w = rng.uniform(-1, 1);
    m.bias = rng.uniform(-1, 1);
    RoleHyperparams hp;
    hp.l2 = trial % 2 ? 0.01 : 0.0;
    hp.class_weighting = trial % 3 != 0;
    const auto g = log_loss_gradient(m, data, hp);
    const auto n = numeric_gradient(m, data, hp);
    for (std::size_t j = 0; j < g.size(); ++j)
      EXPECT_LE(std::abs(g[j] - n[j]) / std::max({std::abs(g[j]), std::abs(n[j]), 1e-8}), 1e-6) << trial << ":" << j;
  }
}

TEST(RoleLoss, ClassWeightingGivesEachClassHalfTheMass) {
  // Three positives with z = 0 and one negative with z = 0: every term is log 2.
  std::vector<RoleExample> data{{{0.0}, 1}, {{0.0}, 1}, {{0.0}, 1}, {{0.0}, 0}};
  RoleModel m;
  m.weights = {0.3};
  RoleHyperparams hp;
  hp.l2 = 0.2;
  EXPECT_NEAR(log_loss(m, data, hp), std::log(2.0) + 0.5 * 0.2 * 0.09, 1e-15);
  // Bias gradient: 0.5 * (0.5 - 1) + 0.5 * (0.5 - 0) = 0.
  EXPECT_NEAR(log_loss_gradient(m, data, hp).back(), 0.0, 1e-15);
  hp.class_weighting = false;
  EXPECT_NEAR(log_loss_gradient(m, data, hp).back(), 0.75 * -0.5 + 0.25 * 0.5, 1e-15);
}

TEST(TrainRoles, SeparableSetReachesPerfectAccuracy) {
  Rng rng(5);
  std::vector<RoleExample> data;
  // Separable by x0 + x1 > 0 with a margin; the oracle separator checks it.
  while (data.size() < 200) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    if (std::abs(a + b) < 0.2) continue;
    data.push_back({{a, b}, a + b > 0 ? 1 : 0});
  }
  for (const auto& e : data) ASSERT_EQ(e.x[0] + e.x[1] > 0, e.label == 1);
  RoleHyperparams hp;
  hp.epochs = 200;
  const auto model = train_roles(data, hp, 1);
  EXPECT_EQ(evaluate_roles(model, data).accuracy, 1.0);
  EXPECT_LT(model.meta.final_loss, model.meta.initial_loss);
}

TEST(TrainRoles, IdenticalInputsConvergeToPrior) {
  std::vector<RoleExample> data;
  for (int i = 0; i < 40; ++i) data.push_back({{0.0, 0.0}, i % 4 != 0 ? 1 : 0});
  RoleHyperparams hp;
  hp.class_weighting = false;
  hp.epochs = 2000;
  const auto model = train_roles(data, hp, 0);
  EXPECT_NEAR(predict_role(model, std::vector<double>{0.0, 0.0}).p_ss, 0.75, 1e-6);
  hp.class_weighting = true;
  EXPECT_NEAR(predict_role(train_roles(data, hp, 0), std::vector<double>{0.0, 0.0}).p_ss, 0.5, 1e-6);
}

TEST(TrainRoles, DeterministicPerSeed) {
  Rng rng(9);
  const auto data = random_examples(50, 4, rng);
  const RoleHyperparams hp;
  const auto a = train_roles(data, hp, 3);
  const auto b = train_roles(data, hp, 3);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_NE(a.weights, train_roles(data, hp, 4).weights);
}

TEST(TrainRoles, Errors) {
  const std::vector<RoleExample> one_class{{{1.0}, 1}, {{2.0}, 1}};
  try {
    train_roles(one_class, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClass);
  }
  const std::vector<RoleExample> ragged{{{1.0}, 1}, {{2.0, 3.0}, 0}};
  EXPECT_THROW(train_roles(ragged, {}, 0), Error);
  EXPECT_THROW(train_roles({}, {}, 0), Error);
}

TEST(PredictRole, ZeroModelLargeMarginAndHandValue) {
  RoleModel m;
  m.weights = {0.0, 0.0};
  EXPECT_EQ(predict_role(m, std::vector<double>{3.0, -1.0}).p_ss, 0.5);
  m.weights = {100.0, 0.0};
  EXPECT_NEAR(predict_role(m, std::vector<double>{10.0, 0.0}).p_ss, 1.0, 1e-12);
  m.weights = {0.5, -1.5};
  m.bias = 0.25;
  // z = 0.5*2 - 1.5*1 + 0.25 = -0.25
  const auto p = predict_role(m, std::vector<double>{2.0, 1.0});
  EXPECT_DOUBLE_EQ(p.p_ss, 1.0 / (1.0 + std::exp(0.25)));
  EXPECT_DOUBLE_EQ(p.p_ss + p.p_sp, 1.0);
  try {
    predict_role(m, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(PredictUser, MeanOfPostProbabilities) {
  RoleModel m;
  m.weights = {1.0};
  const std::vector<std::vector<double>> posts{{0.0}, {2.0}};
  EXPECT_DOUBLE_EQ(predict_user(m, posts).p_ss, (0.5 + logistic(2.0)) / 2.0);
}

TEST(ClassMetrics, ConfusionFixture) {
  const auto m = class_metrics(8, 2, 4);
  EXPECT_DOUBLE_EQ(m.precision, 0.8);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_NEAR(m.f1, 2 * 0.8 * (2.0 / 3.0) / (0.8 + 2.0 / 3.0), 1e-15);
  EXPECT_NEAR(m.f1, 0.727, 1e-3);
}

TEST(EvaluateRoles, AllRightAllWrong) {
  RoleModel m;
  m.weights = {1.0};
  const std::vector<RoleExample> right{{{5.0}, 1}, {{-5.0}, 0}, {{4.0}, 1}};
  const std::vector<RoleExample> wrong{{{5.0}, 0}, {{-5.0}, 1}, {{4.0}, 0}};
  const auto good = evaluate_roles(m, right);
  EXPECT_EQ(good.accuracy, 1.0);
  EXPECT_EQ(good.ss.f1, 1.0);
  EXPECT_EQ(good.sp.f1, 1.0);
  const auto bad = evaluate_roles(m, wrong);
  EXPECT_EQ(bad.accuracy, 0.0);
  EXPECT_EQ(bad.ss.precision, 0.0);
  EXPECT_EQ(bad.sp.recall, 0.0);
}

TEST(RoleModelIo, RoundTrip) {
  Rng rng(1);
  const auto data = random_examples(30, 3, rng);
  const auto m = train_roles(data, {}, 2);
  const auto back = load_role_model(save_role_model(m));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.meta.epochs, m.meta.epochs);
  EXPECT_THROW(load_role_model("{\"weights\": 3}"), Error);
}

TEST(RoleInput, LayoutAndEmotionRescale) {
  embed::Embedding e;
  e.values = {0.1, 0.2};
  features::FeatureVector f;
  f.psy = {1, 2, 3, 4, 5, 6};
  f.covid = {7, 8, 9};
  f.emotion = 7.0;
  const auto x = role_input(e, f, 1.0, 9.0);
  ASSERT_EQ(x.size(), 2 + kFeatureDims);
  EXPECT_EQ(x[2], 1.0);
  EXPECT_EQ(x[10], 9.0);
  EXPECT_DOUBLE_EQ(x[11], 0.75);
}

TEST(TrainRoles, SyntheticCorpusIsLearnable) {
  const auto& r = testkit::resources();
  synth::RoleCorpusConfig cfg;
  cfg.num_seekers = 150;
  cfg.num_providers = 150;
  const auto posts = synth::generate_role_posts(cfg, r.anxiety(), r.depression());
  std::vector<RoleExample> train, test;
  for (std::size_t i = 0; i < posts.size(); ++i)
    (i % 5 == 0 ? test : train).push_back({r.role_input(posts[i].post.text), posts[i].label});
  const auto model = train_roles(train, {}, 0);
  EXPECT_GE(evaluate_roles(model, test).accuracy, 0.9);
}
