#pragma once

// Support seeker / support provider classification with L2-regularized,
// class-weighted logistic regression trained by full-batch gradient descent.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kimatch/embed.hpp"
#include "kimatch/features.hpp"

namespace kimatch::roles {

// Label 1 = support seeker (SS), 0 = support provider (SP).
struct RoleExample {
  std::vector<double> x;
  int label = 0;
};

struct RoleHyperparams {
  double learning_rate = 0.5;
  int epochs = 300;
  double l2 = 0.0;
  // Weight examples by inverse class frequency so both classes carry equal mass.
  bool class_weighting = true;
};

struct RoleMeta {
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  int epochs = 0;
  double l2 = 0.0;
  bool class_weighting = true;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct RoleModel {
  std::vector<double> weights;
  double bias = 0.0;
  RoleMeta meta;
};

struct RolePrediction {
  double p_ss = 0.5;
  double p_sp = 0.5;
  bool is_ss() const { return p_ss >= 0.5; }
};

double logistic(double z);

// Weighted mean log-loss plus (l2 / 2) * |w|^2.
double log_loss(const RoleModel& model, std::span<const RoleExample> data, const RoleHyperparams& hp);

// Gradient of log_loss; layout = weights followed by bias.
std::vector<double> log_loss_gradient(const RoleModel& model, std::span<const RoleExample> data,
                                      const RoleHyperparams& hp);

// Throws SingleClass when a class is missing and InvalidArgument for empty or
// ragged inputs.
RoleModel train_roles(std::span<const RoleExample> data, const RoleHyperparams& hp, std::uint64_t seed);

// Throws DimensionMismatch when x does not match the model.
RolePrediction predict_role(const RoleModel& model, std::span<const double> x);

// Mean p_ss over a user's posts.
RolePrediction predict_user(const RoleModel& model, std::span<const std::vector<double>> posts);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn);

struct RoleEvaluation {
  ClassMetrics ss;
  ClassMetrics sp;
  double accuracy = 0.0;
};

RoleEvaluation evaluate_roles(const RoleModel& model, std::span<const RoleExample> test);

// Input layout: [embedding | psy(6) | covid(3) | emotion rescaled to [0, 1]].
inline constexpr std::size_t kFeatureDims = 10;
std::vector<double> role_input(const embed::Embedding& embedding, const features::FeatureVector& f,
                               double emotion_min, double emotion_max);

// {"weights": [...], "bias": b, "meta": {...}}
std::string save_role_model(const RoleModel& model);
RoleModel load_role_model(std::string_view json_text);

}  // namespace kimatch::roles
