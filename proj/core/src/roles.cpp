#include "kimatch/roles.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "kimatch/error.hpp"
#include "kimatch/random.hpp"

namespace kimatch::roles {

using nlohmann::json;

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double linear(const RoleModel& m, std::span<const double> x) {
  double z = m.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += m.weights[i] * x[i];
  return z;
}

// Per-example weights summing to 1.
std::vector<double> example_weights(std::span<const RoleExample> data, bool class_weighting) {
  std::vector<double> w(data.size(), 1.0 / static_cast<double>(data.size()));
  if (!class_weighting) return w;
  std::size_t pos = 0;
  for (const auto& e : data) pos += e.label == 1;
  const std::size_t neg = data.size() - pos;
  for (std::size_t i = 0; i < data.size(); ++i)
    w[i] = 0.5 / static_cast<double>(data[i].label == 1 ? pos : neg);
  return w;
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_dims(const RoleModel& model, std::span<const RoleExample> data) {
  for (const auto& e : data)
    if (e.x.size() != model.weights.size())
      throw Error(ErrorCode::DimensionMismatch, "example dimension differs from model");
}

}  // namespace

double log_loss(const RoleModel& model, std::span<const RoleExample> data, const RoleHyperparams& hp) {
  check_dims(model, data);
  const auto w = example_weights(data, hp.class_weighting);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double z = linear(model, data[i].x);
    // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
    loss += w[i] * (softplus(z) - (data[i].label == 1 ? z : 0.0));
  }
  double reg = 0.0;
  for (double x : model.weights) reg += x * x;
  return loss + 0.5 * hp.l2 * reg;
}

std::vector<double> log_loss_gradient(const RoleModel& model, std::span<const RoleExample> data,
                                      const RoleHyperparams& hp) {
  check_dims(model, data);
  const auto w = example_weights(data, hp.class_weighting);
  const std::size_t d = model.weights.size();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double err = w[i] * (logistic(linear(model, data[i].x)) - data[i].label);
    for (std::size_t j = 0; j < d; ++j) g[j] += err * data[i].x[j];
    g[d] += err;
  }
  for (std::size_t j = 0; j < d; ++j) g[j] += hp.l2 * model.weights[j];
  return g;
}

RoleModel train_roles(std::span<const RoleExample> data, const RoleHyperparams& hp, std::uint64_t seed) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "no training examples");
  if (hp.epochs < 1 || !(hp.learning_rate > 0.0) || hp.l2 < 0.0)
    throw Error(ErrorCode::InvalidArgument, "invalid role hyperparameters");
  const std::size_t d = data.front().x.size();
  bool has_pos = false, has_neg = false;
  for (const auto& e : data) {
    if (e.x.size() != d) throw Error(ErrorCode::InvalidArgument, "ragged role examples");
    if (e.label != 0 && e.label != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    (e.label == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "training data has a single class");

  RoleModel model;
  model.weights.resize(d);
  Rng rng(seed);
  for (auto& w : model.weights) w = rng.uniform(-0.01, 0.01);
  model.meta = {seed, hp.learning_rate, hp.epochs, hp.l2, hp.class_weighting, 0.0, 0.0};
  model.meta.initial_loss = log_loss(model, data, hp);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto g = log_loss_gradient(model, data, hp);
    for (std::size_t j = 0; j < d; ++j) model.weights[j] -= hp.learning_rate * g[j];
    model.bias -= hp.learning_rate * g[d];
  }
  model.meta.final_loss = log_loss(model, data, hp);
  if (!std::isfinite(model.meta.final_loss))
    throw Error(ErrorCode::Divergence, "role training diverged");
  return model;
}

RolePrediction predict_role(const RoleModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " values, model expects " +
                                                  std::to_string(model.weights.size()));
  const double p = logistic(linear(model, x));
  return {p, 1.0 - p};
}

RolePrediction predict_user(const RoleModel& model, std::span<const std::vector<double>> posts) {
  if (posts.empty()) return {};
  double sum = 0.0;
  for (const auto& x : posts) sum += predict_role(model, x).p_ss;
  const double p = sum / static_cast<double>(posts.size());
  return {p, 1.0 - p};
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

RoleEvaluation evaluate_roles(const RoleModel& model, std::span<const RoleExample> test) {
  if (test.empty()) throw Error(ErrorCode::InvalidArgument, "empty test set");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& e : test) {
    const bool pred = predict_role(model, e.x).is_ss();
    if (pred && e.label == 1) ++tp;
    else if (pred) ++fp;
    else if (e.label == 1) ++fn;
    else ++tn;
  }
  RoleEvaluation ev;
  ev.ss = class_metrics(tp, fp, fn);
  ev.sp = class_metrics(tn, fn, fp);
  ev.accuracy = static_cast<double>(tp + tn) / static_cast<double>(test.size());
  return ev;
}

std::vector<double> role_input(const embed::Embedding& embedding, const features::FeatureVector& f,
                               double emotion_min, double emotion_max) {
  std::vector<double> x = embedding.values;
  x.insert(x.end(), f.psy.begin(), f.psy.end());
  x.insert(x.end(), f.covid.begin(), f.covid.end());
  x.push_back(emotion_max > emotion_min ? (f.emotion - emotion_min) / (emotion_max - emotion_min) : 0.0);
  return x;
}

std::string save_role_model(const RoleModel& model) {
  json j;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["meta"] = {{"seed", model.meta.seed},
               {"learning_rate", model.meta.learning_rate},
               {"epochs", model.meta.epochs},
               {"l2", model.meta.l2},
               {"class_weighting", model.meta.class_weighting},
               {"initial_loss", model.meta.initial_loss},
               {"final_loss", model.meta.final_loss}};
  return j.dump(2);
}

RoleModel load_role_model(std::string_view json_text) {
  RoleModel m;
  try {
    const auto j = json::parse(json_text);
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& meta = j.at("meta");
    m.meta.seed = meta.value("seed", std::uint64_t{0});
    m.meta.learning_rate = meta.value("learning_rate", 0.0);
    m.meta.epochs = meta.value("epochs", 0);
    m.meta.l2 = meta.value("l2", 0.0);
    m.meta.class_weighting = meta.value("class_weighting", true);
    m.meta.initial_loss = meta.value("initial_loss", 0.0);
    m.meta.final_loss = meta.value("final_loss", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("role model JSON: ") + e.what());
  }
  for (double w : m.weights)
    if (!std::isfinite(w)) throw Error(ErrorCode::FormatError, "role model has non-finite weights");
  return m;
}

}  // namespace kimatch::roles
