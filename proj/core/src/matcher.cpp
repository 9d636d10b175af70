#include "kimatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "kimatch/error.hpp"
#include "kimatch/random.hpp"

namespace kimatch::matcher {

using nlohmann::json;

std::string AblationFlags::name() const {
  std::string out;
  auto add = [&](bool on, const char* part) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += part;
  };
  add(content, "content");
  add(psy, "psy");
  add(role_prob, "prob");
  add(covid, "covid");
  return out.empty() ? "none" : out;
}

AblationFlags parse_flags(std::string_view name) {
  AblationFlags f{false, false, false, false};
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto end = std::min(name.find('+', start), name.size());
    const auto part = name.substr(start, end - start);
    if (part == "content") f.content = true;
    else if (part == "psy") f.psy = true;
    else if (part == "prob" || part == "role_prob") f.role_prob = true;
    else if (part == "covid") f.covid = true;
    else throw Error(ErrorCode::InvalidArgument, "unknown ablation block: " + std::string(part));
    start = end + 1;
  }
  return f;
}

std::vector<AblationFlags> standard_ablation() {
  return {{true, false, false, false},
          {false, true, true, false},
          {false, true, true, true},
          {true, true, true, true}};
}

void MatcherConfig::validate() const {
  if (!flags.any()) throw Error(ErrorCode::InvalidArgument, "at least one input block must be enabled");
  if (!(margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be > 0");
  if (rep_dim < 1 || conv_filters < 1 || conv_kernel < 1 || conv_stride < 1 || hidden < 1 ||
      epochs < 1 || batch_size < 1)
    throw Error(ErrorCode::InvalidArgument, "matcher sizes must be >= 1");
  if (!(learning_rate > 0.0) || weight_decay < 0.0)
    throw Error(ErrorCode::InvalidArgument, "invalid matcher learning rate or weight decay");
}

std::vector<double> build_input(const InputParts& parts, const AblationFlags& flags) {
  std::vector<double> x;
  if (flags.content) {
    if (!parts.content) throw Error(ErrorCode::MissingComponent, "content embedding missing");
    x.insert(x.end(), parts.content->begin(), parts.content->end());
  }
  if ((flags.psy || flags.covid) && !parts.features)
    throw Error(ErrorCode::MissingComponent, "feature vector missing");
  if (flags.psy) x.insert(x.end(), parts.features->psy.begin(), parts.features->psy.end());
  if (flags.role_prob) {
    if (!parts.role_prob) throw Error(ErrorCode::MissingComponent, "role probability missing");
    x.push_back(*parts.role_prob);
  }
  if (flags.covid) x.insert(x.end(), parts.features->covid.begin(), parts.features->covid.end());
  return x;
}

std::size_t input_dim(const AblationFlags& flags, std::size_t content_dim) {
  return (flags.content ? content_dim : 0) + (flags.psy ? 6 : 0) + (flags.role_prob ? 1 : 0) +
         (flags.covid ? 3 : 0);
}

Layout Layout::make(std::size_t input_dim, const MatcherConfig& c) {
  if (input_dim == 0) throw Error(ErrorCode::InvalidArgument, "input dimension must be >= 1");
  Layout l;
  l.input = input_dim;
  l.kernel = static_cast<std::size_t>(c.conv_kernel);
  l.stride = static_cast<std::size_t>(c.conv_stride);
  l.filters = static_cast<std::size_t>(c.conv_filters);
  l.hidden = static_cast<std::size_t>(c.hidden);
  l.rep = static_cast<std::size_t>(c.rep_dim);
  l.padded = std::max(input_dim, l.kernel);
  l.conv_len = (l.padded - l.kernel) / l.stride + 1;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    const auto off = at;
    at += n;
    return off;
  };
  l.conv_w = take(l.filters * l.kernel);
  l.conv_b = take(l.filters);
  l.w1 = take(l.hidden * l.filters * l.conv_len);
  l.b1 = take(l.hidden);
  l.w2 = take(l.rep * l.hidden);
  l.b2 = take(l.rep);
  l.total = at;
  return l;
}

MatchModel init_model(std::size_t input_dim, const MatcherConfig& config) {
  config.validate();
  MatchModel m;
  m.config = config;
  m.layout = Layout::make(input_dim, config);
  const auto& l = m.layout;
  m.params.assign(l.total, 0.0);
  m.input_shift.assign(input_dim, 0.0);
  m.input_scale.assign(input_dim, 1.0);

  Rng rng(config.seed);
  auto fill = [&](std::size_t off, std::size_t n, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < n; ++i) m.params[off + i] = rng.uniform(-bound, bound);
  };
  fill(l.conv_w, l.filters * l.kernel, l.kernel);
  fill(l.w1, l.hidden * l.filters * l.conv_len, l.filters * l.conv_len);
  fill(l.w2, l.rep * l.hidden, l.hidden);
  // A nonzero output bias keeps z away from the origin, where the L2
  // normalization has no derivative, even when every hidden unit is dead.
  const double b2_bound = 1.0 / std::sqrt(static_cast<double>(l.hidden));
  for (std::size_t r = 0; r < l.rep; ++r) m.params[l.b2 + r] = rng.uniform(-b2_bound, b2_bound);
  return m;
}

namespace {

struct Cache {
  std::vector<double> x;   // preprocessed, zero padded
  std::vector<double> a1;  // conv pre-activation [filters * conv_len]
  std::vector<double> h1;
  std::vector<double> a2;  // hidden pre-activation
  std::vector<double> h2;
  std::vector<double> z;   // pre-normalization output
  double norm = 0.0;
  std::vector<double> y;
};

inline double act(Activation a, double v) { return a == Activation::Relu ? std::max(0.0, v) : v; }
inline double act_grad(Activation a, double v) { return a == Activation::Relu ? (v > 0.0 ? 1.0 : 0.0) : 1.0; }

void run_forward(const MatchModel& m, std::span<const double> input, Cache& c) {
  const auto& l = m.layout;
  if (input.size() != l.input)
    throw Error(ErrorCode::DimensionMismatch, "matcher input has " + std::to_string(input.size()) +
                                                  " values, model expects " + std::to_string(l.input));
  const auto* p = m.params.data();
  const auto a = m.config.activation;

  c.x.assign(l.padded, 0.0);
  for (std::size_t i = 0; i < l.input; ++i) c.x[i] = (input[i] - m.input_shift[i]) * m.input_scale[i];

  const std::size_t n1 = l.filters * l.conv_len;
  c.a1.resize(n1);
  c.h1.resize(n1);
  for (std::size_t f = 0; f < l.filters; ++f) {
    const double* w = p + l.conv_w + f * l.kernel;
    for (std::size_t t = 0; t < l.conv_len; ++t) {
      const double* xs = c.x.data() + t * l.stride;
      double s = p[l.conv_b + f];
      for (std::size_t j = 0; j < l.kernel; ++j) s += w[j] * xs[j];
      c.a1[f * l.conv_len + t] = s;
      c.h1[f * l.conv_len + t] = act(a, s);
    }
  }

  c.a2.resize(l.hidden);
  c.h2.resize(l.hidden);
  for (std::size_t h = 0; h < l.hidden; ++h) {
    const double* w = p + l.w1 + h * n1;
    double s = p[l.b1 + h];
    for (std::size_t i = 0; i < n1; ++i) s += w[i] * c.h1[i];
    c.a2[h] = s;
    c.h2[h] = act(a, s);
  }

  c.z.resize(l.rep);
  double sq = 0.0;
  for (std::size_t r = 0; r < l.rep; ++r) {
    const double* w = p + l.w2 + r * l.hidden;
    double s = p[l.b2 + r];
    for (std::size_t h = 0; h < l.hidden; ++h) s += w[h] * c.h2[h];
    c.z[r] = s;
    sq += s * s;
  }
  c.norm = std::sqrt(sq);
  c.y.assign(l.rep, 0.0);
  if (c.norm > 0.0)
    for (std::size_t r = 0; r < l.rep; ++r) c.y[r] = c.z[r] / c.norm;
}

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(y).
void run_backward(const MatchModel& m, const Cache& c, std::span<const double> dy, std::vector<double>& grad) {
  const auto& l = m.layout;
  if (c.norm == 0.0) return;
  const auto* p = m.params.data();
  const auto a = m.config.activation;
  const std::size_t n1 = l.filters * l.conv_len;

  double ydy = 0.0;
  for (std::size_t r = 0; r < l.rep; ++r) ydy += c.y[r] * dy[r];
  std::vector<double> dz(l.rep);
  for (std::size_t r = 0; r < l.rep; ++r) dz[r] = (dy[r] - c.y[r] * ydy) / c.norm;

  std::vector<double> da2(l.hidden, 0.0);
  for (std::size_t r = 0; r < l.rep; ++r) {
    grad[l.b2 + r] += dz[r];
    double* gw = grad.data() + l.w2 + r * l.hidden;
    const double* w = p + l.w2 + r * l.hidden;
    for (std::size_t h = 0; h < l.hidden; ++h) {
      gw[h] += dz[r] * c.h2[h];
      da2[h] += dz[r] * w[h];
    }
  }
  for (std::size_t h = 0; h < l.hidden; ++h) da2[h] *= act_grad(a, c.a2[h]);

  std::vector<double> da1(n1, 0.0);
  for (std::size_t h = 0; h < l.hidden; ++h) {
    if (da2[h] == 0.0) continue;
    grad[l.b1 + h] += da2[h];
    double* gw = grad.data() + l.w1 + h * n1;
    const double* w = p + l.w1 + h * n1;
    for (std::size_t i = 0; i < n1; ++i) {
      gw[i] += da2[h] * c.h1[i];
      da1[i] += da2[h] * w[i];
    }
  }
  for (std::size_t i = 0; i < n1; ++i) da1[i] *= act_grad(a, c.a1[i]);

  for (std::size_t f = 0; f < l.filters; ++f) {
    double* gw = grad.data() + l.conv_w + f * l.kernel;
    for (std::size_t t = 0; t < l.conv_len; ++t) {
      const double d = da1[f * l.conv_len + t];
      if (d == 0.0) continue;
      grad[l.conv_b + f] += d;
      const double* xs = c.x.data() + t * l.stride;
      for (std::size_t j = 0; j < l.kernel; ++j) gw[j] += d * xs[j];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double pair_loss_grad(double s, int label, double margin) {
  if (label == 1) return -2.0 * (1.0 - s);
  const double excess = s - (1.0 - margin);
  return excess > 0.0 ? 2.0 * excess : 0.0;
}

// Adds the gradient of one example's loss, scaled by `weight`, into `grad`;
// returns the loss.
double accumulate_example(const MatchModel& m, const MatchExample& e, double weight, Cache& ca, Cache& cb,
                          std::vector<double>& grad) {
  run_forward(m, e.ss, ca);
  run_forward(m, e.sp, cb);
  const double s = dot(ca.y, cb.y);
  const double g = weight * pair_loss_grad(s, e.label, m.config.margin);
  if (g != 0.0) {
    std::vector<double> dy(ca.y.size());
    for (std::size_t r = 0; r < dy.size(); ++r) dy[r] = g * cb.y[r];
    run_backward(m, ca, dy, grad);
    for (std::size_t r = 0; r < dy.size(); ++r) dy[r] = g * ca.y[r];
    run_backward(m, cb, dy, grad);
  }
  return pair_loss_from_similarity(s, e.label, m.config.margin);
}

}  // namespace

std::vector<double> forward(const MatchModel& model, std::span<const double> x) {
  Cache c;
  run_forward(model, x, c);
  return c.y;
}

double similarity(const MatchModel& model, std::span<const double> a, std::span<const double> b) {
  return dot(forward(model, a), forward(model, b));
}

double pair_loss_from_similarity(double s, int label, double margin) {
  if (label == 1) return (1.0 - s) * (1.0 - s);
  const double excess = std::max(0.0, s - (1.0 - margin));
  return excess * excess;
}

double pair_loss(const MatchModel& model, const MatchExample& example, double margin) {
  return pair_loss_from_similarity(similarity(model, example.ss, example.sp), example.label, margin);
}

double batch_loss(const MatchModel& model, std::span<const MatchExample> batch) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : batch) sum += pair_loss(model, e, model.config.margin);
  return sum / static_cast<double>(batch.size());
}

std::vector<double> batch_gradient(const MatchModel& model, std::span<const MatchExample> batch) {
  std::vector<double> grad(model.params.size(), 0.0);
  if (batch.empty()) return grad;
  Cache ca, cb;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& e : batch) accumulate_example(model, e, w, ca, cb, grad);
  return grad;
}

double triplet_satisfaction(const MatchModel& model, std::span<const Triple> triples, double margin) {
  if (triples.empty()) return 0.0;
  std::vector<Triple> reps;
  reps.reserve(triples.size());
  for (const auto& t : triples) reps.push_back({forward(model, t.ss), forward(model, t.sp), forward(model, t.sp_bar)});
  return triplet_satisfaction_raw(reps, margin);
}

double triplet_satisfaction_raw(std::span<const Triple> triples, double margin) {
  if (triples.empty()) return 0.0;
  auto cos = [](const std::vector<double>& a, const std::vector<double>& b) {
    const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
    return na == 0.0 || nb == 0.0 ? 0.0 : dot(a, b) / (na * nb);
  };
  std::size_t ok = 0;
  for (const auto& t : triples)
    if (cos(t.ss, t.sp) >= cos(t.ss, t.sp_bar) + margin) ++ok;
  return static_cast<double>(ok) / static_cast<double>(triples.size());
}

MatchModel train_matcher(std::span<const MatchExample> train, const MatcherConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorCode::SingleClass, "no training pairs");
  bool pos = false, neg = false;
  for (const auto& e : train) (e.label == 1 ? pos : neg) = true;
  if (!pos || !neg) throw Error(ErrorCode::SingleClass, "training pairs carry a single label");

  const std::size_t dim = train.front().ss.size();
  MatchModel m = init_model(dim, config);

  // Standardize each input coordinate over every SS and SP vector seen in training.
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (const auto& e : train)
    for (std::size_t i = 0; i < dim; ++i) {
      if (e.ss.size() != dim || e.sp.size() != dim)
        throw Error(ErrorCode::DimensionMismatch, "training pairs have ragged inputs");
      mean[i] += e.ss[i] + e.sp[i];
    }
  const double n = 2.0 * static_cast<double>(train.size());
  for (auto& v : mean) v /= n;
  for (const auto& e : train)
    for (std::size_t i = 0; i < dim; ++i)
      var[i] += (e.ss[i] - mean[i]) * (e.ss[i] - mean[i]) + (e.sp[i] - mean[i]) * (e.sp[i] - mean[i]);
  for (std::size_t i = 0; i < dim; ++i) {
    const double sd = std::sqrt(var[i] / n);
    m.input_shift[i] = mean[i];
    m.input_scale[i] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> m1(m.params.size(), 0.0), m2(m.params.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::uint64_t step = 0;
  Cache ca, cb;
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const double w = 1.0 / static_cast<double>(end - start);
      std::vector<double> grad(m.params.size(), 0.0);
      for (std::size_t k = start; k < end; ++k) epoch_loss += accumulate_example(m, train[order[k]], w, ca, cb, grad);

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        const double g = grad[i] + config.weight_decay * m.params[i];
        m1[i] = kBeta1 * m1[i] + (1 - kBeta1) * g;
        m2[i] = kBeta2 * m2[i] + (1 - kBeta2) * g * g;
        m.params[i] -= config.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + kEps);
      }
    }
    epoch_loss /= static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss))
      throw Error(ErrorCode::Divergence, "loss became non-finite in epoch " + std::to_string(epoch));
    m.loss_history.push_back(epoch_loss);
  }
  return m;
}

double grad_check(const MatchModel& model, std::span<const MatchExample> batch, double eps, double floor) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "eps must lie in [1e-6, 1e-3]");
  if (batch.empty()) return 0.0;
  const auto analytic = batch_gradient(model, batch);
  MatchModel probe = model;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.params.size(); ++i) {
    const double saved = probe.params[i];
    probe.params[i] = saved + eps;
    const double up = batch_loss(probe, batch);
    probe.params[i] = saved - eps;
    const double down = batch_loss(probe, batch);
    probe.params[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double predict_match(const MatchModel& model, std::span<const double> ss, std::span<const double> sp) {
  return std::clamp((similarity(model, ss, sp) + 1.0) / 2.0, 0.0, 1.0);
}

namespace {

double f1_at(const std::vector<std::pair<double, int>>& scored, double threshold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& [s, y] : scored) {
    const bool pred = s >= threshold;
    if (pred && y == 1) ++tp;
    else if (pred) ++fp;
    else if (y == 1) ++fn;
  }
  return roles::class_metrics(tp, fp, fn).f1;
}

}  // namespace

double fit_threshold(MatchModel& model, std::span<const MatchExample> validation) {
  if (validation.empty()) return model.threshold;
  std::vector<std::pair<double, int>> scored;
  for (const auto& e : validation) scored.emplace_back(predict_match(model, e.ss, e.sp), e.label);
  std::vector<double> cuts;
  for (const auto& sc : scored) cuts.push_back(sc.first);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Candidates: midpoints between consecutive distinct scores, plus the lowest score.
  double best_t = cuts.front(), best_f1 = f1_at(scored, cuts.front());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double t = 0.5 * (cuts[i - 1] + cuts[i]);
    const double f = f1_at(scored, t);
    if (f > best_f1) {
      best_f1 = f;
      best_t = t;
    }
  }
  model.threshold = best_t;
  return best_t;
}

namespace {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

roles::ClassMetrics macro(const std::map<int, Counts>& groups) {
  roles::ClassMetrics sum;
  std::size_t n = 0;
  for (const auto& [id, c] : groups) {
    // Entities with neither true nor predicted matches have undefined metrics.
    if (c.tp + c.fp + c.fn == 0) continue;
    const auto m = roles::class_metrics(c.tp, c.fp, c.fn);
    sum.precision += m.precision;
    sum.recall += m.recall;
    sum.f1 += m.f1;
    ++n;
  }
  if (n > 0) {
    sum.precision /= static_cast<double>(n);
    sum.recall /= static_cast<double>(n);
    sum.f1 /= static_cast<double>(n);
  }
  return sum;
}

}  // namespace

MatchEvaluation evaluate_matches(const MatchModel& model, std::span<const MatchExample> test) {
  Counts all;
  std::map<int, Counts> by_ss, by_sp;
  for (const auto& e : test) {
    const bool pred = predict_match(model, e.ss, e.sp) >= model.threshold;
    for (Counts* c : {&all, &by_ss[e.ss_id], &by_sp[e.sp_id]}) {
      if (pred && e.label == 1) ++c->tp;
      else if (pred) ++c->fp;
      else if (e.label == 1) ++c->fn;
    }
  }
  MatchEvaluation ev;
  ev.pooled = roles::class_metrics(all.tp, all.fp, all.fn);
  ev.ss = macro(by_ss);
  ev.sp = macro(by_sp);
  return ev;
}

namespace {

const char* activation_name(Activation a) { return a == Activation::Relu ? "relu" : "identity"; }

json config_to_json(const MatcherConfig& c) {
  return {{"flags", c.flags.name()},
          {"margin", c.margin},
          {"rep_dim", c.rep_dim},
          {"conv_filters", c.conv_filters},
          {"conv_kernel", c.conv_kernel},
          {"conv_stride", c.conv_stride},
          {"hidden", c.hidden},
          {"activation", activation_name(c.activation)},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed}};
}

MatcherConfig config_from_json(const json& j) {
  MatcherConfig c;
  c.flags = parse_flags(j.at("flags").get<std::string>());
  c.margin = j.at("margin").get<double>();
  c.rep_dim = j.at("rep_dim").get<int>();
  c.conv_filters = j.at("conv_filters").get<int>();
  c.conv_kernel = j.at("conv_kernel").get<int>();
  c.conv_stride = j.at("conv_stride").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.activation = j.at("activation").get<std::string>() == "identity" ? Activation::Identity : Activation::Relu;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.weight_decay = j.value("weight_decay", 0.0);
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<double> slice(const std::vector<double>& v, std::size_t off, std::size_t n) {
  return {v.begin() + static_cast<std::ptrdiff_t>(off), v.begin() + static_cast<std::ptrdiff_t>(off + n)};
}

}  // namespace

std::string save_match_model(const MatchModel& m) {
  const auto& l = m.layout;
  json j;
  j["config"] = config_to_json(m.config);
  j["input_dim"] = l.input;
  j["layers"] = {
      {"conv", {{"weights", slice(m.params, l.conv_w, l.filters * l.kernel)},
                {"bias", slice(m.params, l.conv_b, l.filters)}}},
      {"dense1", {{"weights", slice(m.params, l.w1, l.hidden * l.filters * l.conv_len)},
                  {"bias", slice(m.params, l.b1, l.hidden)}}},
      {"dense2", {{"weights", slice(m.params, l.w2, l.rep * l.hidden)}, {"bias", slice(m.params, l.b2, l.rep)}}}};
  j["input_shift"] = m.input_shift;
  j["input_scale"] = m.input_scale;
  j["threshold"] = m.threshold;
  j["loss_history"] = m.loss_history;
  return j.dump(1);
}

MatchModel load_match_model(std::string_view json_text) {
  try {
    const auto j = json::parse(json_text);
    MatchModel m = init_model(j.at("input_dim").get<std::size_t>(), config_from_json(j.at("config")));
    const auto& l = m.layout;
    auto put = [&](const json& arr, std::size_t off, std::size_t n) {
      const auto v = arr.get<std::vector<double>>();
      if (v.size() != n) throw Error(ErrorCode::FormatError, "layer size does not match config");
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(v[i])) throw Error(ErrorCode::FormatError, "non-finite parameter");
        m.params[off + i] = v[i];
      }
    };
    const auto& layers = j.at("layers");
    put(layers.at("conv").at("weights"), l.conv_w, l.filters * l.kernel);
    put(layers.at("conv").at("bias"), l.conv_b, l.filters);
    put(layers.at("dense1").at("weights"), l.w1, l.hidden * l.filters * l.conv_len);
    put(layers.at("dense1").at("bias"), l.b1, l.hidden);
    put(layers.at("dense2").at("weights"), l.w2, l.rep * l.hidden);
    put(layers.at("dense2").at("bias"), l.b2, l.rep);
    m.input_shift = j.at("input_shift").get<std::vector<double>>();
    m.input_scale = j.at("input_scale").get<std::vector<double>>();
    if (m.input_shift.size() != l.input || m.input_scale.size() != l.input)
      throw Error(ErrorCode::FormatError, "preprocessing size does not match input_dim");
    m.threshold = j.at("threshold").get<double>();
    m.loss_history = j.value("loss_history", std::vector<double>{});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("match model JSON: ") + e.what());
  }
}

std::vector<MatchExample> materialize(const MatchDataset& data, const std::vector<MatchDataset::Pair>& pairs,
                                      const AblationFlags& flags) {
  std::vector<std::vector<double>> ss(data.seekers.size()), sp(data.providers.size());
  for (std::size_t i = 0; i < ss.size(); ++i) ss[i] = build_input(data.seekers[i], flags);
  for (std::size_t i = 0; i < sp.size(); ++i) sp[i] = build_input(data.providers[i], flags);
  std::vector<MatchExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs)
    out.push_back({ss.at(static_cast<std::size_t>(p.ss)), sp.at(static_cast<std::size_t>(p.sp)), p.label, p.ss, p.sp});
  return out;
}

std::vector<AblationRow> run_ablation(const MatchDataset& data, const MatcherConfig& base,
                                      std::span<const AblationFlags> configs) {
  std::vector<AblationRow> rows;
  for (const auto& flags : configs) {
    MatcherConfig cfg = base;
    cfg.flags = flags;
    auto model = train_matcher(materialize(data, data.train, flags), cfg);
    fit_threshold(model, materialize(data, data.validation, flags));
    rows.push_back({flags.name(), evaluate_matches(model, materialize(data, data.test, flags))});
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "config,precision_ss,precision_sp,recall_ss,recall_sp,f1_ss,f1_sp\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& r : rows)
    out << r.config << ',' << r.eval.ss.precision << ',' << r.eval.sp.precision << ',' << r.eval.ss.recall << ','
        << r.eval.sp.recall << ',' << r.eval.ss.f1 << ',' << r.eval.sp.f1 << '\n';
  out.unsetf(std::ios::fixed);
}

}  // namespace kimatch::matcher
