#pragma once

// Siamese match prediction. One shared block (1-D convolution, two dense
// layers, L2 normalization) embeds SS and SP inputs; a pair's score is the
// cosine of the two representations mapped to [0, 1]. Training minimizes a
// contrastive loss on binary match labels with Adam.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kimatch/features.hpp"
#include "kimatch/roles.hpp"

namespace kimatch::matcher {

// Which input blocks feed the network. Block order is fixed:
// [content embedding | psy(6) | role_prob(1) | covid(3)].
struct AblationFlags {
  bool content = true;
  bool psy = true;
  bool role_prob = true;
  bool covid = true;

  bool any() const { return content || psy || role_prob || covid; }
  std::string name() const;  // e.g. "content+psy+prob+covid"
  bool operator==(const AblationFlags&) const = default;
};

AblationFlags parse_flags(std::string_view name);

// The four configurations of the standard ablation table.
std::vector<AblationFlags> standard_ablation();

enum class Activation { Relu, Identity };

struct MatcherConfig {
  AblationFlags flags;
  double margin = 0.2;
  int rep_dim = 32;
  int conv_filters = 8;
  int conv_kernel = 5;
  int conv_stride = 2;
  int hidden = 64;
  Activation activation = Activation::Relu;
  double learning_rate = 0.003;
  int epochs = 20;
  int batch_size = 32;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Components available for one post or user. Missing parts raise
// MissingComponent when a flag requires them.
struct InputParts {
  std::optional<std::vector<double>> content;
  std::optional<features::FeatureVector> features;
  std::optional<double> role_prob;
};

std::vector<double> build_input(const InputParts& parts, const AblationFlags& flags);
std::size_t input_dim(const AblationFlags& flags, std::size_t content_dim = 256);

struct MatchExample {
  std::vector<double> ss;
  std::vector<double> sp;
  int label = 0;  // 1 good match, 0 bad match
  int ss_id = -1;
  int sp_id = -1;
};

// Offsets of each parameter tensor inside the flat parameter vector.
struct Layout {
  std::size_t input = 0, padded = 0, conv_len = 0;
  std::size_t filters = 0, kernel = 0, stride = 0, hidden = 0, rep = 0;
  std::size_t conv_w = 0, conv_b = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;

  static Layout make(std::size_t input_dim, const MatcherConfig& config);
};

struct MatchModel {
  MatcherConfig config;
  Layout layout;
  std::vector<double> params;
  // Fixed preprocessing: x' = (x - shift) * scale, fitted on training inputs.
  std::vector<double> input_shift;
  std::vector<double> input_scale;
  double threshold = 0.5;
  std::vector<double> loss_history;

  std::size_t input_dim() const { return layout.input; }
};

// Fresh model with seeded fan-in scaled uniform weights and identity preprocessing.
MatchModel init_model(std::size_t input_dim, const MatcherConfig& config);

// Unit-norm representation; all zeros only if the pre-normalization output is zero.
// Throws DimensionMismatch.
std::vector<double> forward(const MatchModel& model, std::span<const double> x);

double similarity(const MatchModel& model, std::span<const double> a, std::span<const double> b);

// label 1: (1 - s)^2; label 0: max(0, s - (1 - margin))^2.
double pair_loss_from_similarity(double s, int label, double margin);
double pair_loss(const MatchModel& model, const MatchExample& example, double margin);

// Mean pair loss over the batch; 0 for an empty batch.
double batch_loss(const MatchModel& model, std::span<const MatchExample> batch);
// Gradient of batch_loss with respect to model.params.
std::vector<double> batch_gradient(const MatchModel& model, std::span<const MatchExample> batch);

struct Triple {
  std::vector<double> ss;
  std::vector<double> sp;
  std::vector<double> sp_bar;
};

// Fraction of triples with cos(SS, SP) >= cos(SS, SP_bar) + margin, computed
// on representations.
double triplet_satisfaction(const MatchModel& model, std::span<const Triple> triples, double margin);
// Same criterion on raw vectors (no network).
double triplet_satisfaction_raw(std::span<const Triple> triples, double margin);

// Throws SingleClass and Divergence. Records the mean loss of every epoch.
MatchModel train_matcher(std::span<const MatchExample> train, const MatcherConfig& config);

// Largest relative difference between analytic and central-difference
// gradients, |a - n| / max(|a|, |n|, floor). An empty batch gives 0.
double grad_check(const MatchModel& model, std::span<const MatchExample> batch, double eps = 1e-6,
                  double floor = 1e-8);

// (cos + 1) / 2.
double predict_match(const MatchModel& model, std::span<const double> ss, std::span<const double> sp);

// Threshold maximizing match-class F1 on `validation`; stores and returns it.
double fit_threshold(MatchModel& model, std::span<const MatchExample> validation);

struct MatchEvaluation {
  roles::ClassMetrics pooled;  // match class over all pairs
  // Match-class metrics macro-averaged over SSs and over SPs.
  roles::ClassMetrics ss;
  roles::ClassMetrics sp;
};

MatchEvaluation evaluate_matches(const MatchModel& model, std::span<const MatchExample> test);

std::string save_match_model(const MatchModel& model);
MatchModel load_match_model(std::string_view json_text);

// Entities and labeled pairs with train/validation/test splits. Inputs are
// assembled per configuration so one dataset serves every ablation row.
struct MatchDataset {
  std::vector<InputParts> seekers;
  std::vector<InputParts> providers;
  struct Pair {
    int ss = 0;
    int sp = 0;
    int label = 0;
  };
  std::vector<Pair> train;
  std::vector<Pair> validation;
  std::vector<Pair> test;
};

std::vector<MatchExample> materialize(const MatchDataset& data, const std::vector<MatchDataset::Pair>& pairs,
                                      const AblationFlags& flags);

struct AblationRow {
  std::string config;
  MatchEvaluation eval;
};

// Trains one model per configuration (sharing every other setting) and
// evaluates it on the test split.
std::vector<AblationRow> run_ablation(const MatchDataset& data, const MatcherConfig& base,
                                      std::span<const AblationFlags> configs);

// config,precision_ss,precision_sp,recall_ss,recall_sp,f1_ss,f1_sp
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

}  // namespace kimatch::matcher
