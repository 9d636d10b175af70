#pragma once

// Matching-market simulation: support seekers (SS) arrive over time and are
// matched one step at a time with support providers (SP). Each match yields a
// rating from the SS's conditions and the SP's recoveries. Three selection
// strategies are compared on rating stability, idle providers and time to a
// good match (TGM).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kimatch/random.hpp"

namespace kimatch::sim {

enum class Strategy { Random, ProbabilisticGreedy, KnowledgeInfused };

std::string_view to_string(Strategy s);
// Accepts "R"/"random", "PG"/"pg"/"greedy", "KI"/"ki"/"knowledge".
Strategy parse_strategy(std::string_view name);

struct SimConfig {
  int num_seekers = 10000;
  int num_providers = 108;
  int max_matches = 20;
  int num_conditions = 12;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::KnowledgeInfused;
  int stability_window = 20;
  double pg_temperature = 0.1;
  double ki_noise = 0.05;
  // Mean number of new seekers admitted per step, in index order.
  double arrival_rate = 3.25;
  // A seeker whose rating falls below this leaves the platform.
  double churn_threshold = 0.53;
  double tgm_tolerance = 0.05;

  void validate() const;
};

struct MatchEvent {
  int step = 0;
  int ss = 0;
  int sp = 0;
  double rating = 0.0;

  bool operator==(const MatchEvent&) const = default;
};

struct SimTrace {
  int num_seekers = 0;
  int num_providers = 0;
  int max_matches = 0;
  std::vector<MatchEvent> events;
  // Providers that served nobody during each step.
  std::vector<int> idle_per_step;
  // Seekers that left before completing max_matches.
  std::vector<bool> churned;

  bool operator==(const SimTrace&) const = default;
};

// Mean recovery over the conditions the seeker has. Throws NoConditions when
// the seeker has none.
double rating(std::span<const int> conditions, std::span<const double> recoveries);

struct Seeker {
  std::vector<int> conditions;
  std::vector<double> ratings;
  std::vector<int> partners;
};

struct Provider {
  std::vector<double> recoveries;
  bool busy = false;
};

// Optional replacement for the synthetic rating (e.g. learned match scores).
using RatingFn = std::function<double(int ss, int sp)>;

class SimState {
 public:
  // Draws agents from the config's seed.
  explicit SimState(const SimConfig& config, RatingFn rating_override = {});
  // Fixture constructor with explicit agents.
  SimState(const SimConfig& config, std::vector<Seeker> seekers, std::vector<Provider> providers,
           RatingFn rating_override = {});

  const SimConfig& config() const { return config_; }
  std::span<const Seeker> seekers() const { return seekers_; }
  std::span<const Provider> providers() const { return providers_; }

  double true_rating(int ss, int sp) const;
  // Running mean of every rating observed so far for `sp`; 0.5 when unobserved.
  double observed_estimate(int sp) const;
  // True rating plus a fixed per-pair error drawn once from U(-eta, eta).
  double knowledge_estimate(int ss, int sp) const;

  void set_busy(int sp, bool busy);
  int idle_count() const;
  void record(int ss, int sp, double r);

  Rng& rng() { return rng_; }

 private:
  void cache_ratings();

  SimConfig config_;
  std::vector<Seeker> seekers_;
  std::vector<Provider> providers_;
  RatingFn rating_override_;
  std::vector<double> rating_cache_;
  std::vector<double> knowledge_noise_;
  std::vector<double> observed_sum_;
  std::vector<int> observed_count_;
  Rng rng_;
};

// Picks an idle provider for `ss`. Throws NoIdleSP when every provider is busy.
int select(Strategy strategy, SimState& state, int ss);

SimTrace run(const SimConfig& config, RatingFn rating_override = {});

// Ratings grouped per seeker, in match order.
std::vector<std::vector<double>> ratings_by_seeker(const SimTrace& trace);

// Sample variance (n-1); 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

inline constexpr double kVarianceFloor = 1e-20;

// Mean over seekers of log(max(var(last `window` ratings), floor)).
double rating_stability(const SimTrace& trace, int window = 20);

// Time-average of idle providers as a percentage of all providers.
double idle_sps(const SimTrace& trace);

// 1-based index t of the first match such that every rating from t on lies
// within `tolerance` of the best rating among the first t. A later rating that
// beats that best by more than the tolerance means the seeker had not settled
// yet. nullopt when no such t exists (or the sequence is empty).
std::optional<int> time_to_good_match(std::span<const double> ratings, double tolerance);

struct TgmSummary {
  // nullopt means ">K": the seeker churned or never settled.
  std::vector<std::optional<int>> per_seeker;
  // ">K" entries counted as K + 1.
  double mean = 0.0;
  double gt_k_fraction = 0.0;
};

TgmSummary tgm(const SimTrace& trace, double tolerance = 0.05);

struct ReportRow {
  Strategy strategy = Strategy::Random;
  std::uint64_t seed = 0;
  double stability = 0.0;
  double idle_pct = 0.0;
  double tgm_mean = 0.0;
  double tgm_gt_k_fraction = 0.0;

  bool operator==(const ReportRow&) const = default;
};

struct SimReport {
  std::vector<ReportRow> rows;   // ordered by (strategy, seed)
  std::vector<ReportRow> means;  // one per strategy, seed field unused

  const ReportRow& mean_for(Strategy s) const;
};

ReportRow measure(const SimConfig& config, const SimTrace& trace);

// Runs every (strategy, seed) pair on top of `base`; runs execute in parallel
// and are merged in (strategy, seed) order.
SimReport compare(const SimConfig& base, std::span<const Strategy> strategies,
                  std::span<const std::uint64_t> seeds, unsigned max_threads = 0);

void write_csv(std::ostream& out, const SimReport& report, bool include_means = true);

}  // namespace kimatch::sim
