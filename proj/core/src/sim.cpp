#include "kimatch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "kimatch/error.hpp"

namespace kimatch::sim {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "R";
    case Strategy::ProbabilisticGreedy: return "PG";
    case Strategy::KnowledgeInfused: return "KI";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "R" || name == "r" || name == "random") return Strategy::Random;
  if (name == "PG" || name == "pg" || name == "greedy") return Strategy::ProbabilisticGreedy;
  if (name == "KI" || name == "ki" || name == "knowledge") return Strategy::KnowledgeInfused;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy: " + std::string(name));
}

void SimConfig::validate() const {
  if (num_seekers < 1 || num_providers < 1 || max_matches < 1 || num_conditions < 1)
    throw Error(ErrorCode::InvalidArgument, "N, M, K and p must all be >= 1");
  if (stability_window < 1) throw Error(ErrorCode::InvalidArgument, "stability window must be >= 1");
  if (!(arrival_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "arrival_rate must be > 0");
  if (pg_temperature < 0.0 || ki_noise < 0.0 || tgm_tolerance < 0.0)
    throw Error(ErrorCode::InvalidArgument, "temperature, noise and tolerance must be >= 0");
}

double rating(std::span<const int> conditions, std::span<const double> recoveries) {
  if (conditions.size() != recoveries.size())
    throw Error(ErrorCode::DimensionMismatch, "conditions and recoveries differ in length");
  double num = 0.0;
  int den = 0;
  for (std::size_t p = 0; p < conditions.size(); ++p) {
    num += conditions[p] * recoveries[p];
    den += conditions[p];
  }
  if (den == 0) throw Error(ErrorCode::NoConditions, "seeker has no conditions");
  return num / den;
}

SimState::SimState(const SimConfig& config, RatingFn rating_override)
    : config_(config), rating_override_(std::move(rating_override)), rng_(config.seed) {
  config_.validate();
  const int p = config_.num_conditions;
  providers_.resize(config_.num_providers);
  for (auto& sp : providers_) {
    sp.recoveries.resize(p);
    for (auto& r : sp.recoveries) r = rng_.uniform();
  }
  seekers_.resize(config_.num_seekers);
  for (auto& ss : seekers_) {
    ss.conditions.assign(p, 0);
    do {
      for (auto& c : ss.conditions) c = rng_.bernoulli(0.5) ? 1 : 0;
    } while (std::accumulate(ss.conditions.begin(), ss.conditions.end(), 0) == 0);
  }
  cache_ratings();
}

SimState::SimState(const SimConfig& config, std::vector<Seeker> seekers,
                   std::vector<Provider> providers, RatingFn rating_override)
    : config_(config),
      seekers_(std::move(seekers)),
      providers_(std::move(providers)),
      rating_override_(std::move(rating_override)),
      rng_(config.seed) {
  config_.num_seekers = static_cast<int>(seekers_.size());
  config_.num_providers = static_cast<int>(providers_.size());
  config_.validate();
  cache_ratings();
}

void SimState::cache_ratings() {
  const auto n = seekers_.size();
  const auto m = providers_.size();
  observed_sum_.assign(m, 0.0);
  observed_count_.assign(m, 0);
  // Separate stream so agent draws do not depend on the strategy.
  knowledge_noise_.clear();
  if (config_.strategy == Strategy::KnowledgeInfused && config_.ki_noise > 0.0) {
    Rng noise_rng(config_.seed ^ 0x6b6e6f776c656467ULL);
    knowledge_noise_.resize(n * m);
    for (auto& e : knowledge_noise_) e = noise_rng.uniform(-config_.ki_noise, config_.ki_noise);
  }
  rating_cache_.resize(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      rating_cache_[i * m + j] =
          rating_override_ ? rating_override_(static_cast<int>(i), static_cast<int>(j))
                           : rating(seekers_[i].conditions, providers_[j].recoveries);
}

double SimState::true_rating(int ss, int sp) const {
  return rating_cache_[static_cast<std::size_t>(ss) * providers_.size() + sp];
}

double SimState::observed_estimate(int sp) const {
  return observed_count_[sp] == 0 ? 0.5 : observed_sum_[sp] / observed_count_[sp];
}

double SimState::knowledge_estimate(int ss, int sp) const {
  const double r = true_rating(ss, sp);
  if (knowledge_noise_.empty()) return r;
  return r + knowledge_noise_[static_cast<std::size_t>(ss) * providers_.size() + sp];
}

void SimState::set_busy(int sp, bool busy) { providers_[sp].busy = busy; }

int SimState::idle_count() const {
  return static_cast<int>(std::count_if(providers_.begin(), providers_.end(),
                                        [](const Provider& p) { return !p.busy; }));
}

void SimState::record(int ss, int sp, double r) {
  seekers_[ss].partners.push_back(sp);
  seekers_[ss].ratings.push_back(r);
  observed_sum_[sp] += r;
  ++observed_count_[sp];
}

namespace {

int select_random(SimState& state, const std::vector<int>& idle) {
  return idle[state.rng().index(idle.size())];
}

int select_greedy(SimState& state, const std::vector<int>& idle) {
  std::vector<double> est(idle.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < idle.size(); ++i) {
    est[i] = state.observed_estimate(idle[i]);
    best = std::max(best, est[i]);
  }
  const double tau = state.config().pg_temperature;
  if (tau <= 0.0) {
    return idle[std::distance(est.begin(), std::max_element(est.begin(), est.end()))];
  }
  double total = 0.0;
  for (auto& e : est) {
    e = std::exp((e - best) / tau);
    total += e;
  }
  double u = state.rng().uniform() * total;
  for (std::size_t i = 0; i < idle.size(); ++i) {
    u -= est[i];
    if (u < 0.0) return idle[i];
  }
  return idle.back();
}

int select_knowledge(const SimState& state, const std::vector<int>& idle, int ss) {
  int best_sp = idle.front();
  double best = -std::numeric_limits<double>::infinity();
  for (int sp : idle) {
    const double estimate = state.knowledge_estimate(ss, sp);
    if (estimate > best) {
      best = estimate;
      best_sp = sp;
    }
  }
  return best_sp;
}

}  // namespace

int select(Strategy strategy, SimState& state, int ss) {
  std::vector<int> idle;
  idle.reserve(state.providers().size());
  for (std::size_t j = 0; j < state.providers().size(); ++j)
    if (!state.providers()[j].busy) idle.push_back(static_cast<int>(j));
  if (idle.empty()) throw Error(ErrorCode::NoIdleSP, "no idle support provider");
  switch (strategy) {
    case Strategy::Random: return select_random(state, idle);
    case Strategy::ProbabilisticGreedy: return select_greedy(state, idle);
    case Strategy::KnowledgeInfused: return select_knowledge(state, idle, ss);
  }
  return idle.front();
}

SimTrace run(const SimConfig& config, RatingFn rating_override) {
  SimState state(config, std::move(rating_override));
  const int n = config.num_seekers;
  const int m = config.num_providers;

  SimTrace trace;
  trace.num_seekers = n;
  trace.num_providers = m;
  trace.max_matches = config.max_matches;
  trace.churned.assign(n, false);

  std::vector<int> active;
  std::vector<int> waiting;
  int next_arrival = 0;
  for (int step = 0; next_arrival < n || !active.empty(); ++step) {
    const auto due = static_cast<int>(std::floor((step + 1) * config.arrival_rate + 1e-9));
    while (next_arrival < std::min(due, n)) active.push_back(next_arrival++);
    for (int j = 0; j < m; ++j) state.set_busy(j, false);

    // Earlier arrivals initiate first.
    waiting.clear();
    int used = 0;
    for (int ss : active) {
      if (used == m) {
        waiting.push_back(ss);
        continue;
      }
      const int sp = select(config.strategy, state, ss);
      state.set_busy(sp, true);
      ++used;
      const double r = state.true_rating(ss, sp);
      state.record(ss, sp, r);
      trace.events.push_back({step, ss, sp, r});
      if (static_cast<int>(state.seekers()[ss].ratings.size()) >= config.max_matches) continue;
      if (r < config.churn_threshold) {
        trace.churned[ss] = true;
        continue;
      }
      waiting.push_back(ss);
    }
    trace.idle_per_step.push_back(m - used);
    active.swap(waiting);
  }
  return trace;
}

std::vector<std::vector<double>> ratings_by_seeker(const SimTrace& trace) {
  std::vector<std::vector<double>> out(trace.num_seekers);
  for (const auto& e : trace.events) out[e.ss].push_back(e.rating);
  return out;
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (xs.size() - 1);
}

double rating_stability(const SimTrace& trace, int window) {
  const auto per_seeker = ratings_by_seeker(trace);
  double total = 0.0;
  int counted = 0;
  for (const auto& rs : per_seeker) {
    if (rs.empty()) continue;
    const std::size_t w = std::min<std::size_t>(window, rs.size());
    const std::span<const double> tail(rs.data() + rs.size() - w, w);
    total += std::log(std::max(sample_variance(tail), kVarianceFloor));
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

double idle_sps(const SimTrace& trace) {
  if (trace.idle_per_step.empty() || trace.num_providers == 0) return 0.0;
  double total = 0.0;
  for (int idle : trace.idle_per_step) total += static_cast<double>(idle) / trace.num_providers;
  return 100.0 * total / trace.idle_per_step.size();
}

std::optional<int> time_to_good_match(std::span<const double> ratings, double tolerance) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < ratings.size(); ++t) {
    best = std::max(best, ratings[t]);
    bool settled = true;
    for (std::size_t j = t; j < ratings.size() && settled; ++j) settled = std::abs(ratings[j] - best) <= tolerance;
    if (settled) return static_cast<int>(t + 1);
  }
  return std::nullopt;
}

TgmSummary tgm(const SimTrace& trace, double tolerance) {
  const auto per_seeker = ratings_by_seeker(trace);
  TgmSummary out;
  double total = 0.0;
  int counted = 0;
  int beyond = 0;
  for (int i = 0; i < trace.num_seekers; ++i) {
    const auto& rs = per_seeker[i];
    if (rs.empty()) {
      out.per_seeker.push_back(std::nullopt);
      continue;
    }
    const bool churned = i < static_cast<int>(trace.churned.size()) && trace.churned[i];
    std::optional<int> t = churned ? std::nullopt : time_to_good_match(rs, tolerance);
    if (t && *t > trace.max_matches) t.reset();
    out.per_seeker.push_back(t);
    total += t ? *t : trace.max_matches + 1;
    beyond += t ? 0 : 1;
    ++counted;
  }
  if (counted > 0) {
    out.mean = total / counted;
    out.gt_k_fraction = static_cast<double>(beyond) / counted;
  }
  return out;
}

ReportRow measure(const SimConfig& config, const SimTrace& trace) {
  const auto t = tgm(trace, config.tgm_tolerance);
  return {config.strategy, config.seed, rating_stability(trace, config.stability_window),
          idle_sps(trace), t.mean, t.gt_k_fraction};
}

const ReportRow& SimReport::mean_for(Strategy s) const {
  for (const auto& r : means)
    if (r.strategy == s) return r;
  throw Error(ErrorCode::InvalidArgument, "strategy not in report");
}

SimReport compare(const SimConfig& base, std::span<const Strategy> strategies,
                  std::span<const std::uint64_t> seeds, unsigned max_threads) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "compare needs at least one seed");
  base.validate();
  struct Job {
    SimConfig config;
    ReportRow row;
  };
  std::vector<Job> jobs;
  for (auto s : strategies)
    for (auto seed : seeds) {
      SimConfig c = base;
      c.strategy = s;
      c.seed = seed;
      jobs.push_back({c, {}});
    }

  if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());
  std::size_t next = 0;
  while (next < jobs.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned t = 0; t < max_threads && next < jobs.size(); ++t, ++next) {
      Job* job = &jobs[next];
      batch.push_back(std::async(std::launch::async,
                                 [job] { job->row = measure(job->config, run(job->config)); }));
    }
    for (auto& f : batch) f.get();
  }

  SimReport report;
  for (const auto& j : jobs) report.rows.push_back(j.row);
  for (auto s : strategies) {
    ReportRow mean{s, 0, 0, 0, 0, 0};
    for (const auto& r : report.rows) {
      if (r.strategy != s) continue;
      mean.stability += r.stability;
      mean.idle_pct += r.idle_pct;
      mean.tgm_mean += r.tgm_mean;
      mean.tgm_gt_k_fraction += r.tgm_gt_k_fraction;
    }
    const double k = static_cast<double>(seeds.size());
    mean.stability /= k;
    mean.idle_pct /= k;
    mean.tgm_mean /= k;
    mean.tgm_gt_k_fraction /= k;
    report.means.push_back(mean);
  }
  return report;
}

void write_csv(std::ostream& out, const SimReport& report, bool include_means) {
  out << "strategy,seed,stability,idle_pct,tgm_mean,tgm_gtK_fraction\n";
  auto line = [&](const ReportRow& r, const std::string& seed) {
    out << to_string(r.strategy) << ',' << seed << ',' << r.stability << ',' << r.idle_pct << ','
        << r.tgm_mean << ',' << r.tgm_gt_k_fraction << '\n';
  };
  const auto old_precision = out.precision(10);
  for (const auto& r : report.rows) line(r, std::to_string(r.seed));
  if (include_means)
    for (const auto& r : report.means) line(r, "mean");
  out.precision(old_precision);
}

}  // namespace kimatch::sim
