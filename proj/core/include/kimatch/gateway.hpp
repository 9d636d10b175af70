#pragma once

// Moderator workflow service: an SS queue, top-k labeled SP recommendations,
// match confirmation with a busy set, and confidence feedback. Every mutation
// is appended to a JSON-lines event log before it is applied, and restarting
// from the log (plus the latest snapshot) rebuilds the same state.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "kimatch/labeler.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/pipeline.hpp"
#include "kimatch/roles.hpp"
#include "kimatch/textproc.hpp"

namespace kimatch::gateway {

struct ProviderProfile {
  std::string id;
  std::string text;
};

// Reads {"id", "text"} objects, one per line.
std::vector<ProviderProfile> read_providers_file(const std::string& path);

struct Contribution {
  std::string feature;
  double value = 0.0;  // score drop when the feature is occluded
};

struct RecommendationItem {
  std::string sp_id;
  double score = 0.0;
  std::optional<labeler::SupportLabel> label;
  std::string label_error;
  std::vector<Contribution> explanation;
};

struct Recommendation {
  std::string ss_id;
  int k = 0;
  std::vector<RecommendationItem> items;
};

struct SsRecord {
  std::string id;
  std::string user_id;
  std::string text;
  double p_ss = 0.0;
  std::set<textproc::Condition> conditions;
  std::int64_t ingested_at = 0;
  bool queued = true;
  std::optional<Recommendation> latest;
};

struct FeedbackRecord {
  std::string moderator;
  std::string ss_id;
  std::vector<std::string> selected;
  int confidence = 0;
  std::string cohort;
  // Filled from the SS's tagged condition when the SS has exactly one.
  std::optional<textproc::Condition> condition;
  std::int64_t timestamp = 0;
  std::string idempotency_key;
};

struct ConditionAggregate {
  std::size_t records = 0;
  double mean_selected = 0.0;
  double mean_confidence = 0.0;
};

// One row per cohort, split by condition.
struct CohortAggregate {
  std::string cohort;
  std::map<textproc::Condition, ConditionAggregate> by_condition;
};

struct IdleStats {
  std::size_t idle = 0;
  std::size_t total = 0;
  double percent = 100.0;
};

struct BusyEntry {
  std::string ss_id;
  std::int64_t since = 0;
};

struct ServiceOptions {
  std::filesystem::path state_dir = "state";
  double ss_threshold = 0.5;
  int snapshot_every = 50;  // events between snapshots; 0 disables
  std::int64_t release_ttl_seconds = 0;  // 0 disables automatic release
  int default_k = 4;
  std::function<std::int64_t()> clock;  // unix seconds; system clock when empty
};

// Models and resources the live operations need. Replay needs none of them:
// every logged event carries its computed outcome.
struct ServiceModels {
  const pipeline::Resources* resources = nullptr;
  std::optional<roles::RoleModel> roles;  // no SS filter without it
  std::optional<matcher::MatchModel> matcher;  // recommend raises NoModel without it
  std::unique_ptr<labeler::NliBackend> nli;
};

ServiceOptions service_options(const config::Json& cfg);

class MatchService {
 public:
  MatchService(std::vector<ProviderProfile> providers, ServiceModels models, ServiceOptions options);
  ~MatchService();

  MatchService(const MatchService&) = delete;
  MatchService& operator=(const MatchService&) = delete;

  // Zero-based queue position. A post already known keeps its record and
  // position. Throws RejectedNotSS, EmptyText, InvalidArgument.
  std::size_t enqueue_ss(const std::string& id, const std::string& user_id, const std::string& text);

  std::vector<SsRecord> queue() const;
  SsRecord ss(const std::string& id) const;  // UnknownSS

  // Top-k idle SPs by match score, ties broken by sp_id. k <= 0 uses the
  // default. Throws UnknownSS, NoModel.
  Recommendation recommend(const std::string& ss_id, int k = 0);

  // Checks in order: UnknownSP, SPBusy, UnknownSS, NotRecommended.
  void confirm_match(const std::string& ss_id, const std::string& sp_id, const std::string& moderator);

  // Returns false when the SP was already idle. Throws UnknownSP.
  bool release(const std::string& sp_id);

  // Returns the record's sequence number; a repeated idempotency key returns
  // the original one. Throws BadConfidence, UnknownSS, NotRecommended.
  std::uint64_t record_feedback(FeedbackRecord record);

  std::vector<CohortAggregate> aggregate_feedback() const;
  std::vector<FeedbackRecord> feedback() const;
  IdleStats idle_stats();
  std::map<std::string, BusyEntry> busy() const;
  const std::vector<ProviderProfile>& providers() const { return providers_; }

  // Releases SPs busy for longer than the TTL; returns how many.
  std::size_t sweep_expired();

  void snapshot();
  std::uint64_t last_seq() const;
  bool has_model() const { return models_.matcher.has_value(); }

  // Canonical dump of queue, records, busy set, feedback and aggregates.
  nlohmann::json state_json() const;

 private:
  struct State;

  std::int64_t now() const;
  void open_log();
  void commit(nlohmann::json event);  // caller holds the unique lock
  void write_snapshot_locked();
  const std::vector<double>& sp_input(std::size_t index) const;
  std::vector<double> ss_input(const SsRecord& record) const;
  std::vector<Contribution> explain(const std::vector<double>& ss, const std::vector<double>& sp,
                                    double base) const;
  std::size_t sweep_locked();

  std::vector<ProviderProfile> providers_;
  std::map<std::string, std::size_t> provider_index_;
  ServiceModels models_;
  ServiceOptions options_;
  std::vector<std::vector<double>> sp_inputs_;
  std::unique_ptr<State> state_;
  mutable std::shared_mutex mutex_;
  std::FILE* log_ = nullptr;
  int since_snapshot_ = 0;
};

// JSON forms used by the event log and the HTTP API.
nlohmann::json to_json(const Recommendation& r);
nlohmann::json to_json(const SsRecord& r);
nlohmann::json to_json(const FeedbackRecord& r);
nlohmann::json to_json(const std::vector<CohortAggregate>& rows);
nlohmann::json to_json(const IdleStats& s);
FeedbackRecord feedback_from_json(const nlohmann::json& j);

struct HttpOptions {
  std::string moderator_token;  // empty: no authentication
  std::string console_dir;  // static files served at / when set
};

// HTTP JSON front end. Errors are returned as {"code", "message"}.
class HttpServer {
 public:
  HttpServer(MatchService& service, HttpOptions options);
  ~HttpServer();

  // Blocks until stop(). Returns false if the address could not be bound.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status for an error code.
int http_status(ErrorCode code);

}  // namespace kimatch::gateway
