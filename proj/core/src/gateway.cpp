#include "kimatch/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <spdlog/spdlog.h>

#include "kimatch/error.hpp"
#include "kimatch/knowledge.hpp"
#include "kimatch/tokenizer.hpp"

namespace kimatch::gateway {

using nlohmann::json;

namespace {

constexpr int kExplanationSize = 3;

std::string condition_name(textproc::Condition c) { return std::string(textproc::to_string(c)); }

textproc::Condition condition_from(const json& j) {
  const auto c = textproc::parse_condition(j.get<std::string>());
  if (!c) throw Error(ErrorCode::FormatError, "unknown condition: " + j.get<std::string>());
  return *c;
}

RecommendationItem item_from_json(const json& j) {
  RecommendationItem it;
  it.sp_id = j.at("sp_id").get<std::string>();
  it.score = j.at("score").get<double>();
  if (j.contains("label") && !j["label"].is_null()) it.label = labeler::parse_support_label(j["label"].get<std::string>());
  it.label_error = j.value("label_error", std::string());
  for (const auto& c : j.value("explanation", json::array()))
    it.explanation.push_back({c.at("feature").get<std::string>(), c.at("value").get<double>()});
  return it;
}

Recommendation recommendation_from_json(const json& j) {
  Recommendation r;
  r.ss_id = j.at("ss_id").get<std::string>();
  r.k = j.at("k").get<int>();
  for (const auto& it : j.at("items")) r.items.push_back(item_from_json(it));
  return r;
}

SsRecord ss_from_json(const json& j) {
  SsRecord r;
  r.id = j.at("id").get<std::string>();
  r.user_id = j.value("user_id", std::string());
  r.text = j.at("text").get<std::string>();
  r.p_ss = j.at("p_ss").get<double>();
  for (const auto& c : j.value("conditions", json::array())) r.conditions.insert(condition_from(c));
  r.ingested_at = j.value("ingested_at", std::int64_t{0});
  r.queued = j.value("queued", true);
  if (j.contains("latest") && !j["latest"].is_null()) r.latest = recommendation_from_json(j["latest"]);
  return r;
}

bool recommended(const SsRecord& r, const std::string& sp_id) {
  if (!r.latest) return false;
  return std::any_of(r.latest->items.begin(), r.latest->items.end(),
                     [&](const RecommendationItem& it) { return it.sp_id == sp_id; });
}

}  // namespace

json to_json(const Recommendation& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    json e{{"sp_id", it.sp_id}, {"score", it.score}};
    e["label"] = it.label ? json(std::string(labeler::to_string(*it.label))) : json(nullptr);
    if (!it.label_error.empty()) e["label_error"] = it.label_error;
    json ex = json::array();
    for (const auto& c : it.explanation) ex.push_back({{"feature", c.feature}, {"value", c.value}});
    e["explanation"] = std::move(ex);
    items.push_back(std::move(e));
  }
  return {{"ss_id", r.ss_id}, {"k", r.k}, {"items", std::move(items)}};
}

json to_json(const SsRecord& r) {
  json conds = json::array();
  for (auto c : r.conditions) conds.push_back(condition_name(c));
  json j{{"id", r.id},         {"user_id", r.user_id},         {"text", r.text},    {"p_ss", r.p_ss},
         {"conditions", conds}, {"ingested_at", r.ingested_at}, {"queued", r.queued}};
  j["latest"] = r.latest ? to_json(*r.latest) : json(nullptr);
  return j;
}

json to_json(const FeedbackRecord& r) {
  json j{{"moderator", r.moderator},   {"ss_id", r.ss_id},    {"selected", r.selected},
         {"confidence", r.confidence}, {"cohort", r.cohort},  {"timestamp", r.timestamp},
         {"idempotency_key", r.idempotency_key}};
  j["condition"] = r.condition ? json(condition_name(*r.condition)) : json(nullptr);
  return j;
}

FeedbackRecord feedback_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::FormatError, "feedback must be a JSON object");
  FeedbackRecord r;
  try {
    r.moderator = j.value("moderator", std::string());
    r.ss_id = j.at("ss_id").get<std::string>();
    r.selected = j.value("selected", std::vector<std::string>{});
    r.confidence = j.at("confidence").get<int>();
    r.cohort = j.value("cohort", std::string());
    if (j.contains("condition") && !j["condition"].is_null()) r.condition = condition_from(j["condition"]);
    r.timestamp = j.value("timestamp", std::int64_t{0});
    r.idempotency_key = j.value("idempotency_key", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad feedback record: ") + e.what());
  }
  return r;
}

json to_json(const std::vector<CohortAggregate>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json conds = json::object();
    for (const auto& [c, a] : row.by_condition)
      conds[condition_name(c)] = {
          {"records", a.records}, {"mean_selected", a.mean_selected}, {"mean_confidence", a.mean_confidence}};
    out.push_back({{"cohort", row.cohort}, {"conditions", std::move(conds)}});
  }
  return out;
}

json to_json(const IdleStats& s) { return {{"idle", s.idle}, {"total", s.total}, {"percent", s.percent}}; }

std::vector<ProviderProfile> read_providers_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open providers file: " + path);
  std::vector<ProviderProfile> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      ProviderProfile p{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
      if (!seen.insert(p.id).second) throw Error(ErrorCode::FormatError, "duplicate provider id: " + p.id);
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

ServiceOptions service_options(const config::Json& cfg) {
  ServiceOptions o;
  const auto g = cfg.value("gateway", json::object());
  // State is runtime output, so it is relative to the working directory.
  o.state_dir = g.value("state_dir", std::string("state"));
  o.ss_threshold = g.value("ss_threshold", o.ss_threshold);
  o.snapshot_every = g.value("snapshot_every", o.snapshot_every);
  o.release_ttl_seconds = g.value("release_ttl_seconds", o.release_ttl_seconds);
  o.default_k = g.value("default_k", o.default_k);
  return o;
}

// Everything replay must reconstruct.
struct MatchService::State {
  std::uint64_t seq = 0;
  std::map<std::string, SsRecord> records;
  std::vector<std::string> queue;
  std::map<std::string, BusyEntry> busy;
  std::vector<FeedbackRecord> feedback;
  std::map<std::string, std::uint64_t> keys;

  void apply(const json& ev) {
    const auto type = ev.at("type").get<std::string>();
    const auto ts = ev.at("ts").get<std::int64_t>();
    if (type == "ingest") {
      auto r = ss_from_json(ev.at("ss"));
      queue.push_back(r.id);
      records[r.id] = std::move(r);
    } else if (type == "recommend") {
      auto r = recommendation_from_json(ev.at("recommendation"));
      records.at(r.ss_id).latest = std::move(r);
    } else if (type == "confirm") {
      const auto ss_id = ev.at("ss_id").get<std::string>();
      busy[ev.at("sp_id").get<std::string>()] = {ss_id, ts};
      records.at(ss_id).queued = false;
      std::erase(queue, ss_id);
    } else if (type == "release") {
      busy.erase(ev.at("sp_id").get<std::string>());
    } else if (type == "feedback") {
      auto f = feedback_from_json(ev.at("record"));
      if (!f.idempotency_key.empty()) keys[f.idempotency_key] = ev.at("seq").get<std::uint64_t>();
      feedback.push_back(std::move(f));
    } else {
      throw Error(ErrorCode::FormatError, "unknown event type: " + type);
    }
    seq = ev.at("seq").get<std::uint64_t>();
  }

  json to_json() const {
    json recs = json::array();
    for (const auto& [id, r] : records) recs.push_back(gateway::to_json(r));
    json b = json::array();
    for (const auto& [sp, e] : busy) b.push_back({{"sp_id", sp}, {"ss_id", e.ss_id}, {"since", e.since}});
    json fb = json::array();
    for (const auto& f : feedback) fb.push_back(gateway::to_json(f));
    json k = json::object();
    for (const auto& [key, s] : keys) k[key] = s;
    return {{"seq", seq}, {"records", recs}, {"queue", queue}, {"busy", b}, {"feedback", fb}, {"keys", k}};
  }

  static State from_json(const json& j) {
    State s;
    s.seq = j.at("seq").get<std::uint64_t>();
    for (const auto& r : j.at("records")) {
      auto rec = ss_from_json(r);
      s.records[rec.id] = std::move(rec);
    }
    s.queue = j.at("queue").get<std::vector<std::string>>();
    for (const auto& b : j.at("busy"))
      s.busy[b.at("sp_id").get<std::string>()] = {b.at("ss_id").get<std::string>(), b.at("since").get<std::int64_t>()};
    for (const auto& f : j.at("feedback")) s.feedback.push_back(feedback_from_json(f));
    for (const auto& [key, v] : j.at("keys").items()) s.keys[key] = v.get<std::uint64_t>();
    return s;
  }
};

MatchService::MatchService(std::vector<ProviderProfile> providers, ServiceModels models, ServiceOptions options)
    : providers_(std::move(providers)),
      models_(std::move(models)),
      options_(std::move(options)),
      state_(std::make_unique<State>()) {
  for (std::size_t i = 0; i < providers_.size(); ++i)
    if (!provider_index_.emplace(providers_[i].id, i).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate provider id: " + providers_[i].id);
  if (!models_.nli) models_.nli = std::make_unique<labeler::HeuristicNli>();
  if (models_.matcher && !models_.resources)
    throw Error(ErrorCode::InvalidArgument, "a match model needs pipeline resources");
  if (models_.matcher) {
    sp_inputs_.reserve(providers_.size());
    for (const auto& p : providers_) {
      const double p_ss =
          models_.roles ? roles::predict_role(*models_.roles, models_.resources->role_input(p.text)).p_ss : 0.0;
      sp_inputs_.push_back(
          matcher::build_input(models_.resources->input_parts(p.text, p_ss), models_.matcher->config.flags));
    }
  }
  open_log();
}

MatchService::~MatchService() {
  if (log_) std::fclose(log_);
}

std::int64_t MatchService::now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void MatchService::open_log() {
  namespace fs = std::filesystem;
  fs::create_directories(options_.state_dir);
  const auto snap = options_.state_dir / "snapshot.json";
  const auto log_path = options_.state_dir / "events.jsonl";
  if (fs::exists(snap)) {
    std::ifstream in(snap);
    try {
      *state_ = State::from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, "corrupt snapshot " + snap.string() + ": " + e.what());
    }
  }

  std::size_t replayed = 0;
  if (fs::exists(log_path)) {
    std::ifstream in(log_path, std::ios::binary);
    std::string line;
    std::uintmax_t good = 0, offset = 0;
    bool torn = false;
    while (std::getline(in, line)) {
      const bool complete = !in.eof();
      offset += line.size() + (complete ? 1 : 0);
      json ev;
      try {
        ev = json::parse(line);
      } catch (const json::exception&) {
        if (in.peek() == std::char_traits<char>::eof()) {
          torn = true;
          break;
        }
        throw Error(ErrorCode::FormatError, "corrupt event log entry at byte " + std::to_string(good));
      }
      if (!complete) {
        // A parseable final line without its newline is still a partial write.
        torn = true;
        break;
      }
      good = offset;
      if (ev.at("seq").get<std::uint64_t>() <= state_->seq) continue;
      if (ev.at("seq").get<std::uint64_t>() != state_->seq + 1)
        throw Error(ErrorCode::FormatError, "event log gap after seq " + std::to_string(state_->seq));
      state_->apply(ev);
      ++replayed;
    }
    in.close();
    if (torn) {
      spdlog::warn("dropping partial trailing event log entry in {}", log_path.string());
      fs::resize_file(log_path, good);
    }
  }
  if (replayed > 0) spdlog::info("replayed {} events (last seq {})", replayed, state_->seq);

  log_ = std::fopen(log_path.c_str(), "ab");
  if (!log_) throw Error(ErrorCode::IoError, "cannot open event log: " + log_path.string());
}

void MatchService::commit(json event) {
  event["seq"] = state_->seq + 1;
  if (!event.contains("ts")) event["ts"] = now();
  const auto line = event.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0)
    throw Error(ErrorCode::IoError, "event log write failed");
  state_->apply(event);
  if (options_.snapshot_every > 0 && ++since_snapshot_ >= options_.snapshot_every) write_snapshot_locked();
}

void MatchService::write_snapshot_locked() {
  since_snapshot_ = 0;
  const auto tmp = options_.state_dir / "snapshot.json.tmp";
  {
    std::ofstream out(tmp);
    out << state_->to_json().dump();
    if (!out) throw Error(ErrorCode::IoError, "snapshot write failed");
  }
  std::filesystem::rename(tmp, options_.state_dir / "snapshot.json");
}

void MatchService::snapshot() {
  std::unique_lock lock(mutex_);
  write_snapshot_locked();
}

std::uint64_t MatchService::last_seq() const {
  std::shared_lock lock(mutex_);
  return state_->seq;
}

std::size_t MatchService::sweep_locked() {
  if (options_.release_ttl_seconds <= 0) return 0;
  const auto t = now();
  std::vector<std::string> expired;
  for (const auto& [sp, e] : state_->busy)
    if (t - e.since >= options_.release_ttl_seconds) expired.push_back(sp);
  for (const auto& sp : expired) commit({{"type", "release"}, {"sp_id", sp}, {"reason", "ttl"}, {"ts", t}});
  return expired.size();
}

std::size_t MatchService::sweep_expired() {
  std::unique_lock lock(mutex_);
  return sweep_locked();
}

std::size_t MatchService::enqueue_ss(const std::string& id, const std::string& user_id, const std::string& text) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "SS id must not be empty");
  {
    std::shared_lock lock(mutex_);
    if (const auto it = state_->records.find(id); it != state_->records.end()) {
      const auto pos = std::find(state_->queue.begin(), state_->queue.end(), id);
      if (pos == state_->queue.end()) throw Error(ErrorCode::InvalidArgument, "SS already matched: " + id);
      return static_cast<std::size_t>(pos - state_->queue.begin());
    }
  }
  if (textproc::word_tokens(text).empty()) throw Error(ErrorCode::EmptyText, "SS post has no words");

  SsRecord r;
  r.id = id;
  r.user_id = user_id;
  r.text = text;
  r.p_ss = 1.0;
  if (models_.roles) {
    if (!models_.resources) throw Error(ErrorCode::InvalidArgument, "a role model needs pipeline resources");
    r.p_ss = roles::predict_role(*models_.roles, models_.resources->role_input(text)).p_ss;
  }
  if (r.p_ss < options_.ss_threshold)
    throw Error(ErrorCode::RejectedNotSS, "post " + id + " scored p_ss=" + std::to_string(r.p_ss));
  if (models_.resources) {
    const auto post = textproc::make_post(id, user_id, 0, text);
    r.conditions = textproc::tag_condition(post, models_.resources->anxiety(), models_.resources->depression(),
                                           models_.resources->filter().negation_window)
                       .conditions;
  }

  std::unique_lock lock(mutex_);
  sweep_locked();
  if (state_->records.contains(id)) {
    const auto pos = std::find(state_->queue.begin(), state_->queue.end(), id);
    if (pos == state_->queue.end()) throw Error(ErrorCode::InvalidArgument, "SS already matched: " + id);
    return static_cast<std::size_t>(pos - state_->queue.begin());
  }
  r.ingested_at = now();
  commit({{"type", "ingest"}, {"ss", to_json(r)}, {"ts", r.ingested_at}});
  return state_->queue.size() - 1;
}

std::vector<SsRecord> MatchService::queue() const {
  std::shared_lock lock(mutex_);
  std::vector<SsRecord> out;
  out.reserve(state_->queue.size());
  for (const auto& id : state_->queue) out.push_back(state_->records.at(id));
  return out;
}

SsRecord MatchService::ss(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = state_->records.find(id);
  if (it == state_->records.end()) throw Error(ErrorCode::UnknownSS, "unknown SS: " + id);
  return it->second;
}

const std::vector<double>& MatchService::sp_input(std::size_t index) const { return sp_inputs_.at(index); }

std::vector<double> MatchService::ss_input(const SsRecord& record) const {
  return matcher::build_input(models_.resources->input_parts(record.text, record.p_ss),
                              models_.matcher->config.flags);
}

std::vector<Contribution> MatchService::explain(const std::vector<double>& ss, const std::vector<double>& sp,
                                                double base) const {
  const auto& model = *models_.matcher;
  const auto& flags = model.config.flags;
  const std::size_t extra = (flags.psy ? knowledge::kPsyCategories.size() : 0) + (flags.role_prob ? 1 : 0) +
                            (flags.covid ? knowledge::kCovidCategories.size() : 0);
  struct Group {
    std::string name;
    std::size_t begin, end;
  };
  std::vector<Group> groups;
  std::size_t at = 0;
  if (flags.content) {
    groups.push_back({"content", 0, model.input_dim() - extra});
    at = model.input_dim() - extra;
  }
  if (flags.psy)
    for (auto c : knowledge::kPsyCategories) groups.push_back({std::string(knowledge::to_string(c)), at, ++at});
  if (flags.role_prob) groups.push_back({"role_prob", at, ++at});
  if (flags.covid)
    for (auto c : knowledge::kCovidCategories) groups.push_back({std::string(knowledge::to_string(c)), at, ++at});

  // Occlusion: set the group to its training mean in both inputs.
  std::vector<Contribution> out;
  for (const auto& g : groups) {
    auto a = ss, b = sp;
    for (std::size_t i = g.begin; i < g.end; ++i) a[i] = b[i] = model.input_shift[i];
    out.push_back({g.name, base - matcher::predict_match(model, a, b)});
  }
  std::sort(out.begin(), out.end(), [](const Contribution& x, const Contribution& y) {
    return x.value != y.value ? x.value > y.value : x.feature < y.feature;
  });
  if (out.size() > static_cast<std::size_t>(kExplanationSize)) out.resize(kExplanationSize);
  return out;
}

Recommendation MatchService::recommend(const std::string& ss_id, int k) {
  if (k <= 0) k = options_.default_k;
  if (!models_.matcher) throw Error(ErrorCode::NoModel, "no match model loaded");

  auto compute = [&](const SsRecord& rec, const std::map<std::string, BusyEntry>& busy) {
    const auto x = ss_input(rec);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < providers_.size(); ++i)
      if (!busy.contains(providers_[i].id))
        scored.emplace_back(matcher::predict_match(*models_.matcher, x, sp_input(i)), i);
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : providers_[a.second].id < providers_[b.second].id;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));

    std::vector<std::pair<std::string, std::string>> texts;
    for (const auto& [s, i] : scored) texts.emplace_back(providers_[i].id, providers_[i].text);
    const auto labels = labeler::label_recommendations(rec.text, texts, *models_.nli);

    Recommendation r;
    r.ss_id = rec.id;
    r.k = k;
    for (std::size_t j = 0; j < scored.size(); ++j) {
      RecommendationItem it;
      it.sp_id = providers_[scored[j].second].id;
      it.score = scored[j].first;
      it.label = labels[j].label;
      it.label_error = labels[j].message;
      it.explanation = explain(x, sp_input(scored[j].second), it.score);
      r.items.push_back(std::move(it));
    }
    return r;
  };

  // Score under the shared lock; commit only if nothing changed meanwhile.
  Recommendation r;
  std::uint64_t seen = 0;
  {
    std::shared_lock lock(mutex_);
    const auto it = state_->records.find(ss_id);
    if (it == state_->records.end()) throw Error(ErrorCode::UnknownSS, "unknown SS: " + ss_id);
    r = compute(it->second, state_->busy);
    seen = state_->seq;
  }
  std::unique_lock lock(mutex_);
  if (sweep_locked() > 0 || state_->seq != seen) r = compute(state_->records.at(ss_id), state_->busy);
  commit({{"type", "recommend"}, {"recommendation", to_json(r)}});
  return r;
}

void MatchService::confirm_match(const std::string& ss_id, const std::string& sp_id, const std::string& moderator) {
  std::unique_lock lock(mutex_);
  sweep_locked();
  if (!provider_index_.contains(sp_id)) throw Error(ErrorCode::UnknownSP, "unknown SP: " + sp_id);
  if (state_->busy.contains(sp_id)) throw Error(ErrorCode::SPBusy, "SP is busy: " + sp_id);
  const auto it = state_->records.find(ss_id);
  if (it == state_->records.end()) throw Error(ErrorCode::UnknownSS, "unknown SS: " + ss_id);
  if (!recommended(it->second, sp_id))
    throw Error(ErrorCode::NotRecommended, sp_id + " is not in the latest recommendation for " + ss_id);
  commit({{"type", "confirm"}, {"ss_id", ss_id}, {"sp_id", sp_id}, {"moderator", moderator}});
}

bool MatchService::release(const std::string& sp_id) {
  std::unique_lock lock(mutex_);
  if (!provider_index_.contains(sp_id)) throw Error(ErrorCode::UnknownSP, "unknown SP: " + sp_id);
  sweep_locked();
  if (!state_->busy.contains(sp_id)) return false;
  commit({{"type", "release"}, {"sp_id", sp_id}, {"reason", "manual"}});
  return true;
}

std::uint64_t MatchService::record_feedback(FeedbackRecord record) {
  std::unique_lock lock(mutex_);
  if (!record.idempotency_key.empty())
    if (const auto it = state_->keys.find(record.idempotency_key); it != state_->keys.end()) return it->second;
  if (record.confidence < 1 || record.confidence > 10)
    throw Error(ErrorCode::BadConfidence, "confidence must be in 1..10, got " + std::to_string(record.confidence));
  if (record.cohort.empty()) throw Error(ErrorCode::InvalidArgument, "feedback needs a cohort");
  const auto it = state_->records.find(record.ss_id);
  if (it == state_->records.end()) throw Error(ErrorCode::UnknownSS, "unknown SS: " + record.ss_id);
  std::set<std::string> distinct;
  for (const auto& sp : record.selected) {
    if (!distinct.insert(sp).second) throw Error(ErrorCode::InvalidArgument, "SP selected twice: " + sp);
    if (!recommended(it->second, sp))
      throw Error(ErrorCode::NotRecommended, sp + " was not recommended for " + record.ss_id);
  }
  if (!record.condition) {
    if (it->second.conditions.size() != 1)
      throw Error(ErrorCode::InvalidArgument, "feedback for " + record.ss_id + " must name its condition");
    record.condition = *it->second.conditions.begin();
  }
  if (record.timestamp == 0) record.timestamp = now();
  sweep_locked();
  commit({{"type", "feedback"}, {"record", to_json(record)}, {"ts", record.timestamp}});
  return state_->seq;
}

std::vector<FeedbackRecord> MatchService::feedback() const {
  std::shared_lock lock(mutex_);
  return state_->feedback;
}

std::vector<CohortAggregate> MatchService::aggregate_feedback() const {
  std::shared_lock lock(mutex_);
  struct Sum {
    std::size_t n = 0;
    double selected = 0.0, confidence = 0.0;
  };
  std::map<std::string, std::map<textproc::Condition, Sum>> sums;
  for (const auto& f : state_->feedback) {
    auto& s = sums[f.cohort][*f.condition];
    ++s.n;
    s.selected += static_cast<double>(f.selected.size());
    s.confidence += f.confidence;
  }
  std::vector<CohortAggregate> out;
  for (const auto& [cohort, by] : sums) {
    CohortAggregate row{cohort, {}};
    for (const auto& [c, s] : by) {
      const double n = static_cast<double>(s.n);
      row.by_condition[c] = {s.n, s.selected / n, s.confidence / n};
    }
    out.push_back(std::move(row));
  }
  return out;
}

IdleStats MatchService::idle_stats() {
  std::unique_lock lock(mutex_);
  sweep_locked();
  IdleStats s;
  s.total = providers_.size();
  std::size_t busy = 0;
  for (const auto& [sp, e] : state_->busy) busy += provider_index_.contains(sp) ? 1 : 0;
  s.idle = s.total - busy;
  s.percent = s.total == 0 ? 100.0 : 100.0 * static_cast<double>(s.idle) / static_cast<double>(s.total);
  return s;
}

std::map<std::string, BusyEntry> MatchService::busy() const {
  std::shared_lock lock(mutex_);
  return state_->busy;
}

json MatchService::state_json() const {
  json j;
  {
    std::shared_lock lock(mutex_);
    j = state_->to_json();
  }
  j["aggregates"] = to_json(aggregate_feedback());
  return j;
}

}  // namespace kimatch::gateway
