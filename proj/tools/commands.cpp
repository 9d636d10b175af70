#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <pthread.h>
#include <spdlog/spdlog.h>
#include <thread>

#include "kimatch/error.hpp"
#include "kimatch/features.hpp"
#include "kimatch/gateway.hpp"
#include "kimatch/labeler.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/pipeline.hpp"
#include "kimatch/random.hpp"
#include "kimatch/roles.hpp"
#include "kimatch/sim.hpp"
#include "kimatch/synth.hpp"

namespace kimatch::cli {

using nlohmann::json;

config::Json Common::load() const {
  auto all = overrides;
  if (!data_dir.empty()) all.push_back("data_dir=" + json(data_dir).dump());
  return config::load(config_path, all);
}

namespace {

// Writes to `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<textproc::Post> read_posts(const std::string& path) {
  if (path.empty() || path == "-") return textproc::read_corpus(std::cin);
  return textproc::read_corpus_file(path);
}

synth::MatchSynthConfig match_synth_config(const config::Json& cfg) {
  synth::MatchSynthConfig c;
  const auto s = cfg.value("synth", json::object());
  c.num_seekers = s.value("num_seekers", c.num_seekers);
  c.num_providers = s.value("num_providers", c.num_providers);
  c.num_clusters = s.value("num_clusters", c.num_clusters);
  c.words_per_text = s.value("words_per_text", c.words_per_text);
  c.knowledge_rate = s.value("knowledge_rate", c.knowledge_rate);
  c.concept_rate = s.value("concept_rate", c.concept_rate);
  c.seed = s.value("seed", c.seed);
  return c;
}

json entity_json(const synth::SyntheticEntity& e) {
  return {{"id", e.id}, {"text", e.text}, {"cluster", e.cluster}, {"role_prob", e.role_prob}};
}

json pairs_json(const std::vector<matcher::MatchDataset::Pair>& pairs) {
  json out = json::array();
  for (const auto& p : pairs) out.push_back({p.ss, p.sp, p.label});
  return out;
}

json match_data_json(const synth::SyntheticMatchData& d) {
  json seekers = json::array(), providers = json::array();
  for (const auto& e : d.seekers) seekers.push_back(entity_json(e));
  for (const auto& e : d.providers) providers.push_back(entity_json(e));
  return {{"seekers", seekers},
          {"providers", providers},
          {"train", pairs_json(d.train)},
          {"validation", pairs_json(d.validation)},
          {"test", pairs_json(d.test)}};
}

synth::SyntheticMatchData match_data_from_json(const json& j) {
  synth::SyntheticMatchData d;
  auto entities = [](const json& arr) {
    std::vector<synth::SyntheticEntity> out;
    for (const auto& e : arr)
      out.push_back({e.at("id").get<std::string>(), e.at("text").get<std::string>(), e.value("cluster", -1),
                     e.value("role_prob", 0.0)});
    return out;
  };
  d.seekers = entities(j.at("seekers"));
  d.providers = entities(j.at("providers"));
  auto pairs = [&](const json& arr) {
    std::vector<matcher::MatchDataset::Pair> out;
    for (const auto& p : arr) {
      matcher::MatchDataset::Pair pair{p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>()};
      if (pair.ss < 0 || pair.ss >= static_cast<int>(d.seekers.size()) || pair.sp < 0 ||
          pair.sp >= static_cast<int>(d.providers.size()))
        throw Error(ErrorCode::FormatError, "pair index out of range");
      out.push_back(pair);
    }
    return out;
  };
  d.train = pairs(j.at("train"));
  d.validation = pairs(j.at("validation"));
  d.test = pairs(j.at("test"));
  return d;
}

synth::SyntheticMatchData load_match_data(const config::Json& cfg, const pipeline::Resources& res,
                                          const std::string& path) {
  if (path.empty())
    return synth::generate_match_data(match_synth_config(cfg), res.dictionary(), res.anxiety(), res.depression());
  try {
    return match_data_from_json(json::parse(knowledge::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "dataset " + path + ": " + e.what());
  }
}

json metrics_json(const roles::ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json match_eval_json(const matcher::MatchEvaluation& e) {
  return {{"pooled", metrics_json(e.pooled)}, {"ss", metrics_json(e.ss)}, {"sp", metrics_json(e.sp)}};
}

}  // namespace

int cmd_tag(const Common& c, const IoPaths& io) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  auto posts = read_posts(io.input);
  for (auto& p : posts) p = res.tag(std::move(p));
  Output out(io.output);
  textproc::write_corpus(out.stream(), posts);
  spdlog::info("tagged {} posts", posts.size());
  return 0;
}

int cmd_ingest(const Common& c, const IoPaths& io) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  const auto posts = read_posts(io.input);
  const auto kept = textproc::filter_corpus(posts, res.taggers(), res.filter());
  Output out(io.output);
  textproc::write_corpus(out.stream(), kept);
  spdlog::info("kept {} of {} posts", kept.size(), posts.size());
  return 0;
}

int cmd_features(const Common& c, const IoPaths& io, const std::string& correlations, double alpha) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  auto posts = read_posts(io.input);
  std::vector<features::FeatureVector> fv;
  fv.reserve(posts.size());
  for (auto& p : posts) {
    // Untagged input is tagged on the fly so correlation labels exist.
    if (p.tags.conditions.empty() && p.tags.events.empty()) p = res.tag(std::move(p));
    fv.push_back(res.features_of(p.tokens));
  }

  Output out(io.output);
  auto& os = out.stream();
  os << "id";
  for (auto cat : knowledge::kPsyCategories) os << ',' << knowledge::to_string(cat);
  for (auto cat : knowledge::kCovidCategories) os << ',' << knowledge::to_string(cat);
  os << ",Emotion\n";
  os.precision(17);
  for (std::size_t i = 0; i < posts.size(); ++i) {
    os << posts[i].id;
    for (double v : fv[i].psy) os << ',' << v;
    for (double v : fv[i].covid) os << ',' << v;
    os << ',' << fv[i].emotion << '\n';
  }

  if (!correlations.empty()) {
    const auto table = features::correlate(posts, fv, alpha);
    std::ofstream cf(correlations);
    if (!cf) throw Error(ErrorCode::IoError, "cannot write " + correlations);
    features::write_csv(cf, table);
    for (const auto& [feature, cond] : table.degenerate)
      spdlog::warn("constant column skipped: {} / {}", feature, cond);
  }
  return 0;
}

int cmd_synth(const Common& c, const SynthArgs& args) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  Output out(args.output);
  auto& os = out.stream();
  if (args.kind == "roles") {
    synth::RoleCorpusConfig rc;
    rc.seed = args.seed;
    if (args.count > 0) rc.num_seekers = args.count;
    for (const auto& rp : synth::generate_role_posts(rc, res.anxiety(), res.depression()))
      os << json{{"id", rp.post.id},
                 {"user_id", rp.post.user_id},
                 {"timestamp", rp.post.timestamp},
                 {"text", rp.post.text},
                 {"role", rp.label == 1 ? "SS" : "SP"}}
                .dump()
         << '\n';
  } else if (args.kind == "conditions") {
    synth::ConditionCorpusConfig cc;
    cc.seed = args.seed;
    if (args.count > 0) cc.num_posts = args.count;
    textproc::write_corpus(os, synth::generate_condition_posts(cc, res.anxiety(), res.depression(), res.dictionary()),
                           false);
  } else if (args.kind == "matches" || args.kind == "providers") {
    auto mc = match_synth_config(cfg);
    mc.seed = args.seed;
    if (args.count > 0) mc.num_seekers = args.count;
    const auto data = synth::generate_match_data(mc, res.dictionary(), res.anxiety(), res.depression());
    if (args.kind == "matches") {
      os << match_data_json(data).dump() << '\n';
    } else {
      for (const auto& p : data.providers) os << json{{"id", p.id}, {"text", p.text}}.dump() << '\n';
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown synth kind: " + args.kind);
  }
  return 0;
}

int cmd_train_roles(const Common& c, const TrainRolesArgs& args) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  const auto seed = config::role_seed(cfg);

  struct Item {
    std::string id;
    std::string text;
    int label;
  };
  std::vector<Item> items;
  if (args.input.empty()) {
    synth::RoleCorpusConfig rc;
    rc.seed = seed;
    for (const auto& rp : synth::generate_role_posts(rc, res.anxiety(), res.depression()))
      items.push_back({rp.post.id, rp.post.text, rp.label});
  } else {
    std::ifstream in(args.input);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + args.input);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = json::parse(line);
      const auto role = j.at("role").get<std::string>();
      if (role != "SS" && role != "SP") throw Error(ErrorCode::FormatError, "role must be SS or SP: " + role);
      items.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>(), role == "SS" ? 1 : 0});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });

  // Seeded split; the stratified holdout keeps a few SP posts in the test set.
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed ^ 0x5eedULL);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<roles::RoleExample> train, test;
  std::array<std::size_t, 2> total{}, held{};
  for (const auto& it : items) ++total[static_cast<std::size_t>(it.label)];
  for (auto i : order) {
    const auto& it = items[i];
    roles::RoleExample ex{res.role_input(it.text), it.label};
    auto& h = held[static_cast<std::size_t>(it.label)];
    if (static_cast<double>(h) < args.test_fraction * static_cast<double>(total[static_cast<std::size_t>(it.label)])) {
      ++h;
      test.push_back(std::move(ex));
    } else {
      train.push_back(std::move(ex));
    }
  }

  const auto model = roles::train_roles(train, config::role_hyperparams(cfg), seed);
  Output out(args.output);
  out.stream() << roles::save_role_model(model) << '\n';

  if (!test.empty()) {
    const auto ev = roles::evaluate_roles(model, test);
    const json report{{"train", train.size()},
                      {"test", test.size()},
                      {"accuracy", ev.accuracy},
                      {"ss", metrics_json(ev.ss)},
                      {"sp", metrics_json(ev.sp)}};
    spdlog::info("roles: accuracy {:.4f}, F1 SS {:.4f}, F1 SP {:.4f}", ev.accuracy, ev.ss.f1, ev.sp.f1);
    if (!args.report.empty()) {
      std::ofstream rf(args.report);
      rf << report.dump(2) << '\n';
    }
  }
  return 0;
}

int cmd_train_matcher(const Common& c, const TrainMatcherArgs& args) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  const auto mc = config::matcher_config(cfg);
  const auto data = load_match_data(cfg, res, args.dataset);
  const auto ds = synth::to_dataset(data, res);

  auto model = matcher::train_matcher(matcher::materialize(ds, ds.train, mc.flags), mc);
  if (!ds.validation.empty()) matcher::fit_threshold(model, matcher::materialize(ds, ds.validation, mc.flags));
  Output out(args.output);
  out.stream() << matcher::save_match_model(model) << '\n';

  if (!ds.test.empty()) {
    const auto ev = matcher::evaluate_matches(model, matcher::materialize(ds, ds.test, mc.flags));
    spdlog::info("matcher {}: pooled F1 {:.4f}, threshold {:.4f}", mc.flags.name(), ev.pooled.f1, model.threshold);
    if (!args.report.empty()) {
      std::ofstream rf(args.report);
      rf << json{{"config", mc.flags.name()}, {"threshold", model.threshold}, {"test", match_eval_json(ev)}}.dump(2)
         << '\n';
    }
  }
  return 0;
}

int cmd_ablate(const Common& c, const AblateArgs& args) {
  const auto cfg = c.load();
  const auto res = pipeline::Resources::load(cfg);
  auto mc = config::matcher_config(cfg);
  const auto configs = matcher::standard_ablation();
  const auto seeds = args.seeds.empty() ? std::vector<std::uint64_t>{mc.seed} : args.seeds;

  Output out(args.output);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto scfg = cfg;
    scfg["synth"]["seed"] = seeds[i];
    mc.seed = seeds[i];
    const auto data = load_match_data(scfg, res, args.dataset);
    const auto rows = matcher::run_ablation(synth::to_dataset(data, res), mc, configs);
    if (seeds.size() > 1) out.stream() << "# seed " << seeds[i] << '\n';
    matcher::write_ablation_csv(out.stream(), rows);
  }
  return 0;
}

int cmd_simulate(const Common& c, const SimulateArgs& args) {
  const auto cfg = c.load();
  const auto sc = config::sim_config(cfg);
  const auto trace = sim::run(sc);
  const auto row = sim::measure(sc, trace);
  Output out(args.output);
  out.stream() << json{{"strategy", sim::to_string(sc.strategy)},
                       {"seed", sc.seed},
                       {"matches", trace.events.size()},
                       {"stability", row.stability},
                       {"idle_pct", row.idle_pct},
                       {"tgm_mean", row.tgm_mean},
                       {"tgm_gt_k_fraction", row.tgm_gt_k_fraction}}
                      .dump(2)
               << '\n';
  if (!args.trace.empty()) {
    std::ofstream tf(args.trace);
    if (!tf) throw Error(ErrorCode::IoError, "cannot write " + args.trace);
    for (const auto& e : trace.events)
      tf << json{{"step", e.step}, {"ss", e.ss}, {"sp", e.sp}, {"rating", e.rating}}.dump() << '\n';
  }
  return 0;
}

int cmd_compare(const Common& c, const std::string& output, unsigned threads) {
  const auto cfg = c.load();
  const auto base = config::sim_config(cfg);
  const auto& s = cfg.at("sim");
  std::vector<sim::Strategy> strategies;
  for (const auto& name : s.value("strategies", std::vector<std::string>{"R", "PG", "KI"}))
    strategies.push_back(sim::parse_strategy(name));
  const auto seeds = s.value("seeds", std::vector<std::uint64_t>{0});
  const auto report = sim::compare(base, strategies, seeds, threads);
  Output out(output);
  sim::write_csv(out.stream(), report);
  for (const auto& m : report.means)
    spdlog::info("{}: stability {:.3f}, idle {:.2f}%, TGM {:.2f} (>K {:.1f}%)", sim::to_string(m.strategy),
                 m.stability, m.idle_pct, m.tgm_mean, 100.0 * m.tgm_gt_k_fraction);
  return 0;
}

int cmd_label(const Common& c, const LabelArgs& args) {
  const auto cfg = c.load();
  const auto backend = config::nli_backend(cfg);

  auto emit = [&](std::ostream& os, const std::string& ss,
                  const std::vector<std::pair<std::string, std::string>>& sps) {
    json items = json::array();
    for (const auto& r : labeler::label_recommendations(ss, sps, *backend)) {
      json e{{"sp_id", r.sp_id}};
      e["label"] = r.label ? json(std::string(labeler::to_string(*r.label))) : json(nullptr);
      if (r.error) e["error"] = {{"code", to_string(*r.error)}, {"message", r.message}};
      items.push_back(std::move(e));
    }
    os << json{{"ss", ss}, {"labels", items}}.dump() << '\n';
  };

  Output out(args.output);
  if (!args.input.empty()) {
    std::ifstream in(args.input);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + args.input);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = json::parse(line);
      std::vector<std::pair<std::string, std::string>> sps;
      for (const auto& sp : j.at("sps")) sps.emplace_back(sp.at("id").get<std::string>(), sp.at("text").get<std::string>());
      emit(out.stream(), j.at("ss").get<std::string>(), sps);
    }
    return 0;
  }
  std::vector<std::pair<std::string, std::string>> sps;
  for (const auto& s : args.sps) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--sp expects id=text: " + s);
    sps.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  emit(out.stream(), args.ss_text, sps);
  return 0;
}

int cmd_serve(const Common& c, const ServeArgs& args) {
  auto cfg = c.load();
  const auto g = cfg.value("gateway", json::object());
  const auto res = pipeline::Resources::load(cfg);

  const auto providers_path = config::resolve_path(cfg, g.value("providers", std::string("providers.jsonl")));
  auto providers = gateway::read_providers_file(providers_path);

  gateway::ServiceModels models;
  models.resources = &res;
  models.nli = config::nli_backend(cfg);
  const auto role_path = config::resolve_path(cfg, g.value("role_model", std::string()));
  if (std::filesystem::is_regular_file(role_path))
    models.roles = roles::load_role_model(knowledge::read_file(role_path));
  else
    spdlog::warn("no role model at {}; every post is accepted as SS", role_path);
  const auto match_path = config::resolve_path(cfg, g.value("match_model", std::string()));
  if (std::filesystem::is_regular_file(match_path))
    models.matcher = matcher::load_match_model(knowledge::read_file(match_path));
  else
    spdlog::warn("no match model at {}; recommendations return NoModel", match_path);

  // Signals are handled by a dedicated thread so the server stops cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  gateway::MatchService service(std::move(providers), std::move(models), gateway::service_options(cfg));
  gateway::HttpOptions http_opts;
  http_opts.moderator_token = g.value("moderator_token", std::string());
  if (const char* tok = std::getenv("KIMATCH_MODERATOR_TOKEN"); tok && *tok) http_opts.moderator_token = tok;
  const auto console = g.value("console_dir", std::string());
  if (!console.empty()) http_opts.console_dir = config::resolve_path(cfg, console);
  gateway::HttpServer server(service, http_opts);

  int port = args.port;
  if (port < 0) {
    if (const char* p = std::getenv("KIMATCH_PORT"); p && *p)
      port = std::atoi(p);
    else
      port = g.value("port", 8080);
  }
  const auto host = args.host.empty() ? g.value("host", std::string("127.0.0.1")) : args.host;

  const int bound = port == 0 ? server.bind_any_port(host) : -1;
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });

  bool ok = false;
  if (port == 0) {
    if (bound > 0) {
      std::cout << "listening on " << host << ':' << bound << std::endl;
      ok = server.listen_after_bind();
    }
  } else {
    std::cout << "listening on " << host << ':' << port << std::endl;
    ok = server.listen(host, port);
  }
  if (!ok) spdlog::error("could not serve on {}:{}", host, port);
  // Wake the signal thread if the server stopped on its own.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.snapshot();
  return ok ? 0 : 1;
}

}  // namespace kimatch::cli
