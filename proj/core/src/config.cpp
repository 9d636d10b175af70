#include "kimatch/config.hpp"

#include <cstdlib>
#include <filesystem>

#include "kimatch/error.hpp"
#include "kimatch/knowledge.hpp"

namespace kimatch::config {

Json defaults() {
  return Json::parse(R"({
    "data_dir": "data",
    "lexicons": {"anxiety": "anxiety.txt", "depression": "depression.txt"},
    "events": [
      {"event": "SchoolClosure", "lexicon": "events/school_closure.txt",
       "description": "schools shut and school closures with remote learning and online classes for students at home"},
      {"event": "BusinessClosure", "lexicon": "events/business_closure.txt",
       "description": "business closure with shops and clinics closing down and workers laid off"},
      {"event": "Lockdown", "lexicon": "events/lockdown.txt",
       "description": "city lockdown and quarantine with a stay at home order"},
      {"event": "ShelterInPlace", "lexicon": "events/shelter_in_place.txt",
       "description": "shelter in place order to remain indoors and shelter at home"},
      {"event": "Hospitalization", "lexicon": "events/hospitalization.txt",
       "description": "hospitalized in the hospital intensive care unit"},
      {"event": "GeneralCovid", "lexicon": "events/general_covid.txt",
       "description": "covid 19 coronavirus pandemic"}
    ],
    "categories": "categories.json",
    "emotion_scale": "emotion.tsv",
    "embedder": "hashed-v1",
    "embedder_dimension": 256,
    "negation_window": 5,
    "event_threshold": 0.8,
    "filter": {"require_event": true, "require_condition": true},
    "roles": {"learning_rate": 0.5, "epochs": 300, "l2": 0.0001, "class_weighting": true, "seed": 0},
    "matcher": {"flags": "content+psy+prob+covid", "margin": 0.2, "rep_dim": 32, "conv_filters": 8,
                "conv_kernel": 5, "conv_stride": 2, "hidden": 64, "learning_rate": 0.003, "epochs": 20,
                "batch_size": 32, "weight_decay": 0.0, "seed": 0},
    "sim": {"num_seekers": 10000, "num_providers": 108, "max_matches": 20, "num_conditions": 12,
            "seed": 0, "strategy": "KI", "stability_window": 20, "pg_temperature": 0.1,
            "ki_noise": 0.05, "arrival_rate": 3.25, "churn_threshold": 0.53, "tgm_tolerance": 0.05,
            "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9], "strategies": ["R", "PG", "KI"]},
    "synth": {"seed": 0},
    "labeler": {"backend": "heuristic", "first_person_weight": 1.0, "neutral_baseline": 0.08},
    "gateway": {"port": 8080, "host": "127.0.0.1", "state_dir": "state", "providers": "providers.jsonl",
                "role_model": "models/roles.json", "match_model": "models/matcher.json", "ss_threshold": 0.5, "snapshot_every": 50,
                "release_ttl_seconds": 0, "moderator_token": "", "console_dir": "", "default_k": 4}
  })");
}

void merge(Json& base, const Json& overlay) {
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object())
      merge(base[key], value);
    else
      base[key] = value;
  }
}

void apply_override(Json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::InvalidArgument, "override must look like key.path=value: " + std::string(assignment));
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));

  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }

  Json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorCode::InvalidArgument, "empty key segment in " + key);
    if (!node->is_object()) throw Error(ErrorCode::InvalidArgument, "cannot descend into " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

Json load(const std::string& path, const std::vector<std::string>& overrides) {
  Json cfg = defaults();
  if (!path.empty()) {
    Json file;
    try {
      file = Json::parse(knowledge::read_file(path));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::FormatError, "config " + path + ": " + e.what());
    }
    merge(cfg, file);
    // A relative data_dir in a config file is relative to that file.
    if (file.contains("data_dir")) {
      std::filesystem::path dir = file["data_dir"].get<std::string>();
      if (dir.is_relative()) dir = std::filesystem::path(path).parent_path() / dir;
      cfg["data_dir"] = dir.lexically_normal().string();
    }
  }
  if (const char* dir = std::getenv("KIMATCH_DATA_DIR"); dir && *dir) cfg["data_dir"] = dir;
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

std::string resolve_path(const Json& cfg, const std::string& relative) {
  std::filesystem::path p = relative;
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(cfg.value("data_dir", std::string("data"))) / p).string();
}

textproc::FilterConfig filter_config(const Json& cfg) {
  textproc::FilterConfig f;
  f.require_event = cfg.at("filter").value("require_event", true);
  f.require_condition = cfg.at("filter").value("require_condition", true);
  f.event_threshold = cfg.value("event_threshold", textproc::kDefaultEventThreshold);
  f.negation_window = cfg.value("negation_window", textproc::kDefaultNegationWindow);
  return f;
}

roles::RoleHyperparams role_hyperparams(const Json& cfg) {
  const auto& r = cfg.at("roles");
  roles::RoleHyperparams hp;
  hp.learning_rate = r.value("learning_rate", hp.learning_rate);
  hp.epochs = r.value("epochs", hp.epochs);
  hp.l2 = r.value("l2", hp.l2);
  hp.class_weighting = r.value("class_weighting", hp.class_weighting);
  return hp;
}

std::uint64_t role_seed(const Json& cfg) { return cfg.at("roles").value("seed", std::uint64_t{0}); }

matcher::MatcherConfig matcher_config(const Json& cfg) {
  const auto& m = cfg.at("matcher");
  matcher::MatcherConfig c;
  c.flags = matcher::parse_flags(m.value("flags", c.flags.name()));
  c.margin = m.value("margin", c.margin);
  c.rep_dim = m.value("rep_dim", c.rep_dim);
  c.conv_filters = m.value("conv_filters", c.conv_filters);
  c.conv_kernel = m.value("conv_kernel", c.conv_kernel);
  c.conv_stride = m.value("conv_stride", c.conv_stride);
  c.hidden = m.value("hidden", c.hidden);
  c.learning_rate = m.value("learning_rate", c.learning_rate);
  c.epochs = m.value("epochs", c.epochs);
  c.batch_size = m.value("batch_size", c.batch_size);
  c.weight_decay = m.value("weight_decay", c.weight_decay);
  c.seed = m.value("seed", c.seed);
  c.validate();
  return c;
}

std::unique_ptr<labeler::NliBackend> nli_backend(const Json& cfg) {
  const auto l = cfg.value("labeler", Json::object());
  labeler::HeuristicWeights w;
  w.first_person = l.value("first_person_weight", w.first_person);
  w.neutral_baseline = l.value("neutral_baseline", w.neutral_baseline);
  return labeler::make_backend(l.value("backend", std::string("heuristic")), w);
}

sim::SimConfig sim_config(const Json& cfg) {
  const auto& s = cfg.at("sim");
  sim::SimConfig c;
  c.num_seekers = s.value("num_seekers", c.num_seekers);
  c.num_providers = s.value("num_providers", c.num_providers);
  c.max_matches = s.value("max_matches", c.max_matches);
  c.num_conditions = s.value("num_conditions", c.num_conditions);
  c.seed = s.value("seed", c.seed);
  c.strategy = sim::parse_strategy(s.value("strategy", std::string("KI")));
  c.stability_window = s.value("stability_window", c.stability_window);
  c.pg_temperature = s.value("pg_temperature", c.pg_temperature);
  c.ki_noise = s.value("ki_noise", c.ki_noise);
  c.arrival_rate = s.value("arrival_rate", c.arrival_rate);
  c.churn_threshold = s.value("churn_threshold", c.churn_threshold);
  c.tgm_tolerance = s.value("tgm_tolerance", c.tgm_tolerance);
  c.validate();
  return c;
}

}  // namespace kimatch::config
