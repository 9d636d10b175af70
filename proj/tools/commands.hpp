#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kimatch/config.hpp"

namespace kimatch::cli {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string data_dir;

  config::Json load() const;
};

struct IoPaths {
  std::string input;
  std::string output;
};

int cmd_ingest(const Common& c, const IoPaths& io);
int cmd_tag(const Common& c, const IoPaths& io);
int cmd_features(const Common& c, const IoPaths& io, const std::string& correlations, double alpha);

struct SynthArgs {
  std::string kind;  // roles | conditions | matches | providers
  std::string output;
  std::uint64_t seed = 0;
  int count = 0;  // 0 keeps the generator default
};
int cmd_synth(const Common& c, const SynthArgs& args);

struct TrainRolesArgs {
  std::string input;  // JSONL with a "role" field; synthetic when empty
  std::string output;
  std::string report;
  double test_fraction = 0.2;
};
int cmd_train_roles(const Common& c, const TrainRolesArgs& args);

struct TrainMatcherArgs {
  std::string dataset;  // JSON dataset; synthetic when empty
  std::string output;
  std::string report;
};
int cmd_train_matcher(const Common& c, const TrainMatcherArgs& args);

struct AblateArgs {
  std::string dataset;
  std::string output;
  std::vector<std::uint64_t> seeds;
};
int cmd_ablate(const Common& c, const AblateArgs& args);

struct SimulateArgs {
  std::string output;   // metrics JSON
  std::string trace;    // optional JSON-lines match events
};
int cmd_simulate(const Common& c, const SimulateArgs& args);
int cmd_compare(const Common& c, const std::string& output, unsigned threads);

struct LabelArgs {
  std::string ss_text;
  std::vector<std::string> sps;  // "id=text"
  std::string input;             // JSONL {"ss": text, "sps": [{"id", "text"}]}
  std::string output;
};
int cmd_label(const Common& c, const LabelArgs& args);

struct ServeArgs {
  int port = -1;  // -1: KIMATCH_PORT, then config
  std::string host;
};
int cmd_serve(const Common& c, const ServeArgs& args);

}  // namespace kimatch::cli
