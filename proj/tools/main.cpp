#include <CLI11.hpp>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <utility>
#include <vector>

#include "commands.hpp"
#include "kimatch/error.hpp"

using namespace kimatch;

int main(int argc, char** argv) {
  CLI::App app{"kimatch: knowledge-infused support matching"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "kimatch 0.1.0");

  cli::Common common;
  if (const char* env = std::getenv("KIMATCH_CONFIG"); env && *env) common.config_path = env;
  bool verbose = false;
  app.add_option("-c,--config", common.config_path, "JSON config file (default: $KIMATCH_CONFIG)");
  app.add_option("--set", common.overrides, "Override a config key, e.g. --set matcher.epochs=10");
  app.add_option("--data-dir", common.data_dir, "Directory holding lexicons and dictionaries");
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::vector<std::pair<CLI::App*, std::function<int()>>> commands;

  cli::IoPaths ingest_io;
  auto* ingest = app.add_subcommand("ingest", "Tag a JSON-lines corpus and keep posts passing both filters");
  ingest->add_option("-i,--input", ingest_io.input, "Input corpus (default: stdin)");
  ingest->add_option("-o,--output", ingest_io.output, "Output corpus (default: stdout)");
  commands.emplace_back(ingest, [&] { return cli::cmd_ingest(common, ingest_io); });

  cli::IoPaths tag_io;
  auto* tag = app.add_subcommand("tag", "Attach condition, event and negation tags to every post");
  tag->add_option("-i,--input", tag_io.input, "Input corpus (default: stdin)");
  tag->add_option("-o,--output", tag_io.output, "Output corpus (default: stdout)");
  commands.emplace_back(tag, [&] { return cli::cmd_tag(common, tag_io); });

  cli::IoPaths feat_io;
  std::string correlations;
  double alpha = 0.05;
  auto* feats = app.add_subcommand("features", "Per-post feature CSV and optional correlation table");
  feats->add_option("-i,--input", feat_io.input, "Input corpus (default: stdin)");
  feats->add_option("-o,--output", feat_io.output, "Feature CSV (default: stdout)");
  feats->add_option("--correlations", correlations, "Write the correlation CSV here");
  feats->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  commands.emplace_back(feats, [&] { return cli::cmd_features(common, feat_io, correlations, alpha); });

  cli::SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus or dataset");
  synth->add_option("kind", synth_args.kind, "roles | conditions | matches | providers")
      ->required()
      ->check(CLI::IsMember({"roles", "conditions", "matches", "providers"}));
  synth->add_option("-o,--output", synth_args.output, "Output file (default: stdout)");
  synth->add_option("--seed", synth_args.seed, "Generator seed");
  synth->add_option("-n,--count", synth_args.count, "Number of seekers or posts");
  commands.emplace_back(synth, [&] { return cli::cmd_synth(common, synth_args); });

  cli::TrainRolesArgs roles_args;
  auto* train_roles = app.add_subcommand("train-roles", "Train the SS/SP role classifier");
  train_roles->add_option("-i,--input", roles_args.input, "JSON-lines posts with a role field (default: synthetic)");
  train_roles->add_option("-o,--output", roles_args.output, "Model JSON (default: stdout)");
  train_roles->add_option("--report", roles_args.report, "Held-out evaluation JSON");
  train_roles->add_option("--test-fraction", roles_args.test_fraction)->check(CLI::Range(0.0, 0.9));
  commands.emplace_back(train_roles, [&] { return cli::cmd_train_roles(common, roles_args); });

  cli::TrainMatcherArgs matcher_args;
  auto* train_matcher = app.add_subcommand("train-matcher", "Train the Siamese match model");
  train_matcher->add_option("-d,--dataset", matcher_args.dataset, "Dataset JSON (default: synthetic)");
  train_matcher->add_option("-o,--output", matcher_args.output, "Model JSON (default: stdout)");
  train_matcher->add_option("--report", matcher_args.report, "Test evaluation JSON");
  commands.emplace_back(train_matcher, [&] { return cli::cmd_train_matcher(common, matcher_args); });

  cli::AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the four ablation configurations");
  ablate->add_option("-d,--dataset", ablate_args.dataset, "Dataset JSON (default: synthetic)");
  ablate->add_option("-o,--output", ablate_args.output, "Ablation CSV (default: stdout)");
  ablate->add_option("--seeds", ablate_args.seeds, "Seeds to run (default: matcher.seed)");
  commands.emplace_back(ablate, [&] { return cli::cmd_ablate(common, ablate_args); });

  cli::SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run one matching simulation (sim.strategy, sim.seed)");
  simulate->add_option("-o,--output", sim_args.output, "Metrics JSON (default: stdout)");
  simulate->add_option("--trace", sim_args.trace, "Write match events as JSON lines");
  commands.emplace_back(simulate, [&] { return cli::cmd_simulate(common, sim_args); });

  std::string compare_out;
  unsigned threads = 0;
  auto* compare = app.add_subcommand("compare", "Compare strategies over sim.seeds");
  compare->add_option("-o,--output", compare_out, "Report CSV (default: stdout)");
  compare->add_option("-j,--threads", threads, "Worker threads (default: hardware)");
  commands.emplace_back(compare, [&] { return cli::cmd_compare(common, compare_out, threads); });

  cli::LabelArgs label_args;
  auto* label = app.add_subcommand("label", "Label SP replies as Similar, Supportive or Informative");
  label->add_option("--ss", label_args.ss_text, "SS post text");
  label->add_option("--sp", label_args.sps, "SP reply as id=text (repeatable)");
  label->add_option("-i,--input", label_args.input, "JSON lines {\"ss\", \"sps\": [{\"id\", \"text\"}]}");
  label->add_option("-o,--output", label_args.output, "Output (default: stdout)");
  commands.emplace_back(label, [&] { return cli::cmd_label(common, label_args); });

  cli::ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the moderator HTTP service");
  serve->add_option("-p,--port", serve_args.port, "Port; 0 picks a free one (default: $KIMATCH_PORT or config)");
  serve->add_option("--host", serve_args.host, "Bind address (default: gateway.host)");
  commands.emplace_back(serve, [&] { return cli::cmd_serve(common, serve_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  // Logs go to stderr so command output on stdout stays clean.
  spdlog::set_default_logger(spdlog::stderr_color_mt("kimatch"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    for (const auto& [sub, run] : commands)
      if (sub->parsed()) return run();
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
