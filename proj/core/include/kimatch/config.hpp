#pragma once

// Run configuration: built-in defaults, overlaid by a JSON file, overlaid by
// `key.path=value` overrides. Relative resource paths resolve against
// `data_dir`.

#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "kimatch/labeler.hpp"
#include "kimatch/matcher.hpp"
#include "kimatch/roles.hpp"
#include "kimatch/sim.hpp"
#include "kimatch/textproc.hpp"

namespace kimatch::config {

using Json = nlohmann::json;

Json defaults();

// Deep merge: objects merge key by key, everything else is replaced.
void merge(Json& base, const Json& overlay);

// "matcher.epochs=20". The value is parsed as JSON when possible and kept as a
// string otherwise. Throws InvalidArgument for a malformed override.
void apply_override(Json& cfg, std::string_view assignment);

// Defaults + optional file + overrides. An empty path skips the file.
Json load(const std::string& path, const std::vector<std::string>& overrides = {});

std::string resolve_path(const Json& cfg, const std::string& relative);

textproc::FilterConfig filter_config(const Json& cfg);
roles::RoleHyperparams role_hyperparams(const Json& cfg);
std::uint64_t role_seed(const Json& cfg);
matcher::MatcherConfig matcher_config(const Json& cfg);
sim::SimConfig sim_config(const Json& cfg);
std::unique_ptr<labeler::NliBackend> nli_backend(const Json& cfg);

}  // namespace kimatch::config
