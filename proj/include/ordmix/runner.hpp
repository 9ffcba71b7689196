#pragma once

#include "ordmix/io.hpp"
#include "ordmix/serialize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ordmix {

inline constexpr const char* kVersion = "0.3.0";

struct RunConfig {
  std::string command;  // fit, select, benchmark, bootstrap, sensitivity, generate
  std::string input;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  IngestOptions ingest;
  int threads = 1;
  MixtureConfig mixture;
  SelectionPlan plan;

  std::vector<std::string> tiers;  // empty: all default tiers
  std::optional<int> replications;
  std::optional<Eigen::Index> n;
  Json tier_overrides = Json::object();  // tier name -> TierSpec fields
  bool benchmark_select_k = true;

  int bootstrap_b = 20;
  std::string bootstrap_k = "pipeline";

  std::vector<std::string> axes{"alpha", "item_set", "n_min", "weights"};
  std::vector<double> alphas{0.5, 1.0, 2.0};
  std::vector<double> n_mins{120, 400, 500, 700};
  std::vector<ItemVariant> item_variants;  // empty: drop each item in turn
  std::vector<std::string> base_items;
  int weight_replicates = 4;

  void validate() const;  // InvalidConfig
};

/// Throws InvalidConfig on unknown keys or wrong types.
RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& c);

int exit_code_for(ErrorCategory category);

struct RunOutcome {
  int exit_code = 0;
  Json result;  // status, error record, outputs, summary
};

/// Runs one command and writes its artifacts plus manifest.json into the
/// output directory. Never throws; failures land in the outcome and manifest.
RunOutcome run(const RunConfig& config);
RunOutcome run(const std::string& command, const std::string& config_json);

/// Manifest keys that vary between otherwise identical runs.
inline const std::vector<std::string>& manifest_time_fields() {
  static const std::vector<std::string> f{"started_at", "finished_at", "wall_seconds"};
  return f;
}

}  // namespace ordmix
