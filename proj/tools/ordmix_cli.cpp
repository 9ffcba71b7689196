#include "ordmix/ordmix.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using Json = nlohmann::ordered_json;

namespace {

struct Flags {
  std::string input, out, config, schema, missing_token, weight_column;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, k, k_max, max_iters, max_parents, restarts, folds, replications, B, replicates;
  std::optional<double> alpha, eps_loglik, eps_assign, n_min, ek_threshold, penalty, test_fraction;
  std::optional<long long> n;
  std::vector<int> k_grid;
  std::vector<std::string> tiers, axes, base_items;
  std::vector<double> alphas, n_min_grid;
  bool seed_from_discovery = false, no_select_k = false;
  std::string bootstrap_k;
};

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

Json flags_to_json(const Flags& f, CLI::App& app) {
  Json j = Json::object();
  if (!f.input.empty()) j["input"] = f.input;
  j["output_dir"] = f.out;
  put(j, "seed", f.seed);
  put(j, "threads", f.threads);
  if (app.count("--schema")) j["schema"] = f.schema;
  if (app.count("--missing-token")) j["missing_token"] = f.missing_token;
  if (app.count("--weight-column")) j["weight_column"] = f.weight_column;

  Json mix = Json::object();
  put(mix, "k", f.k);
  put(mix, "k_max", f.k_max);
  put(mix, "alpha", f.alpha);
  put(mix, "max_iters", f.max_iters);
  put(mix, "eps_loglik", f.eps_loglik);
  put(mix, "eps_assign", f.eps_assign);
  put(mix, "n_min", f.n_min);
  put(mix, "effective_k_threshold", f.ek_threshold);
  put(mix, "max_parents", f.max_parents);
  put(mix, "penalty", f.penalty);
  put(mix, "restarts", f.restarts);
  if (!mix.empty()) j["mixture"] = mix;

  Json sel = Json::object();
  if (!f.k_grid.empty()) sel["k_grid"] = f.k_grid;
  put(sel, "test_fraction", f.test_fraction);
  put(sel, "folds", f.folds);
  if (f.seed_from_discovery) sel["seed_from_discovery"] = true;
  if (!sel.empty()) j["selection"] = sel;

  Json bench = Json::object();
  if (!f.tiers.empty()) bench["tiers"] = f.tiers;
  put(bench, "replications", f.replications);
  put(bench, "n", f.n);
  if (f.no_select_k) bench["select_k"] = false;
  if (!bench.empty()) j["benchmark"] = bench;

  Json boot = Json::object();
  put(boot, "B", f.B);
  if (!f.bootstrap_k.empty()) boot["k_mode"] = f.bootstrap_k;
  if (!boot.empty()) j["bootstrap"] = boot;

  Json sens = Json::object();
  if (!f.axes.empty()) sens["axes"] = f.axes;
  if (!f.alphas.empty()) sens["alphas"] = f.alphas;
  if (!f.n_min_grid.empty()) sens["n_min"] = f.n_min_grid;
  if (!f.base_items.empty()) sens["base_items"] = f.base_items;
  put(sens, "replicates", f.replicates);
  if (!sens.empty()) j["sensitivity"] = sens;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous ordinal structure learning: mixtures of per-cluster DAGs over ordinal survey items"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ordmix_version()));

  Flags f;
  const char* env_out = std::getenv("ORDMIX_OUTDIR");
  f.out = env_out && *env_out ? env_out : "ordmix_out";

  app.add_option("-i,--input", f.input, "CSV of 1-based ordinal codes with a header row");
  app.add_option("-o,--out", f.out, "Output directory (default $ORDMIX_OUTDIR or ./ordmix_out)");
  app.add_option("-s,--seed", f.seed, "Random seed (required)");
  app.add_option("-c,--config", f.config, "JSON run configuration; its values override flags");
  app.add_option("-j,--threads", f.threads, "Worker threads for independent fits");
  app.add_option("--schema", f.schema, "JSON sidecar declaring category counts per item");
  app.add_option("--missing-token", f.missing_token, "Cell text treated as missing (default NA)");
  app.add_option("--weight-column", f.weight_column, "Numeric row-weight column excluded from the items");

  auto* mix = app.add_option_group("mixture");
  mix->add_option("-k,--k", f.k, "Fixed number of clusters; omit for stick-breaking discovery");
  mix->add_option("--k-max", f.k_max, "Truncation level for discovery");
  mix->add_option("--alpha", f.alpha, "Concentration parameter");
  mix->add_option("--max-iters", f.max_iters);
  mix->add_option("--eps-loglik", f.eps_loglik);
  mix->add_option("--eps-assign", f.eps_assign);
  mix->add_option("--n-min", f.n_min, "Minimum cluster mass before pruning");
  mix->add_option("--effective-k-threshold", f.ek_threshold);
  mix->add_option("--max-parents", f.max_parents);
  mix->add_option("--penalty", f.penalty, "Multiplier on the BIC complexity term");
  mix->add_option("--restarts", f.restarts, "Perturbed restarts of each structure search");

  auto* sel = app.add_option_group("selection");
  sel->add_option("--k-grid", f.k_grid, "Candidate K values")->delimiter(',');
  sel->add_option("--test-fraction", f.test_fraction);
  sel->add_option("--folds", f.folds);
  sel->add_flag("--seed-from-discovery", f.seed_from_discovery);

  auto* bench = app.add_option_group("benchmark");
  bench->add_option("--tiers", f.tiers, "Subset of easy,moderate,hard,stress")->delimiter(',');
  bench->add_option("--replications", f.replications);
  bench->add_option("--n", f.n, "Rows per generated instance");
  bench->add_flag("--no-select-k", f.no_select_k, "Skip inner-CV selection per replicate");

  auto* boot = app.add_option_group("bootstrap");
  boot->add_option("-B,--resamples", f.B);
  boot->add_option("--bootstrap-k", f.bootstrap_k, "pipeline (default) reruns selection per resample; pinned keeps the reference K")
      ->check(CLI::IsMember({"pipeline", "pinned"}));

  auto* sens = app.add_option_group("sensitivity");
  sens->add_option("--axes", f.axes, "Subset of alpha,item_set,n_min,weights")->delimiter(',');
  sens->add_option("--alphas", f.alphas)->delimiter(',');
  sens->add_option("--n-min-grid", f.n_min_grid)->delimiter(',');
  sens->add_option("--base-items", f.base_items)->delimiter(',');
  sens->add_option("--replicates", f.replicates, "Weighted resample refits");

  app.add_subcommand("fit", "Fit one mixture of DAGs");
  app.add_subcommand("select", "Discovery, inner-CV K selection, confirmatory refit and holdout comparison");
  app.add_subcommand("benchmark", "Tiered semi-synthetic recovery benchmark");
  app.add_subcommand("bootstrap", "Bootstrap assignment stability");
  app.add_subcommand("sensitivity", "Concentration, item-set, cluster-size and weight sweeps");
  app.add_subcommand("generate", "Write semi-synthetic benchmark instances");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Json config = flags_to_json(f, app);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::cerr << "error [IO_ERROR]: cannot open config file '" << f.config << "'\n";
      return 2;
    }
    try {
      config.merge_patch(Json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "error [INVALID_CONFIG]: config file is not valid JSON: " << e.what() << "\n";
      return 2;
    }
  }

  char* result = nullptr;
  const int status = ordmix_run(command.c_str(), config.dump().c_str(), &result);
  Json outcome = result ? Json::parse(result) : Json::object();
  ordmix_string_free(result);

  if (status != ORDMIX_OK) {
    std::cerr << "error [" << ordmix_status_name(status) << "]: " << ordmix_last_error() << "\n";
    return ordmix_exit_code(status);
  }
  std::cout << command << ": wrote " << outcome["outputs"].size() << " files to " << outcome.value("output_dir", "")
            << "\n"
            << outcome["summary"].dump(2) << "\n";
  return 0;
}
