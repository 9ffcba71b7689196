#pragma once

#include "ordmix/embedding.hpp"
#include "ordmix/mixture.hpp"
#include "ordmix/selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ordmix {

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;  // sample SD, 0 for a single value
  double min = 0.0;
  double max = 0.0;
};
SummaryStats summarize(std::span<const double> v);

/// Pipeline reruns discovery, inner-CV selection and the confirmatory fit on
/// each resample with the reference plan and seeds. Pinned keeps the
/// reference model's K and only reruns discovery (for effective K) and the fit.
enum class BootstrapK { Pipeline, Pinned };
const char* bootstrap_k_name(BootstrapK m);
BootstrapK bootstrap_k_from_name(const std::string& name);  // throws InvalidConfig

struct BootstrapOptions {
  int B = 20;
  std::uint64_t seed = 0;
  BootstrapK k_mode = BootstrapK::Pipeline;
  SelectionPlan plan;  // must match the reference run for identity resamples to reproduce it
  // Use the original rows in order instead of resampling (diagnostic).
  bool identity_resample = false;
  int threads = 1;
};

struct BootstrapReplicate {
  int index = 0;
  double agreement = 0.0;
  int effective_k = 0;  // discovery-stage effective K on the resample
  int k_confirm = 0;
  double mean_max_responsibility = 0.0;
  bool embedding_fallback = false;  // resample missed a category; original rows scored with the reference embedding
};

struct BootstrapReport {
  int B = 0;
  std::vector<BootstrapReplicate> replicates;
  SummaryStats agreement;
  double mean_effective_k = 0.0;
  double mean_max_responsibility = 0.0;
};

/// `reference` must be the confirmatory model fit on transform(data, fit_embedding(data)).
BootstrapReport bootstrap_stability(const OrdinalDataset& data, const MixtureModel& reference,
                                    const BootstrapOptions& opts, const MixtureConfig& config);

/// Reference pipeline every sensitivity setting is compared against.
struct SensitivityContext {
  OrdinalDataset all_items;  // every available column; item-set variants draw from it
  OrdinalDataset data;       // reference item set
  ScoreEmbedding embedding;
  Matrix X;
  SelectionPlan plan;
  MixtureConfig config;
  SelectionReport reference;
  std::vector<int> labels;  // reference confirmatory assignments of every row
};

/// `base_items` empty means every column of `data`.
SensitivityContext make_reference(const OrdinalDataset& data, const SelectionPlan& plan,
                                  const MixtureConfig& config, const std::vector<std::string>& base_items = {});

struct SensitivitySetting {
  std::string label;
  double value = 0.0;
  int replicate = 0;
  double mse = 0.0;          // fixed-K* DAG holdout MSE of the setting's own pipeline
  int k_star = 0;
  int k_bnp = 0;
  int effective_k = 0;       // confirmatory model on the full sample
  int min_cluster = 0;       // smallest non-empty hard cluster
  double mean_shd = 0.0;     // matched clusters, shared items only
  double mean_jaccard = 0.0;
  double profile_rmse = 0.0;
  double agreement = 0.0;
  std::vector<int> labels;   // not serialised
};

struct SensitivityReport {
  std::string axis;  // alpha, item_set, n_min, weights
  std::vector<SensitivitySetting> settings;
};

struct ItemVariant {
  std::string label;
  std::vector<std::string> add;
  std::vector<std::string> remove;
};

/// Base item set of `ctx` plus/minus each variant. Throws InvalidVariant.
SensitivityReport item_set_sweep(const SensitivityContext& ctx, const std::vector<ItemVariant>& variants);
SensitivityReport alpha_sweep(const SensitivityContext& ctx, const std::vector<double>& alphas = {0.5, 1.0, 2.0});
SensitivityReport n_min_sweep(const SensitivityContext& ctx,
                              const std::vector<double>& thresholds = {120, 400, 500, 700});

struct WeightResampleOptions {
  int R = 4;
  std::uint64_t seed = 0;
  bool identity_resample = false;
  int threads = 1;
};
SensitivityReport weight_resample_refit(const SensitivityContext& ctx, std::span<const double> row_weights,
                                        const WeightResampleOptions& opts);

/// Compare a refit (possibly on a subset of items) against the reference.
SensitivitySetting compare_to_reference(const SensitivityContext& ctx, const OrdinalDataset& items_data,
                                        const SelectionReport& run);

}  // namespace ordmix
