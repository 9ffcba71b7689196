#pragma once

#include "ordmix/embedding.hpp"
#include "ordmix/mixture.hpp"
#include "ordmix/selection.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ordmix {

/// Target category frequencies for one item; they define the latent thresholds.
struct ItemMarginal {
  std::string name;
  std::vector<double> frequencies;
};

/// Frequency table shipped with the library (8 items, 4-6 categories).
std::vector<ItemMarginal> bundled_marginals();

struct TierSpec {
  std::string name;
  int k_true = 3;
  std::vector<double> weights;
  double separation = 1.0;  // mean shift scale in latent SD units
  int base_edges = 6;       // edges per cluster graph
  int edge_differences = 0; // edits applied to the shared base per cluster
  double weight_min = 0.4;
  double weight_max = 0.9;
  double noise_sd = 1.0;
  int max_parents = 2;
  Eigen::Index n = 4800;
  std::vector<ItemMarginal> marginals;
  // Explicit thresholds per item (ascending, C_j - 1 each). When empty they
  // are calibrated per instance so the latent mixture marginals hit `marginals`.
  std::vector<std::vector<double>> thresholds;
  int replications = 3;
  std::uint64_t seed = 0;

  int items() const { return static_cast<int>(marginals.size()); }
  void validate() const;  // throws InvalidSpec
};

/// easy, moderate, hard, stress.
std::vector<TierSpec> default_tiers(std::uint64_t seed = 0);

struct BenchmarkInstance {
  TierSpec spec;
  int replicate = 0;
  OrdinalDataset data;
  Matrix latent;
  std::vector<int> labels;
  // True cluster SEMs; intercepts carry the cluster mean shift.
  std::vector<ArchetypeDag> dags;
  Matrix cluster_means;  // K x J latent means
  std::vector<std::vector<double>> thresholds;
};

BenchmarkInstance generate(const TierSpec& spec, int replicate);

/// Per-item latent marginal CDF of the generating mixture.
double mixture_marginal_cdf(const BenchmarkInstance& inst, int item, double t);
/// Latent mean and covariance implied by a linear-Gaussian SEM.
void sem_moments(const ArchetypeDag& dag, Vector& mean, Matrix& cov);

struct BenchmarkOptions {
  MixtureConfig mixture;
  SelectionPlan plan;   // outer split fraction, K grid and folds
  bool select_k = true; // run inner-CV selection per replicate (reported, not used for the fixed-K fit)
  int threads = 1;
};

struct BenchmarkRow {
  std::string tier;
  int replicate = 0;
  std::string model;  // single_graph, bnp_discovery, mixture_only, fixed_k_dag
  double mse = 0.0;
  double ari = 0.0;
  double nmi = 0.0;
  double shd = 0.0;   // NaN for models without graphs
  int clusters = 0;   // effective K on the full sample
};

struct BenchmarkSummary {
  std::string tier;
  std::string model;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  // tier, replicate, model order
  std::vector<BenchmarkSummary> summary;
  // Per tier and replicate: selected K (0 when selection was skipped).
  std::vector<std::vector<int>> k_star;
  std::vector<std::vector<KCurve>> curves;
};

inline const std::vector<std::string>& benchmark_models() {
  static const std::vector<std::string> names{"single_graph", "bnp_discovery", "mixture_only",
                                              "fixed_k_dag"};
  return names;
}

struct ReplicateResult {
  std::vector<BenchmarkRow> rows;
  int k_star = 0;
  KCurve curve;
};

ReplicateResult run_replicate(const BenchmarkInstance& inst, const BenchmarkOptions& opts);
BenchmarkReport run_benchmark(const std::vector<TierSpec>& tiers, const BenchmarkOptions& opts);

/// Mean SHD between fitted clusters and the true cluster graphs they align to.
double aligned_shd(std::span<const int> fitted_labels, std::span<const ArchetypeDag> fitted,
                   std::span<const int> true_labels, std::span<const ArchetypeDag> truth);

}  // namespace ordmix
