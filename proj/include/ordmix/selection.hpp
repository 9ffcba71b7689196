#pragma once

#include "ordmix/embedding.hpp"
#include "ordmix/mixture.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ordmix {

struct SelectionPlan {
  std::vector<int> k_grid{2, 3, 4, 5, 6};
  double outer_test_fraction = 0.2;
  int inner_folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  // Start the confirmatory fit from the discovery-stage partition.
  bool seed_from_discovery = false;

  void validate() const;
};

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Seeded shuffle; the first round(fraction * n) shuffled rows form the test
/// set. Both index lists are returned in ascending order.
Split holdout_split(Eigen::Index n, double test_fraction, std::uint64_t seed);
/// Seeded shuffle cut into contiguous blocks; returns the validation rows of each fold.
std::vector<std::vector<Eigen::Index>> fold_blocks(Eigen::Index n, int folds, std::uint64_t seed);
Matrix take_rows(const Matrix& X, std::span<const Eigen::Index> rows);

/// Mean over rows and items of (X - Xhat)^2.
double holdout_mse(const Matrix& X, const Matrix& Xhat);
double holdout_mse(const MixtureModel& model, const Matrix& X_test);
double holdout_mse(const BaselineModel& model, const Matrix& X_test);

struct KCurve {
  std::vector<int> k_grid;
  std::vector<double> mse;                    // mean over folds, one per grid entry
  std::vector<std::vector<double>> fold_mse;  // [grid][fold]
  int k_star = 0;
};

KCurve select_k(const Matrix& X_train, const SelectionPlan& plan, const MixtureConfig& config);

struct ModelScore {
  std::string model;
  double mse = 0.0;
  double delta_vs_baseline = 0.0;  // relative change against the single-graph baseline
};

struct SelectionReport {
  std::vector<std::string> item_names;
  ScoreEmbedding embedding;
  Split split;
  int k_bnp = 0;
  KCurve curve;
  std::vector<ModelScore> holdout;  // single_graph, bnp_discovery, mixture_only, fixed_k_dag
  BaselineModel single_graph;
  BaselineModel mixture_only;
  MixtureModel discovery;
  MixtureModel fixed_k;       // trained on the outer training split
  MixtureModel confirmatory;  // refit on the full analytic sample
};

/// Seeds used by each pipeline stage, derived from the mixture seed.
MixtureConfig stage_config(const MixtureConfig& base, std::uint64_t stage, std::optional<int> k,
                           std::initializer_list<std::uint64_t> extra = {});

/// Embed -> discover -> inner-CV select -> confirm, plus the four-way holdout comparison.
SelectionReport run_pipeline(const OrdinalDataset& data, const SelectionPlan& plan,
                             const MixtureConfig& config);
/// Same as run_pipeline but on an already embedded matrix.
SelectionReport run_pipeline(const Matrix& X, const SelectionPlan& plan, const MixtureConfig& config);

}  // namespace ordmix
