#pragma once

#include "ordmix/dag.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ordmix {

struct MixtureConfig {
  std::optional<int> fixed_k;  // confirmatory fit when set, stick-breaking discovery otherwise
  int k_max = 10;
  double alpha = 1.0;
  int max_iters = 100;
  double eps_loglik = 1.0;
  double eps_assign = 0.001;
  double n_min = 120.0;
  double effective_k_threshold = 0.05;
  int kmeans_iters = 50;
  DagOptions dag;
  std::uint64_t seed = 0;

  int components() const { return fixed_k ? *fixed_k : k_max; }
  void validate() const;
};

enum class FitStatus { Converged, MaxIterations, ObjectiveStalled };
const char* fit_status_name(FitStatus s);

struct IterationRecord {
  int iteration = 0;
  double loglik = 0.0;
  double penalized_objective = 0.0;
  double assignment_change = 0.0;
  int effective_k = 0;
  int active_clusters = 0;
  bool pruned = false;  // a cluster fell below n_min during this iteration
};

struct MixtureModel {
  MixtureConfig config;
  bool discovery = false;
  std::vector<ArchetypeDag> dags;
  Vector weights;            // smoothed; zero on pruned clusters
  std::vector<char> active;  // pruned clusters never revive
  Matrix responsibilities;   // N x K, zero columns for pruned clusters
  std::vector<int> assignments;
  std::vector<IterationRecord> trace;
  FitStatus status = FitStatus::MaxIterations;

  int components() const { return static_cast<int>(dags.size()); }
  int active_count() const;
  Vector cluster_mass() const;  // column sums of the responsibilities
};

enum class BaselineVariant { SingleGraph, MixtureOnly };
const char* baseline_name(BaselineVariant v);

struct BaselineModel {
  BaselineVariant variant = BaselineVariant::SingleGraph;
  // single graph
  ArchetypeDag dag;
  SearchTrace search;
  // mixture only (diagonal Gaussian components)
  Matrix means;
  Matrix variances;
  Vector weights;
  Matrix responsibilities;
  std::vector<int> assignments;
  std::vector<IterationRecord> trace;
  FitStatus status = FitStatus::Converged;
};

/// pi_k = V_k prod_{l<k}(1 - V_l) for k < K_max; the last component takes the remainder.
std::vector<double> stick_breaking_weights(std::span<const double> V, int k_max);
/// V_k ~ Beta(1, alpha) by inversion.
std::vector<double> draw_stick_breaking(double alpha, int k_max, std::uint64_t seed);

/// Log-space responsibilities, r_ik proportional to weights_k * p(x_i | dag_k).
Matrix e_step(const Matrix& X, std::span<const ArchetypeDag> dags, const Vector& weights,
              std::span<const char> active = {});
/// (sum_i r_ik + alpha/K) / (N + alpha), renormalised over active clusters.
Vector smooth_weights(const Matrix& r, double alpha, std::span<const char> active = {});
/// Responsibility-weighted warm-started structure search per active cluster.
/// Clusters whose mass falls below n_min are deactivated (never the last one).
std::vector<ArchetypeDag> m_step(const Matrix& X, const Matrix& r, const MixtureConfig& config,
                                 std::span<const ArchetypeDag> warm, std::vector<char>& active);

double mixture_loglik(const Matrix& X, std::span<const ArchetypeDag> dags, const Vector& weights,
                      std::span<const char> active = {});
/// Free-energy form of the BIC-penalised objective. Coordinate-wise ascent in
/// the E step, the structure M step and the weight update.
double penalized_objective(const Matrix& X, const Matrix& r, std::span<const ArchetypeDag> dags,
                           const Vector& weights, std::span<const char> active,
                           const MixtureConfig& config);

std::vector<int> kmeans_partition(const Matrix& X, int k, std::uint64_t seed, int max_iters = 50);
std::vector<int> hard_assignments(const Matrix& r, std::span<const char> active = {});

MixtureModel fit(const Matrix& X, const MixtureConfig& config,
                 const std::vector<int>* initial_labels = nullptr);
int effective_k(const MixtureModel& model, double threshold = 0.05);
int effective_k(const Matrix& responsibilities, double threshold = 0.05);

BaselineModel fit_single_graph(const Matrix& X, const MixtureConfig& config);
BaselineModel fit_mixture_only(const Matrix& X, int k, const MixtureConfig& config,
                               const std::vector<int>* initial_labels = nullptr);

Matrix responsibilities_for(const MixtureModel& model, const Matrix& X);
Matrix responsibilities_for(const BaselineModel& model, const Matrix& X);
Matrix predict_scores(const MixtureModel& model, const Matrix& X);
Matrix predict_scores(const BaselineModel& model, const Matrix& X);

}  // namespace ordmix
