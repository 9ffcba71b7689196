#pragma once

#include "ordmix/common.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ordmix {

struct DagOptions {
  int max_parents = 2;
  double penalty = 1.0;          // multiplier on the d*log(n) term
  double variance_floor = 1e-6;  // lower bound on residual variances
  double rss_floor = 1e-10;      // relative to n_eff, inside the log of the BIC
  double ridge = 1e-8;           // diagonal jitter for a singular weighted Gram
  int restarts = 10;             // perturbed restarts after the first climb
  int perturb = 3;               // random moves applied before each restart
  std::uint64_t search_seed = 0;
};

/// Directed graph over `nodes()` items. Parent lists are kept sorted.
/// Acyclicity is not enforced here; see is_acyclic().
class DagStructure {
public:
  DagStructure() = default;
  explicit DagStructure(int nodes) : parents_(nodes) {}

  int nodes() const { return static_cast<int>(parents_.size()); }
  const std::vector<int>& parents(int node) const { return parents_[node]; }
  bool has_edge(int from, int to) const;
  void add_edge(int from, int to);
  void remove_edge(int from, int to);
  std::size_t edge_count() const;
  std::vector<std::pair<int, int>> edges() const;  // sorted by (source, target)
  bool reaches(int from, int to) const;

  bool operator==(const DagStructure&) const = default;

private:
  std::vector<std::vector<int>> parents_;
};

bool is_acyclic(const DagStructure& g);
std::vector<int> topological_order(const DagStructure& g);  // empty when cyclic

/// One cluster's linear-Gaussian DAG: node j has mean
/// intercepts[j] + sum_m coef[j][m] * x_{parents(j)[m]} and variance residual_vars[j].
struct ArchetypeDag {
  DagStructure structure;
  std::vector<std::vector<double>> coefficients;
  Vector intercepts;
  Vector residual_vars;

  static ArchetypeDag empty(int nodes);
  int nodes() const { return structure.nodes(); }
  double conditional_mean(std::span<const double> x, int node) const;
  double edge_weight(int from, int to) const;  // 0 when absent
};

struct NodeFit {
  std::vector<double> coefficients;  // intercept first, then one per parent
  double rss = 0.0;
  int d = 1;
  double n_eff = 0.0;
};

/// Responsibility-weighted first and second moments of a data matrix. Any
/// node regression under the same weights is solved from these in O(d^3).
class WeightedMoments {
public:
  WeightedMoments(const Matrix& X, std::span<const double> weights);

  int nodes() const { return static_cast<int>(mean_.size()); }
  double n_eff() const { return n_eff_; }
  const Vector& mean() const { return mean_; }
  NodeFit fit(int node, std::span<const int> parents, const DagOptions& opts = {}) const;

private:
  Vector mean_;
  Matrix scatter_;  // sum_i w_i (x_i - mean)(x_i - mean)^T
  double n_eff_ = 0.0;
};

NodeFit weighted_node_fit(const Matrix& X, int node, std::span<const int> parents,
                          std::span<const double> weights, const DagOptions& opts = {});

/// n log(max(rss, floor*n)/n) + penalty * d * log(n).
double node_bic(const NodeFit& fit, double penalty = 1.0, double rss_floor = 1e-10);

double graph_bic(const Matrix& X, const DagStructure& g, std::span<const double> weights,
                 const DagOptions& opts = {});
double graph_bic(const WeightedMoments& m, const DagStructure& g, const DagOptions& opts = {});

enum class EdgeOp { Add, Delete, Reverse };
const char* edge_op_name(EdgeOp op);

struct SearchStep {
  EdgeOp op;
  int source;
  int target;
  double bic_before;
  double bic_after;
};

struct SearchTrace {
  double initial_bic = 0.0;
  double final_bic = 0.0;
  std::vector<SearchStep> steps;
};

struct SearchResult {
  ArchetypeDag dag;
  SearchTrace trace;
};

/// Best-improvement hill climbing over add/delete/reverse moves under the
/// parent cap. Ties prefer add < delete < reverse, then (source, target).
SearchResult greedy_search(const WeightedMoments& m, const DagOptions& opts,
                           const DagStructure* warm_start = nullptr);
SearchResult greedy_search(const Matrix& X, std::span<const double> weights, const DagOptions& opts,
                           const DagStructure* warm_start = nullptr);

/// Refit every node of a fixed structure under the given moments.
ArchetypeDag fit_structure(const WeightedMoments& m, const DagStructure& g, const DagOptions& opts);

double log_density_row(std::span<const double> x, const ArchetypeDag& dag);

}  // namespace ordmix
