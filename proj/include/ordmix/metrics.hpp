#pragma once

#include "ordmix/common.hpp"
#include "ordmix/dag.hpp"

#include <span>
#include <vector>

namespace ordmix {

/// Cluster labels are arbitrary non-negative ids; canonical() relabels them
/// 0,1,2,... in order of first appearance.
struct Partition {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  int clusters() const;  // distinct ids
  Partition canonical() const;
};

/// Injective map from candidate cluster ids to reference cluster ids.
struct Alignment {
  static constexpr int kUnmatched = -1;
  std::vector<int> candidate_ids;  // sorted distinct candidate ids
  std::vector<int> reference_ids;  // matched reference id or kUnmatched
  long long overlap = 0;           // total matched contingency count

  int map(int candidate_id) const;
  std::size_t matched() const;
};

double ari(std::span<const int> a, std::span<const int> b);
/// Mutual information over the arithmetic mean of the two entropies.
double nmi(std::span<const int> a, std::span<const int> b);

/// Edge-status differences over unordered node pairs; a reversal counts once.
int shd(const DagStructure& g1, const DagStructure& g2);
double edge_jaccard(const DagStructure& g1, const DagStructure& g2);

/// Maximum total overlap assignment (Hungarian) on the contingency table.
Alignment align_clusters(std::span<const int> candidate, std::span<const int> reference);
double assignment_agreement(std::span<const int> candidate, std::span<const int> reference);
double assignment_agreement(std::span<const int> candidate, std::span<const int> reference,
                            const Alignment& alignment);

/// RMS difference of matched cluster mean profiles. `means1` rows are indexed
/// by candidate id, `means2` rows by reference id.
double profile_rmse(const Matrix& means1, const Matrix& means2, const Alignment& alignment);

/// Restrict a structure to a subset of its nodes (edges touching dropped nodes vanish).
DagStructure induced_subgraph(const DagStructure& g, std::span<const int> nodes);

/// Max-overlap square assignment: returns for each row the assigned column,
/// maximising the sum of `gain`. Rows and columns may differ in number.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& gain);

}  // namespace ordmix
