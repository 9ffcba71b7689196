#pragma once

#include "ordmix/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace ordmix {

/// Complete-case matrix of 1-based category codes, one column per item.
struct OrdinalDataset {
  std::vector<std::string> item_names;
  std::vector<int> category_counts;
  IntMatrix values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index items() const { return values.cols(); }

  /// Throws EmptyDataset, SchemaMismatch or DegenerateItem (C_j < 2, codes out of range).
  void validate() const;

  OrdinalDataset select_rows(std::span<const Eigen::Index> rows) const;
  OrdinalDataset select_items(std::span<const std::string> names) const;
  int item_index(const std::string& name) const;
};

/// Per-item monotone category scores built from cumulative-midpoint quantiles.
/// Scores of zero-mass categories at either end of the scale are undefined
/// (their midpoint would be 0 or 1) and are stored as NaN.
struct ScoreEmbedding {
  std::vector<std::string> item_names;
  std::vector<int> category_counts;
  std::vector<std::vector<double>> masses;
  std::vector<std::vector<double>> midpoints;
  std::vector<std::vector<double>> scores;

  double score(int item, int code) const;
  bool defined(int item, int code) const;
};

struct TransformedMatrix {
  Matrix X;
  std::string provenance;
};

double normal_cdf(double x);

/// Standard normal quantile. Acklam's rational approximation refined by one
/// Newton step against the erfc-based CDF. Throws DomainError outside (0,1).
double normal_quantile(double p);

ScoreEmbedding fit_embedding(const OrdinalDataset& data);
TransformedMatrix transform(const OrdinalDataset& data, const ScoreEmbedding& emb);

}  // namespace ordmix
