#include "ordmix/embedding.hpp"
#include "ordmix/checksum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ordmix {

void OrdinalDataset::validate() const {
  const auto J = values.cols();
  if (values.rows() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
  if (J == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no items");
  if (static_cast<Eigen::Index>(item_names.size()) != J ||
      static_cast<Eigen::Index>(category_counts.size()) != J)
    throw Error(ErrorCode::SchemaMismatch, "item names / category counts do not match column count");
  for (Eigen::Index j = 0; j < J; ++j) {
    const int C = category_counts[j];
    if (C < 2)
      throw Error(ErrorCode::DegenerateItem,
                  "item '" + item_names[j] + "' declares fewer than two categories");
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const int v = values(i, j);
      if (v < 1 || v > C)
        throw Error(ErrorCode::SchemaMismatch, "item '" + item_names[j] + "' row " +
                                                   std::to_string(i) + ": code " + std::to_string(v) +
                                                   " outside 1.." + std::to_string(C));
    }
  }
}

OrdinalDataset OrdinalDataset::select_rows(std::span<const Eigen::Index> rows) const {
  OrdinalDataset out{item_names, category_counts, IntMatrix(rows.size(), values.cols())};
  for (std::size_t r = 0; r < rows.size(); ++r) out.values.row(r) = values.row(rows[r]);
  return out;
}

int OrdinalDataset::item_index(const std::string& name) const {
  auto it = std::find(item_names.begin(), item_names.end(), name);
  if (it == item_names.end()) return -1;
  return static_cast<int>(it - item_names.begin());
}

OrdinalDataset OrdinalDataset::select_items(std::span<const std::string> names) const {
  OrdinalDataset out;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const int j = item_index(names[c]);
    if (j < 0) throw Error(ErrorCode::SchemaMismatch, "unknown item '" + names[c] + "'");
    out.item_names.push_back(names[c]);
    out.category_counts.push_back(category_counts[j]);
    out.values.col(c) = values.col(j);
  }
  return out;
}

double ScoreEmbedding::score(int item, int code) const { return scores.at(item).at(code - 1); }

bool ScoreEmbedding::defined(int item, int code) const {
  return code >= 1 && code <= category_counts.at(item) && std::isfinite(scores[item][code - 1]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::DomainError, "normal_quantile: p must lie strictly inside (0,1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Newton step on Phi(x) - p.
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
  return x;
}

ScoreEmbedding fit_embedding(const OrdinalDataset& data) {
  data.validate();
  const auto N = data.rows();
  const auto J = data.items();

  ScoreEmbedding emb;
  emb.item_names = data.item_names;
  emb.category_counts = data.category_counts;
  emb.masses.resize(J);
  emb.midpoints.resize(J);
  emb.scores.resize(J);

  for (Eigen::Index j = 0; j < J; ++j) {
    const int C = data.category_counts[j];
    std::vector<long long> counts(C, 0);
    for (Eigen::Index i = 0; i < N; ++i) ++counts[data.values(i, j) - 1];

    int positive = 0;
    for (auto n : counts) positive += n > 0 ? 1 : 0;
    if (positive < 2)
      throw Error(ErrorCode::DegenerateItem,
                  "item '" + data.item_names[j] + "' has all of its mass in one category");

    auto& mass = emb.masses[j];
    auto& mid = emb.midpoints[j];
    auto& score = emb.scores[j];
    mass.resize(C);
    mid.resize(C);
    score.resize(C);

    // Midpoints from integer counts: exact cumulative sums, one rounding.
    long long below = 0;
    for (int c = 0; c < C; ++c) {
      mass[c] = static_cast<double>(counts[c]) / static_cast<double>(N);
      const double u = (static_cast<double>(below) + 0.5 * static_cast<double>(counts[c])) /
                       static_cast<double>(N);
      mid[c] = u;
      score[c] = (u > 0.0 && u < 1.0) ? normal_quantile(u)
                                      : std::numeric_limits<double>::quiet_NaN();
      below += counts[c];
    }
  }
  return emb;
}

namespace {

std::string provenance_of(const OrdinalDataset& data, const ScoreEmbedding& emb) {
  const auto* vb = reinterpret_cast<const std::byte*>(data.values.data());
  std::string data_id = sha256_hex(std::span(vb, sizeof(int) * data.values.size()));
  std::string score_bytes;
  for (const auto& s : emb.scores)
    score_bytes.append(reinterpret_cast<const char*>(s.data()), sizeof(double) * s.size());
  return "data:" + data_id.substr(0, 16) + "/embedding:" + sha256_hex(score_bytes).substr(0, 16);
}

}  // namespace

TransformedMatrix transform(const OrdinalDataset& data, const ScoreEmbedding& emb) {
  const auto J = data.items();
  if (static_cast<std::size_t>(J) != emb.scores.size() || data.category_counts != emb.category_counts)
    throw Error(ErrorCode::SchemaMismatch, "dataset schema differs from the embedding schema");

  TransformedMatrix out;
  out.X.resize(data.rows(), J);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const int code = data.values(i, j);
      if (code < 1 || code > emb.category_counts[j])
        throw Error(ErrorCode::SchemaMismatch, "code out of declared range for item '" +
                                                   emb.item_names[j] + "'");
      const double s = emb.scores[j][code - 1];
      if (!std::isfinite(s))
        throw Error(ErrorCode::UnseenCategory, "item '" + emb.item_names[j] + "' category " +
                                                   std::to_string(code) +
                                                   " had no training mass at the end of the scale");
      out.X(i, j) = s;
    }
  }
  out.provenance = provenance_of(data, emb);
  return out;
}

}  // namespace ordmix
