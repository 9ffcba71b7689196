#include "ordmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace ordmix {

int Partition::clusters() const {
  return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

Partition Partition::canonical() const {
  std::unordered_map<int, int> ids;
  Partition out;
  out.labels.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
    out.labels.push_back(it->second);
  }
  return out;
}

int Alignment::map(int candidate_id) const {
  auto it = std::lower_bound(candidate_ids.begin(), candidate_ids.end(), candidate_id);
  if (it == candidate_ids.end() || *it != candidate_id) return kUnmatched;
  return reference_ids[it - candidate_ids.begin()];
}

std::size_t Alignment::matched() const {
  return static_cast<std::size_t>(
      std::count_if(reference_ids.begin(), reference_ids.end(), [](int r) { return r != kUnmatched; }));
}

namespace {

void require_same_length(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "partitions differ in length");
}

struct Contingency {
  std::vector<int> a_ids, b_ids;
  Eigen::MatrixXd table;  // counts
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  Contingency c;
  c.a_ids.assign(a.begin(), a.end());
  std::sort(c.a_ids.begin(), c.a_ids.end());
  c.a_ids.erase(std::unique(c.a_ids.begin(), c.a_ids.end()), c.a_ids.end());
  c.b_ids.assign(b.begin(), b.end());
  std::sort(c.b_ids.begin(), c.b_ids.end());
  c.b_ids.erase(std::unique(c.b_ids.begin(), c.b_ids.end()), c.b_ids.end());
  c.table = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.a_ids.size()),
                                  static_cast<Eigen::Index>(c.b_ids.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ia = std::lower_bound(c.a_ids.begin(), c.a_ids.end(), a[i]) - c.a_ids.begin();
    const auto ib = std::lower_bound(c.b_ids.begin(), c.b_ids.end(), b[i]) - c.b_ids.begin();
    c.table(ia, ib) += 1.0;
  }
  return c;
}

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

double ari(std::span<const int> a, std::span<const int> b) {
  require_same_length(a, b);
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  const auto c = contingency(a, b);
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i)
    for (Eigen::Index j = 0; j < c.table.cols(); ++j) index += choose2(c.table(i, j));
  double sa = 0.0, sb = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i) sa += choose2(c.table.row(i).sum());
  for (Eigen::Index j = 0; j < c.table.cols(); ++j) sb += choose2(c.table.col(j).sum());
  const double expected = sa * sb / choose2(n);
  const double maximum = 0.5 * (sa + sb);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

double nmi(std::span<const int> a, std::span<const int> b) {
  require_same_length(a, b);
  if (a.empty()) return 1.0;
  const double n = static_cast<double>(a.size());
  const auto c = contingency(a, b);
  const Eigen::VectorXd pa = c.table.rowwise().sum() / n;
  const Eigen::VectorXd pb = c.table.colwise().sum().transpose() / n;
  auto entropy = [](const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
  };
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.table.rows(); ++i)
    for (Eigen::Index j = 0; j < c.table.cols(); ++j) {
      const double pij = c.table(i, j) / n;
      if (pij > 0.0) mi += pij * std::log(pij / (pa[i] * pb[j]));
    }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

int shd(const DagStructure& g1, const DagStructure& g2) {
  if (g1.nodes() != g2.nodes()) throw Error(ErrorCode::NodeSetMismatch, "graphs differ in node count");
  int d = 0;
  for (int i = 0; i < g1.nodes(); ++i)
    for (int j = i + 1; j < g1.nodes(); ++j) {
      const bool f1 = g1.has_edge(i, j), b1 = g1.has_edge(j, i);
      const bool f2 = g2.has_edge(i, j), b2 = g2.has_edge(j, i);
      if (f1 != f2 || b1 != b2) ++d;
    }
  return d;
}

double edge_jaccard(const DagStructure& g1, const DagStructure& g2) {
  if (g1.nodes() != g2.nodes()) throw Error(ErrorCode::NodeSetMismatch, "graphs differ in node count");
  const auto e1 = g1.edges();
  const auto e2 = g2.edges();
  if (e1.empty() && e2.empty()) return 1.0;
  std::vector<std::pair<int, int>> inter;
  std::set_intersection(e1.begin(), e1.end(), e2.begin(), e2.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(e1.size() + e2.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& gain) {
  // Hungarian algorithm (potentials form) on the padded square cost -gain.
  const int rows = static_cast<int>(gain.rows());
  const int cols = static_cast<int>(gain.cols());
  const int n = std::max(rows, cols);
  if (n == 0) return {};
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  cost.topLeftCorner(rows, cols) = -gain;

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(rows, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1 && p[j] <= rows && j <= cols) assign[p[j] - 1] = j - 1;
  return assign;
}

Alignment align_clusters(std::span<const int> candidate, std::span<const int> reference) {
  require_same_length(candidate, reference);
  const auto c = contingency(candidate, reference);
  const auto assign = max_weight_assignment(c.table);
  Alignment out;
  out.candidate_ids = c.a_ids;
  out.reference_ids.assign(c.a_ids.size(), Alignment::kUnmatched);
  for (std::size_t i = 0; i < assign.size(); ++i) {
    const int j = assign[i];
    if (j < 0) continue;
    const double count = c.table(static_cast<Eigen::Index>(i), j);
    if (count <= 0.0) continue;  // zero-overlap pairs carry no correspondence
    out.reference_ids[i] = c.b_ids[static_cast<std::size_t>(j)];
    out.overlap += static_cast<long long>(count);
  }
  return out;
}

double assignment_agreement(std::span<const int> candidate, std::span<const int> reference,
                            const Alignment& alignment) {
  require_same_length(candidate, reference);
  if (candidate.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (alignment.map(candidate[i]) == reference[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(candidate.size());
}

double assignment_agreement(std::span<const int> candidate, std::span<const int> reference) {
  return assignment_agreement(candidate, reference, align_clusters(candidate, reference));
}

double profile_rmse(const Matrix& means1, const Matrix& means2, const Alignment& alignment) {
  if (means1.cols() != means2.cols())
    throw Error(ErrorCode::LengthMismatch, "profile matrices differ in item count");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < alignment.candidate_ids.size(); ++i) {
    const int c = alignment.candidate_ids[i];
    const int r = alignment.reference_ids[i];
    if (r == Alignment::kUnmatched) continue;
    if (c >= means1.rows() || r >= means2.rows())
      throw Error(ErrorCode::LengthMismatch, "cluster id outside the profile matrix");
    sum += (means1.row(c) - means2.row(r)).squaredNorm();
    count += static_cast<std::size_t>(means1.cols());
  }
  if (count == 0) throw Error(ErrorCode::NoMatchedClusters, "no matched clusters to compare");
  return std::sqrt(sum / static_cast<double>(count));
}

DagStructure induced_subgraph(const DagStructure& g, std::span<const int> nodes) {
  DagStructure out(static_cast<int>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (a != b && g.has_edge(nodes[a], nodes[b])) out.add_edge(static_cast<int>(a), static_cast<int>(b));
  return out;
}

}  // namespace ordmix
