#include "ordmix/dag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

namespace ordmix {

bool DagStructure::has_edge(int from, int to) const {
  const auto& p = parents_[to];
  return std::binary_search(p.begin(), p.end(), from);
}

void DagStructure::add_edge(int from, int to) {
  auto& p = parents_[to];
  auto it = std::lower_bound(p.begin(), p.end(), from);
  if (it == p.end() || *it != from) p.insert(it, from);
}

void DagStructure::remove_edge(int from, int to) {
  auto& p = parents_[to];
  auto it = std::lower_bound(p.begin(), p.end(), from);
  if (it != p.end() && *it == from) p.erase(it);
}

std::size_t DagStructure::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : parents_) n += p.size();
  return n;
}

std::vector<std::pair<int, int>> DagStructure::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < nodes(); ++j)
    for (int i : parents_[j]) out.emplace_back(i, j);
  std::sort(out.begin(), out.end());
  return out;
}

bool DagStructure::reaches(int from, int to) const {
  // Walk ancestors of `to`.
  std::vector<char> seen(parents_.size(), 0);
  std::vector<int> stack{to};
  seen[to] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : parents_[v]) {
      if (p == from) return true;
      if (!seen[p]) {
        seen[p] = 1;
        stack.push_back(p);
      }
    }
  }
  return from == to;
}

std::vector<int> topological_order(const DagStructure& g) {
  const int J = g.nodes();
  std::vector<int> indeg(J, 0);
  std::vector<std::vector<int>> children(J);
  for (int j = 0; j < J; ++j) {
    indeg[j] = static_cast<int>(g.parents(j).size());
    for (int p : g.parents(j)) children[p].push_back(j);
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (int j = J - 1; j >= 0; --j)
    if (indeg[j] == 0) ready.push_back(j);
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int c : children[v])
      if (--indeg[c] == 0) ready.push_back(c);
  }
  if (static_cast<int>(order.size()) != J) return {};
  return order;
}

bool is_acyclic(const DagStructure& g) { return g.nodes() == 0 || !topological_order(g).empty(); }

ArchetypeDag ArchetypeDag::empty(int nodes) {
  ArchetypeDag d;
  d.structure = DagStructure(nodes);
  d.coefficients.assign(nodes, {});
  d.intercepts = Vector::Zero(nodes);
  d.residual_vars = Vector::Ones(nodes);
  return d;
}

double ArchetypeDag::conditional_mean(std::span<const double> x, int node) const {
  double mu = intercepts[node];
  const auto& pa = structure.parents(node);
  for (std::size_t m = 0; m < pa.size(); ++m) mu += coefficients[node][m] * x[pa[m]];
  return mu;
}

double ArchetypeDag::edge_weight(int from, int to) const {
  const auto& pa = structure.parents(to);
  auto it = std::lower_bound(pa.begin(), pa.end(), from);
  if (it == pa.end() || *it != from) return 0.0;
  return coefficients[to][it - pa.begin()];
}

WeightedMoments::WeightedMoments(const Matrix& X, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != X.rows())
    throw Error(ErrorCode::LengthMismatch, "weight vector length differs from row count");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorCode::InvalidWeights, "weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidWeights, "weights sum to zero");
  n_eff_ = total;

  Eigen::Map<const Vector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  mean_ = (X.transpose() * w) / total;
  Matrix centered = X.rowwise() - mean_.transpose();
  Matrix weighted = centered.array().colwise() * w.array();
  scatter_ = weighted.transpose() * centered;
}

NodeFit WeightedMoments::fit(int node, std::span<const int> parents, const DagOptions& opts) const {
  NodeFit out;
  out.n_eff = n_eff_;
  const auto p = static_cast<Eigen::Index>(parents.size());
  out.d = static_cast<int>(p) + 1;
  out.coefficients.assign(p + 1, 0.0);
  if (p == 0) {
    out.coefficients[0] = mean_[node];
    out.rss = std::max(0.0, scatter_(node, node));
    return out;
  }

  Matrix A(p, p);
  Vector c(p);
  for (Eigen::Index a = 0; a < p; ++a) {
    c[a] = scatter_(parents[a], node);
    for (Eigen::Index b = 0; b < p; ++b) A(a, b) = scatter_(parents[a], parents[b]);
  }

  Vector beta;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 24; ++attempt) {
    Matrix Aj = A;
    Aj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(Aj);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
      beta = llt.solve(c);
      break;
    }
    jitter = jitter == 0.0 ? opts.ridge : jitter * 10.0;
  }
  if (beta.size() != p || !beta.allFinite())
    throw Error(ErrorCode::NonFinite, "weighted regression could not be stabilised");

  double intercept = mean_[node];
  for (Eigen::Index a = 0; a < p; ++a) {
    out.coefficients[a + 1] = beta[a];
    intercept -= beta[a] * mean_[parents[a]];
  }
  out.coefficients[0] = intercept;
  const double rss = scatter_(node, node) - 2.0 * c.dot(beta) + beta.dot(A * beta);
  out.rss = std::max(0.0, rss);
  return out;
}

NodeFit weighted_node_fit(const Matrix& X, int node, std::span<const int> parents,
                          std::span<const double> weights, const DagOptions& opts) {
  for (int p : parents)
    if (p == node) throw Error(ErrorCode::InvalidConfig, "a node cannot be its own parent");
  return WeightedMoments(X, weights).fit(node, parents, opts);
}

double node_bic(const NodeFit& fit, double penalty, double rss_floor) {
  const double n = fit.n_eff;
  const double rss = std::max(fit.rss, rss_floor * n);
  return n * std::log(rss / n) + penalty * fit.d * std::log(n);
}

double graph_bic(const WeightedMoments& m, const DagStructure& g, const DagOptions& opts) {
  if (!is_acyclic(g)) throw Error(ErrorCode::InvalidConfig, "graph_bic requires an acyclic graph");
  double total = 0.0;
  for (int j = 0; j < g.nodes(); ++j)
    total += node_bic(m.fit(j, g.parents(j), opts), opts.penalty, opts.rss_floor);
  return total;
}

double graph_bic(const Matrix& X, const DagStructure& g, std::span<const double> weights,
                 const DagOptions& opts) {
  return graph_bic(WeightedMoments(X, weights), g, opts);
}

const char* edge_op_name(EdgeOp op) {
  switch (op) {
    case EdgeOp::Add: return "add";
    case EdgeOp::Delete: return "delete";
    case EdgeOp::Reverse: return "reverse";
  }
  return "?";
}

ArchetypeDag fit_structure(const WeightedMoments& m, const DagStructure& g, const DagOptions& opts) {
  const int J = g.nodes();
  ArchetypeDag dag;
  dag.structure = g;
  dag.coefficients.resize(J);
  dag.intercepts.resize(J);
  dag.residual_vars.resize(J);
  for (int j = 0; j < J; ++j) {
    NodeFit f = m.fit(j, g.parents(j), opts);
    dag.intercepts[j] = f.coefficients[0];
    dag.coefficients[j].assign(f.coefficients.begin() + 1, f.coefficients.end());
    dag.residual_vars[j] = std::max(f.rss / f.n_eff, opts.variance_floor);
  }
  return dag;
}

namespace {

class NodeScorer {
public:
  NodeScorer(const WeightedMoments& m, const DagOptions& opts)
      : m_(m), opts_(opts), cache_(m.nodes()) {}

  double operator()(int node, const std::vector<int>& parents) {
    std::uint64_t key = 0;
    for (int p : parents) key |= std::uint64_t{1} << p;
    auto& c = cache_[node];
    if (auto it = c.find(key); it != c.end()) return it->second;
    const double s = node_bic(m_.fit(node, parents, opts_), opts_.penalty, opts_.rss_floor);
    c.emplace(key, s);
    return s;
  }

private:
  const WeightedMoments& m_;
  const DagOptions& opts_;
  std::vector<std::unordered_map<std::uint64_t, double>> cache_;
};

std::vector<int> with(const std::vector<int>& p, int v) {
  std::vector<int> out = p;
  out.insert(std::lower_bound(out.begin(), out.end(), v), v);
  return out;
}

std::vector<int> without(const std::vector<int>& p, int v) {
  std::vector<int> out;
  out.reserve(p.size());
  for (int x : p)
    if (x != v) out.push_back(x);
  return out;
}

}  // namespace

SearchResult greedy_search(const WeightedMoments& m, const DagOptions& opts,
                           const DagStructure* warm_start) {
  const int J = m.nodes();
  if (J > 64) throw Error(ErrorCode::InvalidConfig, "structure search supports at most 64 items");
  if (opts.max_parents < 1) throw Error(ErrorCode::InvalidConfig, "max_parents must be >= 1");

  DagStructure g(J);
  if (warm_start) {
    if (warm_start->nodes() != J)
      throw Error(ErrorCode::NodeSetMismatch, "warm start has a different node count");
    if (!is_acyclic(*warm_start)) throw Error(ErrorCode::InvalidConfig, "warm start is cyclic");
    g = *warm_start;
  }

  NodeScorer score(m, opts);
  auto total = [&](const DagStructure& h) {
    double s = 0.0;
    for (int j = 0; j < J; ++j) s += score(j, h.parents(j));
    return s;
  };

  // Every legal single-edge move, in tie-break order.
  struct Move {
    EdgeOp op;
    int i, j;
    double delta;
  };
  auto moves = [&](DagStructure& h) {
    std::vector<Move> out;
    for (int i = 0; i < J; ++i) {
      for (int j = 0; j < J; ++j) {
        if (i == j || h.has_edge(i, j) || h.has_edge(j, i)) continue;
        const auto& pj = h.parents(j);
        if (static_cast<int>(pj.size()) >= opts.max_parents) continue;
        if (h.reaches(j, i)) continue;
        out.push_back({EdgeOp::Add, i, j, score(j, with(pj, i)) - score(j, pj)});
      }
    }
    const auto edges = h.edges();
    for (auto [i, j] : edges) {
      const auto& pj = h.parents(j);
      out.push_back({EdgeOp::Delete, i, j, score(j, without(pj, i)) - score(j, pj)});
    }
    for (auto [i, j] : edges) {
      const auto& pi = h.parents(i);
      if (static_cast<int>(pi.size()) >= opts.max_parents) continue;
      h.remove_edge(i, j);
      const bool cycle = h.reaches(i, j);
      h.add_edge(i, j);
      if (cycle) continue;
      const auto& pj = h.parents(j);
      out.push_back({EdgeOp::Reverse, i, j,
                     score(j, without(pj, i)) - score(j, pj) + score(i, with(pi, j)) - score(i, pi)});
    }
    return out;
  };
  auto apply = [](DagStructure& h, const Move& mv) {
    switch (mv.op) {
      case EdgeOp::Add: h.add_edge(mv.i, mv.j); break;
      case EdgeOp::Delete: h.remove_edge(mv.i, mv.j); break;
      case EdgeOp::Reverse:
        h.remove_edge(mv.i, mv.j);
        h.add_edge(mv.j, mv.i);
        break;
    }
  };
  auto climb = [&](DagStructure& h, double current, std::vector<SearchStep>* steps) {
    for (;;) {
      const double tol = 1e-9 * (1.0 + std::abs(current));
      const Move* best = nullptr;
      const auto cand = moves(h);
      for (const auto& mv : cand)
        if (mv.delta < (best ? best->delta : 0.0) - tol) best = &mv;
      if (!best) return current;
      apply(h, *best);
      const double next = total(h);
      if (steps) steps->push_back({best->op, best->i, best->j, current, next});
      current = next;
    }
  };

  SearchResult result;
  double current = total(g);
  result.trace.initial_bic = current;
  current = climb(g, current, &result.trace.steps);

  // Perturbed restarts from the incumbent escape orientation traps of the plain climb.
  if (opts.restarts > 0) {
    std::mt19937_64 rng(opts.search_seed);
    for (int r = 0; r < opts.restarts; ++r) {
      DagStructure h = g;
      for (int p = 0; p < opts.perturb; ++p) {
        const auto cand = moves(h);
        if (cand.empty()) break;
        apply(h, cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)]);
      }
      const double v = climb(h, total(h), nullptr);
      if (v < current - 1e-9 * (1.0 + std::abs(current))) {
        g = h;
        current = v;
      }
    }
  }

  result.trace.final_bic = current;
  result.dag = fit_structure(m, g, opts);
  return result;
}

SearchResult greedy_search(const Matrix& X, std::span<const double> weights, const DagOptions& opts,
                           const DagStructure* warm_start) {
  return greedy_search(WeightedMoments(X, weights), opts, warm_start);
}

double log_density_row(std::span<const double> x, const ArchetypeDag& dag) {
  constexpr double log2pi = 1.8378770664093453;  // log(2*pi)
  double ll = 0.0;
  for (int j = 0; j < dag.nodes(); ++j) {
    const double var = dag.residual_vars[j];
    const double r = x[j] - dag.conditional_mean(x, j);
    ll -= 0.5 * (log2pi + std::log(var) + r * r / var);
  }
  return ll;
}

}  // namespace ordmix
