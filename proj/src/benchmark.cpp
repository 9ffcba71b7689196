#include "ordmix/benchmark.hpp"
#include "ordmix/metrics.hpp"
#include "ordmix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace ordmix {

std::vector<ItemMarginal> bundled_marginals() {
  return {
      {"Q1", {0.15, 0.35, 0.30, 0.20}},
      {"Q2", {0.10, 0.20, 0.30, 0.25, 0.15}},
      {"Q3", {0.25, 0.30, 0.25, 0.20}},
      {"Q4", {0.08, 0.12, 0.20, 0.25, 0.20, 0.15}},
      {"Q5", {0.20, 0.25, 0.25, 0.20, 0.10}},
      {"Q6", {0.30, 0.30, 0.25, 0.15}},
      {"Q7", {0.12, 0.18, 0.30, 0.24, 0.16}},
      {"Q8", {0.10, 0.15, 0.20, 0.20, 0.20, 0.15}},
  };
}

void TierSpec::validate() const {
  auto fail = [&](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, "tier '" + name + "': " + msg); };
  if (k_true < 2) fail("K_true must be at least 2");
  if (static_cast<int>(weights.size()) != k_true) fail("need one mixing weight per cluster");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) fail("mixing weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) fail("mixing weights must sum to 1");
  if (!(separation >= 0.0)) fail("separation must be non-negative");
  if (base_edges < 0 || edge_differences < 0 || max_parents < 0) fail("edge counts must be non-negative");
  if (!(weight_min > 0.0 && weight_min <= weight_max)) fail("edge weight range must satisfy 0 < min <= max");
  if (!(noise_sd > 0.0)) fail("noise SD must be positive");
  if (items() < 2 || items() > 64) fail("need between 2 and 64 items");
  if (n < k_true) fail("N must be at least K_true");
  if (replications < 1) fail("need at least one replication");
  for (const auto& m : marginals) {
    if (m.frequencies.size() < 2) fail("item " + m.name + " needs at least two categories");
    double s = 0.0;
    for (double f : m.frequencies) {
      if (!(f > 0.0)) fail("item " + m.name + " has a non-positive frequency");
      s += f;
    }
    if (std::abs(s - 1.0) > 1e-9) fail("item " + m.name + " frequencies must sum to 1");
  }
  if (!thresholds.empty()) {
    if (thresholds.size() != marginals.size()) fail("need thresholds for every item");
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
      if (thresholds[j].size() + 1 != marginals[j].frequencies.size())
        fail("item " + marginals[j].name + " threshold count must be categories - 1");
      for (std::size_t c = 1; c < thresholds[j].size(); ++c)
        if (!(thresholds[j][c] > thresholds[j][c - 1])) fail("thresholds must be strictly increasing");
    }
  }
}

std::vector<TierSpec> default_tiers(std::uint64_t seed) {
  struct Row {
    const char* name;
    double s;
    int diff;
    std::vector<double> w;
  };
  const std::vector<Row> rows{
      {"easy", 2.0, 6, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
      {"moderate", 1.0, 4, {0.4, 0.3, 0.3}},
      {"hard", 0.5, 2, {0.6, 0.3, 0.1}},
      {"stress", 0.1, 0, {0.7, 0.2, 0.1}},
  };
  std::vector<TierSpec> out;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    TierSpec s;
    s.name = rows[t].name;
    s.k_true = 3;
    s.weights = rows[t].w;
    s.separation = rows[t].s;
    s.edge_differences = rows[t].diff;
    s.marginals = bundled_marginals();
    s.seed = derive_seed(seed, {t + 1});
    out.push_back(std::move(s));
  }
  return out;
}

void sem_moments(const ArchetypeDag& dag, Vector& mean, Matrix& cov) {
  const int J = dag.nodes();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(J, J);
  for (int j = 0; j < J; ++j) {
    const auto& pa = dag.structure.parents(j);
    for (std::size_t m = 0; m < pa.size(); ++m) B(j, pa[m]) = dag.coefficients[j][m];
  }
  const Eigen::MatrixXd A = (Eigen::MatrixXd::Identity(J, J) - B).inverse();
  mean = A * dag.intercepts;
  cov = A * dag.residual_vars.asDiagonal() * A.transpose();
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double edge_weight_draw(Rng& rng, const TierSpec& spec) {
  const double mag = uniform(rng, spec.weight_min, spec.weight_max);
  return uniform(rng, 0.0, 1.0) < 0.5 ? -mag : mag;
}

struct WeightedEdge {
  int from, to;
  double w;
};

// Adds edges from `pool` in order until `count` are placed under the parent cap.
int place_edges(const std::vector<std::pair<int, int>>& pool, int count, int max_parents,
                DagStructure& g, std::vector<std::pair<int, int>>& placed) {
  int added = 0;
  for (const auto& [a, b] : pool) {
    if (added == count) break;
    if (g.has_edge(a, b) || static_cast<int>(g.parents(b).size()) >= max_parents) continue;
    g.add_edge(a, b);
    placed.emplace_back(a, b);
    ++added;
  }
  return added;
}

ArchetypeDag sem_from_edges(int J, const std::vector<WeightedEdge>& edges, double noise_sd) {
  ArchetypeDag d = ArchetypeDag::empty(J);
  for (const auto& e : edges) d.structure.add_edge(e.from, e.to);
  for (int j = 0; j < J; ++j) {
    const auto& pa = d.structure.parents(j);
    d.coefficients[j].assign(pa.size(), 0.0);
    for (const auto& e : edges)
      if (e.to == j)
        d.coefficients[j][std::lower_bound(pa.begin(), pa.end(), e.from) - pa.begin()] = e.w;
  }
  d.residual_vars = Vector::Constant(J, noise_sd * noise_sd);
  return d;
}

double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mixture_marginal_cdf(const BenchmarkInstance& inst, int item, double t) {
  double F = 0.0;
  for (int k = 0; k < inst.spec.k_true; ++k) {
    Vector mean;
    Matrix cov;
    sem_moments(inst.dags[k], mean, cov);
    F += inst.spec.weights[k] * normal_cdf((t - mean[item]) / std::sqrt(cov(item, item)));
  }
  return F;
}

BenchmarkInstance generate(const TierSpec& spec, int replicate) {
  spec.validate();
  const int J = spec.items();
  const int K = spec.k_true;
  Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(replicate)}));

  std::vector<int> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<int, int>> forward;
  for (int a = 0; a < J; ++a)
    for (int b = a + 1; b < J; ++b) forward.emplace_back(order[a], order[b]);

  auto pool = forward;
  std::shuffle(pool.begin(), pool.end(), rng);
  DagStructure base(J);
  std::vector<std::pair<int, int>> base_edges;
  if (place_edges(pool, spec.base_edges, spec.max_parents, base, base_edges) != spec.base_edges)
    throw Error(ErrorCode::InvalidSpec, "cannot place the base edges under the parent cap");
  std::vector<WeightedEdge> base_weighted;
  for (const auto& [a, b] : base_edges) base_weighted.push_back({a, b, edge_weight_draw(rng, spec)});

  const int n_del = std::min(spec.edge_differences / 2, spec.base_edges);
  const int n_add = spec.edge_differences - n_del;
  BenchmarkInstance inst;
  inst.spec = spec;
  inst.replicate = replicate;
  for (int k = 0; k < K; ++k) {
    auto kept = base_weighted;
    std::shuffle(kept.begin(), kept.end(), rng);
    kept.resize(kept.size() - n_del);
    std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
      return std::pair(x.from, x.to) < std::pair(y.from, y.to);
    });
    DagStructure g(J);
    for (const auto& e : kept) g.add_edge(e.from, e.to);
    std::vector<std::pair<int, int>> candidates;
    for (const auto& p : forward)
      if (!base.has_edge(p.first, p.second)) candidates.push_back(p);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<std::pair<int, int>> added;
    if (place_edges(candidates, n_add, spec.max_parents, g, added) != n_add)
      throw Error(ErrorCode::InvalidSpec, "cannot place the differing edges under the parent cap");
    for (const auto& [a, b] : added) kept.push_back({a, b, edge_weight_draw(rng, spec)});
    inst.dags.push_back(sem_from_edges(J, kept, spec.noise_sd));
  }

  // Mean shifts follow a phase pattern so every pair of clusters differs on most items.
  const double offset = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  inst.cluster_means = Matrix::Zero(K, J);
  for (int k = 0; k < K; ++k) {
    Vector mean;
    Matrix cov;
    sem_moments(inst.dags[k], mean, cov);
    for (int j = 0; j < J; ++j) {
      const double phase = 2.0 * std::numbers::pi * k / K + offset + 2.0 * std::numbers::pi * j / J;
      inst.cluster_means(k, j) = spec.separation * std::sqrt(cov(j, j)) * std::cos(phase);
    }
    auto& d = inst.dags[k];
    for (int j = 0; j < J; ++j) {
      double c = inst.cluster_means(k, j);
      const auto& pa = d.structure.parents(j);
      for (std::size_t m = 0; m < pa.size(); ++m) c -= d.coefficients[j][m] * inst.cluster_means(k, pa[m]);
      d.intercepts[j] = c;
    }
  }

  std::discrete_distribution<int> pick(spec.weights.begin(), spec.weights.end());
  std::normal_distribution<double> noise(0.0, spec.noise_sd);
  inst.labels.resize(static_cast<std::size_t>(spec.n));
  inst.latent.resize(spec.n, J);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const int k = pick(rng);
    inst.labels[i] = k;
    const auto& d = inst.dags[k];
    for (int j : order) {
      double v = d.intercepts[j] + noise(rng);
      const auto& pa = d.structure.parents(j);
      for (std::size_t m = 0; m < pa.size(); ++m) v += d.coefficients[j][m] * inst.latent(i, pa[m]);
      inst.latent(i, j) = v;
    }
  }

  if (!spec.thresholds.empty()) {
    inst.thresholds = spec.thresholds;
  } else {
    inst.thresholds.resize(J);
    for (int j = 0; j < J; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int k = 0; k < K; ++k) {
        Vector mean;
        Matrix cov;
        sem_moments(inst.dags[k], mean, cov);
        const double sd = std::sqrt(cov(j, j));
        lo = std::min(lo, mean[j] - 12.0 * sd);
        hi = std::max(hi, mean[j] + 12.0 * sd);
      }
      const auto cdf = [&](double t) { return mixture_marginal_cdf(inst, j, t); };
      double cum = 0.0;
      const auto& f = spec.marginals[j].frequencies;
      for (std::size_t c = 0; c + 1 < f.size(); ++c) {
        cum += f[c];
        inst.thresholds[j].push_back(bisect(cdf, cum, lo, hi));
      }
    }
  }

  auto& data = inst.data;
  for (const auto& m : spec.marginals) {
    data.item_names.push_back(m.name);
    data.category_counts.push_back(static_cast<int>(m.frequencies.size()));
  }
  data.values.resize(spec.n, J);
  for (Eigen::Index i = 0; i < spec.n; ++i)
    for (int j = 0; j < J; ++j) {
      const auto& t = inst.thresholds[j];
      data.values(i, j) = 1 + static_cast<int>(std::upper_bound(t.begin(), t.end(), inst.latent(i, j)) - t.begin());
    }
  return inst;
}

double aligned_shd(std::span<const int> fitted_labels, std::span<const ArchetypeDag> fitted,
                   std::span<const int> true_labels, std::span<const ArchetypeDag> truth) {
  const auto a = align_clusters(fitted_labels, true_labels);
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < a.candidate_ids.size(); ++i) {
    const int r = a.reference_ids[i];
    if (r == Alignment::kUnmatched) continue;
    sum += shd(fitted[a.candidate_ids[i]].structure, truth[r].structure);
    ++count;
  }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

ReplicateResult run_replicate(const BenchmarkInstance& inst, const BenchmarkOptions& opts) {
  const auto emb = fit_embedding(inst.data);
  const Matrix X = transform(inst.data, emb).X;
  MixtureConfig cfg = opts.mixture;
  cfg.seed = derive_seed(opts.mixture.seed, {inst.spec.seed, static_cast<std::uint64_t>(inst.replicate)});
  SelectionPlan plan = opts.plan;
  plan.seed = cfg.seed;
  plan.threads = 1;

  const auto split = holdout_split(X.rows(), plan.outer_test_fraction, derive_seed(plan.seed, {10}));
  const Matrix Xtr = take_rows(X, split.train);
  const Matrix Xte = take_rows(X, split.test);
  const int K = inst.spec.k_true;

  ReplicateResult out;
  auto add_row = [&](const std::string& model, double mse, const std::vector<int>& labels, double shd_v,
                     int clusters) {
    BenchmarkRow row;
    row.tier = inst.spec.name;
    row.replicate = inst.replicate;
    row.model = model;
    row.mse = mse;
    row.ari = ari(labels, inst.labels);
    row.nmi = nmi(labels, inst.labels);
    row.shd = shd_v;
    row.clusters = clusters;
    out.rows.push_back(row);
  };

  const auto single = fit_single_graph(Xtr, cfg);
  {
    const std::vector<int> labels(static_cast<std::size_t>(X.rows()), 0);
    const std::vector<ArchetypeDag> g{single.dag};
    add_row("single_graph", holdout_mse(single, Xte), labels, aligned_shd(labels, g, inst.labels, inst.dags), 1);
  }
  auto mixture_row = [&](const std::string& name, const MixtureModel& m) {
    const Matrix r = responsibilities_for(m, X);
    const auto labels = hard_assignments(r, m.active);
    add_row(name, holdout_mse(m, Xte), labels, aligned_shd(labels, m.dags, inst.labels, inst.dags),
            effective_k(r, cfg.effective_k_threshold));
  };
  mixture_row("bnp_discovery", fit(Xtr, stage_config(cfg, 1, std::nullopt)));
  {
    const auto mo = fit_mixture_only(Xtr, K, stage_config(cfg, 4, K));
    const Matrix r = responsibilities_for(mo, X);
    const auto labels = hard_assignments(r);
    add_row("mixture_only", holdout_mse(mo, Xte), labels, std::numeric_limits<double>::quiet_NaN(),
            effective_k(r, cfg.effective_k_threshold));
  }
  mixture_row("fixed_k_dag", fit(Xtr, stage_config(cfg, 3, K)));

  if (opts.select_k) {
    out.curve = select_k(Xtr, plan, cfg);
    out.k_star = out.curve.k_star;
  }
  return out;
}

BenchmarkReport run_benchmark(const std::vector<TierSpec>& tiers, const BenchmarkOptions& opts) {
  if (tiers.empty()) throw Error(ErrorCode::InvalidConfig, "no benchmark tiers");
  for (const auto& t : tiers) t.validate();
  struct Job {
    std::size_t tier;
    int rep;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < tiers.size(); ++t)
    for (int r = 0; r < tiers[t].replications; ++r) jobs.push_back({t, r});
  std::vector<ReplicateResult> results(jobs.size());
  parallel_for(jobs.size(), opts.threads, [&](std::size_t i) {
    results[i] = run_replicate(generate(tiers[jobs[i].tier], jobs[i].rep), opts);
  });

  BenchmarkReport rep;
  rep.k_star.resize(tiers.size());
  rep.curves.resize(tiers.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (auto& row : results[i].rows) rep.rows.push_back(row);
    rep.k_star[jobs[i].tier].push_back(results[i].k_star);
    rep.curves[jobs[i].tier].push_back(results[i].curve);
  }

  const std::vector<std::pair<std::string, double BenchmarkRow::*>> metrics{
      {"mse", &BenchmarkRow::mse}, {"ari", &BenchmarkRow::ari}, {"nmi", &BenchmarkRow::nmi}, {"shd", &BenchmarkRow::shd}};
  for (const auto& t : tiers)
    for (const auto& model : benchmark_models())
      for (const auto& [metric, field] : metrics) {
        std::vector<double> v;
        for (const auto& row : rep.rows)
          if (row.tier == t.name && row.model == model && std::isfinite(row.*field)) v.push_back(row.*field);
        if (v.empty()) continue;
        BenchmarkSummary s{t.name, model, metric, 0.0, 0.0, static_cast<int>(v.size())};
        s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        if (v.size() > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - s.mean) * (x - s.mean);
          s.sd = std::sqrt(ss / (v.size() - 1));
        }
        rep.summary.push_back(s);
      }
  return rep;
}

}  // namespace ordmix
