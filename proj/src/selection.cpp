#include "ordmix/selection.hpp"
#include "ordmix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ordmix {

namespace stage {
constexpr std::uint64_t discovery = 1;
constexpr std::uint64_t inner_fold = 2;
constexpr std::uint64_t fixed_train = 3;
constexpr std::uint64_t mixture_only = 4;
constexpr std::uint64_t confirm = 5;
constexpr std::uint64_t outer_split = 10;
constexpr std::uint64_t folds = 11;
}  // namespace stage

void SelectionPlan::validate() const {
  if (k_grid.empty()) throw Error(ErrorCode::InvalidConfig, "K grid is empty");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 1) throw Error(ErrorCode::InvalidConfig, "K grid entries must be >= 1");
    if (i > 0 && k_grid[i] <= k_grid[i - 1])
      throw Error(ErrorCode::InvalidConfig, "K grid must be strictly ascending");
  }
  if (!(outer_test_fraction > 0.0 && outer_test_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "outer test fraction must lie in (0,1)");
  if (inner_folds < 2) throw Error(ErrorCode::InvalidConfig, "need at least two inner folds");
}

namespace {

std::vector<Eigen::Index> shuffled(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

std::vector<Eigen::Index> complement(Eigen::Index n, std::vector<Eigen::Index> taken) {
  std::sort(taken.begin(), taken.end());
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(n) - taken.size());
  std::size_t t = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t < taken.size() && taken[t] == i) {
      ++t;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace

Split holdout_split(Eigen::Index n, double test_fraction, std::uint64_t seed) {
  auto perm = shuffled(n, seed);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(s.test.begin(), s.test.end());
  s.train = complement(n, s.test);
  return s;
}

std::vector<std::vector<Eigen::Index>> fold_blocks(Eigen::Index n, int folds, std::uint64_t seed) {
  auto perm = shuffled(n, seed);
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    const auto lo = static_cast<std::size_t>(n * f / folds);
    const auto hi = static_cast<std::size_t>(n * (f + 1) / folds);
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(lo), perm.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

Matrix take_rows(const Matrix& X, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
  return out;
}

double holdout_mse(const Matrix& X, const Matrix& Xhat) {
  if (X.rows() == 0) throw Error(ErrorCode::EmptyTestSet, "holdout set is empty");
  if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols())
    throw Error(ErrorCode::SchemaMismatch, "prediction shape differs from the holdout matrix");
  return (X - Xhat).squaredNorm() / static_cast<double>(X.size());
}

double holdout_mse(const MixtureModel& model, const Matrix& X_test) {
  if (X_test.rows() == 0) throw Error(ErrorCode::EmptyTestSet, "holdout set is empty");
  return holdout_mse(X_test, predict_scores(model, X_test));
}

double holdout_mse(const BaselineModel& model, const Matrix& X_test) {
  if (X_test.rows() == 0) throw Error(ErrorCode::EmptyTestSet, "holdout set is empty");
  return holdout_mse(X_test, predict_scores(model, X_test));
}

MixtureConfig stage_config(const MixtureConfig& base, std::uint64_t stage, std::optional<int> k,
                           std::initializer_list<std::uint64_t> extra) {
  MixtureConfig c = base;
  c.fixed_k = k;
  std::uint64_t s = derive_seed(base.seed, {stage});
  for (auto e : extra) s = derive_seed(s, {e});
  c.seed = s;
  return c;
}

KCurve select_k(const Matrix& X_train, const SelectionPlan& plan, const MixtureConfig& config) {
  plan.validate();
  const auto N = X_train.rows();
  const int k_hi = plan.k_grid.back();
  if (N < static_cast<Eigen::Index>(plan.inner_folds) * k_hi)
    throw Error(ErrorCode::InvalidConfig, "training set too small for the inner folds and K grid");

  const auto folds = fold_blocks(N, plan.inner_folds, derive_seed(plan.seed, {stage::folds}));
  std::vector<Matrix> train_parts, valid_parts;
  for (const auto& f : folds) {
    valid_parts.push_back(take_rows(X_train, f));
    train_parts.push_back(take_rows(X_train, complement(N, f)));
  }

  const std::size_t G = plan.k_grid.size();
  const std::size_t F = folds.size();
  KCurve curve;
  curve.k_grid = plan.k_grid;
  curve.fold_mse.assign(G, std::vector<double>(F, 0.0));
  parallel_for(G * F, plan.threads, [&](std::size_t job) {
    const std::size_t g = job / F, f = job % F;
    const int K = plan.k_grid[g];
    const auto cfg = stage_config(config, stage::inner_fold, K, {static_cast<std::uint64_t>(K), f});
    const auto model = fit(train_parts[f], cfg);
    curve.fold_mse[g][f] = holdout_mse(model, valid_parts[f]);
  });

  curve.mse.resize(G);
  std::size_t best = 0;
  for (std::size_t g = 0; g < G; ++g) {
    double s = 0.0;
    for (double v : curve.fold_mse[g]) s += v;
    curve.mse[g] = s / static_cast<double>(F);
    if (curve.mse[g] < curve.mse[best]) best = g;
  }
  curve.k_star = plan.k_grid[best];
  return curve;
}

namespace {

// Collapse a discovery partition onto its K heaviest clusters.
std::vector<int> labels_from_discovery(const MixtureModel& discovery, int K) {
  const Vector mass = discovery.cluster_mass();
  std::vector<int> order(static_cast<std::size_t>(mass.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mass[a] > mass[b]; });
  std::vector<int> remap(order.size(), -1);
  for (int k = 0; k < K && k < static_cast<int>(order.size()); ++k) remap[order[k]] = k;
  const Matrix& r = discovery.responsibilities;
  std::vector<int> labels(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    int best = -1;
    for (Eigen::Index c = 0; c < r.cols(); ++c)
      if (remap[c] >= 0 && (best < 0 || r(i, c) > r(i, best))) best = static_cast<int>(c);
    labels[i] = remap[best];
  }
  return labels;
}

}  // namespace

SelectionReport run_pipeline(const Matrix& X, const SelectionPlan& plan, const MixtureConfig& config) {
  plan.validate();
  config.validate();
  SelectionReport rep;
  rep.split = holdout_split(X.rows(), plan.outer_test_fraction, derive_seed(plan.seed, {stage::outer_split}));
  const Matrix X_train = take_rows(X, rep.split.train);
  const Matrix X_test = take_rows(X, rep.split.test);

  rep.discovery = fit(X_train, stage_config(config, stage::discovery, std::nullopt));
  rep.k_bnp = effective_k(rep.discovery, config.effective_k_threshold);

  rep.curve = select_k(X_train, plan, config);
  const int K = rep.curve.k_star;

  std::vector<int> init;
  if (plan.seed_from_discovery) init = labels_from_discovery(rep.discovery, K);
  rep.fixed_k = fit(X_train, stage_config(config, stage::fixed_train, K), init.empty() ? nullptr : &init);
  rep.single_graph = fit_single_graph(X_train, config);
  rep.mixture_only = fit_mixture_only(X_train, K, stage_config(config, stage::mixture_only, K));

  const double base = holdout_mse(rep.single_graph, X_test);
  auto score = [&](std::string name, double mse) {
    rep.holdout.push_back({std::move(name), mse, (mse - base) / base});
  };
  score("single_graph", base);
  score("bnp_discovery", holdout_mse(rep.discovery, X_test));
  score("mixture_only", holdout_mse(rep.mixture_only, X_test));
  score("fixed_k_dag", holdout_mse(rep.fixed_k, X_test));

  rep.confirmatory = fit(X, stage_config(config, stage::confirm, K));
  return rep;
}

SelectionReport run_pipeline(const OrdinalDataset& data, const SelectionPlan& plan,
                             const MixtureConfig& config) {
  auto emb = fit_embedding(data);
  const auto tm = transform(data, emb);
  auto rep = run_pipeline(tm.X, plan, config);
  rep.item_names = data.item_names;
  rep.embedding = std::move(emb);
  return rep;
}

}  // namespace ordmix
