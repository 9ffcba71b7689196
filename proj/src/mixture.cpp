#include "ordmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace ordmix {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_active(std::span<const char> active, Eigen::Index k) {
  return active.empty() || active[static_cast<std::size_t>(k)] != 0;
}

std::span<const double> row_of(const Matrix& X, Eigen::Index i) {
  return {X.data() + i * X.cols(), static_cast<std::size_t>(X.cols())};
}

Matrix log_densities(const Matrix& X, std::span<const ArchetypeDag> dags,
                     std::span<const char> active) {
  const auto K = static_cast<Eigen::Index>(dags.size());
  Matrix L = Matrix::Constant(X.rows(), K, kNegInf);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto x = row_of(X, i);
    for (Eigen::Index k = 0; k < K; ++k)
      if (is_active(active, k)) L(i, k) = log_density_row(x, dags[k]);
  }
  return L;
}

// Row-wise normalisation of log-joint terms. Returns the per-row log normaliser.
Vector normalise_rows(const Matrix& logjoint, Matrix& r, std::span<const char> active) {
  const auto N = logjoint.rows();
  const auto K = logjoint.cols();
  r.setZero(N, K);
  Vector lse(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    double mx = kNegInf;
    for (Eigen::Index k = 0; k < K; ++k)
      if (is_active(active, k)) mx = std::max(mx, logjoint(i, k));
    if (!std::isfinite(mx)) {
      // Every component underflowed; spread the row evenly over active clusters.
      int n_act = 0;
      for (Eigen::Index k = 0; k < K; ++k) n_act += is_active(active, k) ? 1 : 0;
      for (Eigen::Index k = 0; k < K; ++k)
        if (is_active(active, k)) r(i, k) = 1.0 / n_act;
      lse[i] = mx;
      continue;
    }
    double s = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (!is_active(active, k)) continue;
      const double e = std::exp(logjoint(i, k) - mx);
      r(i, k) = e;
      s += e;
    }
    for (Eigen::Index k = 0; k < K; ++k) r(i, k) /= s;
    lse[i] = mx + std::log(s);
  }
  return lse;
}

Matrix add_log_weights(Matrix L, const Vector& weights, std::span<const char> active) {
  for (Eigen::Index k = 0; k < L.cols(); ++k) {
    const double lw = (is_active(active, k) && weights[k] > 0.0) ? std::log(weights[k]) : kNegInf;
    L.col(k).array() += lw;
  }
  return L;
}

Vector restrict_weights(const Vector& w, std::span<const char> active) {
  Vector out = w;
  double s = 0.0;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    if (!is_active(active, k)) out[k] = 0.0;
    s += out[k];
  }
  if (s > 0.0) out /= s;
  return out;
}

Matrix hard_matrix(const std::vector<int>& labels, int K) {
  Matrix r = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
  for (std::size_t i = 0; i < labels.size(); ++i) r(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return r;
}

std::vector<double> column(const Matrix& r, Eigen::Index k) {
  std::vector<double> c(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) c[static_cast<std::size_t>(i)] = r(i, k);
  return c;
}

// Deactivate clusters with mass below n_min, always leaving at least one.
bool prune_small(const Vector& mass, double n_min, std::vector<char>& active) {
  Eigen::Index keep = -1;
  for (Eigen::Index k = 0; k < mass.size(); ++k)
    if (active[k] && (keep < 0 || mass[k] > mass[keep])) keep = k;
  bool changed = false;
  for (Eigen::Index k = 0; k < mass.size(); ++k) {
    if (active[k] && k != keep && mass[k] < n_min) {
      active[k] = 0;
      changed = true;
    }
  }
  return changed;
}

double assignment_change(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i] ? 1 : 0;
  return a.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(a.size());
}

void check_finite(const Matrix& X) {
  if (!X.allFinite()) throw Error(ErrorCode::NonFinite, "input matrix contains non-finite values");
}

}  // namespace

void MixtureConfig::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidConfig, "alpha must be positive");
  if (components() < 1) throw Error(ErrorCode::InvalidConfig, "number of components must be >= 1");
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 1");
  if (!(eps_loglik > 0.0) || !(eps_assign > 0.0))
    throw Error(ErrorCode::InvalidConfig, "convergence thresholds must be positive");
  if (n_min < 0.0) throw Error(ErrorCode::InvalidConfig, "n_min must be non-negative");
  if (dag.max_parents < 1) throw Error(ErrorCode::InvalidConfig, "max_parents must be >= 1");
  if (!(dag.penalty >= 0.0)) throw Error(ErrorCode::InvalidConfig, "penalty must be non-negative");
}

const char* fit_status_name(FitStatus s) {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max_iterations";
    case FitStatus::ObjectiveStalled: return "objective_stalled";
  }
  return "?";
}

const char* baseline_name(BaselineVariant v) {
  return v == BaselineVariant::SingleGraph ? "single_graph" : "mixture_only";
}

int MixtureModel::active_count() const {
  return static_cast<int>(std::count(active.begin(), active.end(), 1));
}

Vector MixtureModel::cluster_mass() const { return responsibilities.colwise().sum().transpose(); }

std::vector<double> stick_breaking_weights(std::span<const double> V, int k_max) {
  if (k_max < 1) throw Error(ErrorCode::InvalidConfig, "K_max must be >= 1");
  if (static_cast<int>(V.size()) < k_max - 1)
    throw Error(ErrorCode::InvalidConfig, "need at least K_max - 1 stick fractions");
  std::vector<double> pi(k_max);
  double remaining = 1.0;
  for (int k = 0; k < k_max - 1; ++k) {
    if (!(V[k] > 0.0 && V[k] < 1.0))
      throw Error(ErrorCode::DomainError, "stick fractions must lie in (0,1)");
    pi[k] = V[k] * remaining;
    remaining *= 1.0 - V[k];
  }
  pi[k_max - 1] = remaining;
  // Remainder absorbed exactly so that the weights sum to one.
  double head = 0.0;
  for (int k = 0; k < k_max - 1; ++k) head += pi[k];
  pi[k_max - 1] = 1.0 - head;
  return pi;
}

std::vector<double> draw_stick_breaking(double alpha, int k_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> V(std::max(0, k_max - 1));
  for (auto& v : V) {
    double u;
    do {
      u = unif(rng);
    } while (u <= 0.0);
    // Beta(1, alpha) inverse CDF: 1 - u^(1/alpha), kept inside (0,1).
    v = std::clamp(1.0 - std::pow(u, 1.0 / alpha), 1e-12, 1.0 - 1e-12);
  }
  return stick_breaking_weights(V, k_max);
}

Matrix e_step(const Matrix& X, std::span<const ArchetypeDag> dags, const Vector& weights,
              std::span<const char> active) {
  Matrix r;
  normalise_rows(add_log_weights(log_densities(X, dags, active), weights, active), r, active);
  return r;
}

Vector smooth_weights(const Matrix& r, double alpha, std::span<const char> active) {
  const auto K = r.cols();
  const double N = static_cast<double>(r.rows());
  Vector w = Vector::Zero(K);
  for (Eigen::Index k = 0; k < K; ++k)
    if (is_active(active, k)) w[k] = (r.col(k).sum() + alpha / K) / (N + alpha);
  const double s = w.sum();
  if (s > 0.0) w /= s;
  return w;
}

std::vector<ArchetypeDag> m_step(const Matrix& X, const Matrix& r, const MixtureConfig& config,
                                 std::span<const ArchetypeDag> warm, std::vector<char>& active) {
  const auto K = r.cols();
  const int J = static_cast<int>(X.cols());
  if (active.empty()) active.assign(K, 1);
  prune_small(r.colwise().sum().transpose(), config.n_min, active);

  std::vector<ArchetypeDag> out(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const bool has_warm = static_cast<Eigen::Index>(warm.size()) == K;
    const double mass = r.col(k).sum();
    if (!active[k] || mass < 1.0) {
      // Pruned or numerically empty: parameters stay frozen.
      out[k] = has_warm ? warm[k] : ArchetypeDag::empty(J);
      continue;
    }
    const auto w = column(r, k);
    WeightedMoments m(X, w);
    out[k] = greedy_search(m, config.dag, has_warm ? &warm[k].structure : nullptr).dag;
  }
  return out;
}

double mixture_loglik(const Matrix& X, std::span<const ArchetypeDag> dags, const Vector& weights,
                      std::span<const char> active) {
  Matrix r;
  const Vector lse =
      normalise_rows(add_log_weights(log_densities(X, dags, active), weights, active), r, active);
  return lse.sum();
}

double penalized_objective(const Matrix& X, const Matrix& r, std::span<const ArchetypeDag> dags,
                           const Vector& weights, std::span<const char> active,
                           const MixtureConfig& config) {
  const Matrix L = log_densities(X, dags, active);
  const auto K = r.cols();
  double total = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (!is_active(active, k)) continue;
    const double lw = weights[k] > 0.0 ? std::log(weights[k]) : kNegInf;
    double mass = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      const double rik = r(i, k);
      if (rik <= 0.0) continue;
      mass += rik;
      total += rik * (lw + L(i, k) - std::log(rik));
    }
    total += (config.alpha / K) * lw;
    double d = 0.0;
    for (int j = 0; j < dags[k].nodes(); ++j)
      d += static_cast<double>(dags[k].structure.parents(j).size() + 1);
    total -= config.dag.penalty * 0.5 * d * std::log(std::max(mass, 1.0));
  }
  return total;
}

std::vector<int> hard_assignments(const Matrix& r, std::span<const char> active) {
  std::vector<int> z(static_cast<std::size_t>(r.rows()), 0);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    int best = -1;
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      if (!is_active(active, k)) continue;
      if (best < 0 || r(i, k) > r(i, best)) best = static_cast<int>(k);
    }
    z[static_cast<std::size_t>(i)] = std::max(best, 0);
  }
  return z;
}

std::vector<int> kmeans_partition(const Matrix& X, int k, std::uint64_t seed, int max_iters) {
  const auto N = X.rows();
  if (k < 1 || k > N) throw Error(ErrorCode::InvalidConfig, "k-means needs 1 <= k <= N");
  std::vector<int> labels(static_cast<std::size_t>(N), 0);
  if (k == 1) return labels;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix centers(k, X.cols());
  Vector d2(N);

  // k-means++ seeding
  centers.row(0) = X.row(std::uniform_int_distribution<Eigen::Index>(0, N - 1)(rng));
  d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = unif(rng) * total;
      double acc = 0.0;
      pick = N - 1;
      for (Eigen::Index i = 0; i < N; ++i) {
        acc += d2[i];
        if (acc >= u && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<Eigen::Index>(0, N - 1)(rng);
    }
    centers.row(c) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  for (int it = 0; it < max_iters; ++it) {
    bool changed = it == 0;
    for (Eigen::Index i = 0; i < N; ++i) {
      int best = 0;
      double bd = (X.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double dc = (X.row(i) - centers.row(c)).squaredNorm();
        if (dc < bd) {
          bd = dc;
          best = c;
        }
      }
      d2[i] = bd;
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    Matrix sums = Matrix::Zero(k, X.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < N; ++i) {
      sums.row(labels[i]) += X.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        // Empty cluster: restart it at the worst-fit point.
        Eigen::Index far = 0;
        d2.maxCoeff(&far);
        centers.row(c) = X.row(far);
        d2[far] = 0.0;
      }
    }
  }
  return labels;
}

MixtureModel fit(const Matrix& X, const MixtureConfig& config, const std::vector<int>* initial_labels) {
  config.validate();
  check_finite(X);
  const auto N = X.rows();
  const int K = config.components();
  if (N < K) throw Error(ErrorCode::InvalidConfig, "fewer rows than mixture components");

  MixtureModel model;
  model.config = config;
  model.discovery = !config.fixed_k.has_value();

  std::vector<int> labels;
  if (initial_labels) {
    if (static_cast<Eigen::Index>(initial_labels->size()) != N)
      throw Error(ErrorCode::LengthMismatch, "initial labels length differs from row count");
    for (int l : *initial_labels)
      if (l < 0 || l >= K) throw Error(ErrorCode::InvalidConfig, "initial label out of range");
    labels = *initial_labels;
  } else {
    labels = kmeans_partition(X, K, derive_seed(config.seed, {0x6b6d65616e73ULL}), config.kmeans_iters);
  }

  std::vector<char> active(K, 1);
  {
    Vector counts = Vector::Zero(K);
    for (int l : labels) counts[l] += 1.0;
    if (prune_small(counts, config.n_min, active)) {
      // Rows of undersized initial groups move to the nearest surviving centroid.
      Matrix centroid = Matrix::Zero(K, X.cols());
      for (Eigen::Index i = 0; i < N; ++i) centroid.row(labels[i]) += X.row(i);
      for (int k = 0; k < K; ++k)
        if (counts[k] > 0) centroid.row(k) /= counts[k];
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[labels[i]]) continue;
        int best = -1;
        double bd = 0.0;
        for (int k = 0; k < K; ++k) {
          if (!active[k]) continue;
          const double dk = (X.row(i) - centroid.row(k)).squaredNorm();
          if (best < 0 || dk < bd) {
            best = k;
            bd = dk;
          }
        }
        labels[i] = best;
      }
    }
  }

  Matrix r = hard_matrix(labels, K);
  std::vector<ArchetypeDag> dags = m_step(X, r, config, {}, active);
  Vector weights;
  if (model.discovery) {
    const auto pi = draw_stick_breaking(config.alpha, K, derive_seed(config.seed, {0x737469636bULL}));
    weights = restrict_weights(Eigen::Map<const Vector>(pi.data(), K), active);
  } else {
    weights = smooth_weights(r, config.alpha, active);
  }

  auto record = [&](int iteration, double dz, bool pruned) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.loglik = mixture_loglik(X, dags, weights, active);
    rec.penalized_objective = penalized_objective(X, r, dags, weights, active, config);
    rec.assignment_change = dz;
    rec.effective_k = effective_k(r, config.effective_k_threshold);
    rec.active_clusters = static_cast<int>(std::count(active.begin(), active.end(), 1));
    rec.pruned = pruned;
    return rec;
  };

  model.trace.push_back(record(0, 1.0, false));
  std::vector<int> z = hard_assignments(r, active);
  model.status = FitStatus::MaxIterations;

  for (int t = 1; t <= config.max_iters; ++t) {
    std::vector<char> next_active = active;
    Vector w = weights;
    Matrix r_next = e_step(X, dags, w, next_active);
    bool pruned = false;
    while (prune_small(r_next.colwise().sum().transpose(), config.n_min, next_active)) {
      pruned = true;
      w = restrict_weights(w, next_active);
      r_next = e_step(X, dags, w, next_active);
    }
    std::vector<ArchetypeDag> dags_next = m_step(X, r_next, config, dags, next_active);
    Vector weights_next = smooth_weights(r_next, config.alpha, next_active);
    std::vector<int> z_next = hard_assignments(r_next, next_active);
    const double dz = assignment_change(z, z_next);

    // Commit tentatively, then keep the update only if the penalised objective
    // did not decrease (pruning changes the model space and resets the baseline).
    std::swap(active, next_active);
    std::swap(r, r_next);
    std::swap(dags, dags_next);
    std::swap(weights, weights_next);
    IterationRecord rec = record(t, dz, pruned);
    const IterationRecord& prev = model.trace.back();
    if (!pruned && rec.penalized_objective < prev.penalized_objective) {
      std::swap(active, next_active);
      std::swap(r, r_next);
      std::swap(dags, dags_next);
      std::swap(weights, weights_next);
      model.status = FitStatus::ObjectiveStalled;
      break;
    }
    model.trace.push_back(rec);
    z = std::move(z_next);
    if (std::abs(rec.loglik - prev.loglik) < config.eps_loglik && dz < config.eps_assign) {
      model.status = FitStatus::Converged;
      break;
    }
  }

  // Report the posterior under the final parameters.
  model.responsibilities = e_step(X, dags, weights, active);
  model.dags = std::move(dags);
  model.weights = std::move(weights);
  model.active = std::move(active);
  model.assignments = hard_assignments(model.responsibilities, model.active);
  return model;
}

int effective_k(const Matrix& responsibilities, double threshold) {
  const double N = static_cast<double>(responsibilities.rows());
  int count = 0;
  for (Eigen::Index k = 0; k < responsibilities.cols(); ++k)
    if (responsibilities.col(k).sum() > threshold * N) ++count;
  return count;
}

int effective_k(const MixtureModel& model, double threshold) {
  return effective_k(model.responsibilities, threshold);
}

BaselineModel fit_single_graph(const Matrix& X, const MixtureConfig& config) {
  config.validate();
  check_finite(X);
  if (X.rows() == 0) throw Error(ErrorCode::EmptyDataset, "no rows to fit");
  BaselineModel out;
  out.variant = BaselineVariant::SingleGraph;
  const std::vector<double> ones(static_cast<std::size_t>(X.rows()), 1.0);
  auto res = greedy_search(WeightedMoments(X, ones), config.dag);
  out.dag = std::move(res.dag);
  out.search = std::move(res.trace);
  out.weights = Vector::Ones(1);
  out.responsibilities = Matrix::Ones(X.rows(), 1);
  out.assignments.assign(static_cast<std::size_t>(X.rows()), 0);
  return out;
}

namespace {

struct DiagonalParams {
  Matrix means, variances;
};

void diag_m_step(const Matrix& X, const Matrix& r, double floor, DiagonalParams& p) {
  const auto K = r.cols();
  const auto J = X.cols();
  if (p.means.size() == 0) {
    p.means = X.colwise().mean().replicate(K, 1);
    p.variances = Matrix::Ones(K, J);
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const double n = r.col(k).sum();
    if (n < 1e-10) continue;
    Eigen::RowVectorXd mu = (r.col(k).transpose() * X) / n;
    Matrix centered = X.rowwise() - mu;
    Eigen::RowVectorXd var = (r.col(k).transpose() * centered.cwiseProduct(centered)) / n;
    p.means.row(k) = mu;
    p.variances.row(k) = var.cwiseMax(floor);
  }
}

Matrix diag_log_densities(const Matrix& X, const DiagonalParams& p) {
  const auto K = p.means.rows();
  Matrix L(X.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double logdet = p.variances.row(k).array().log().sum();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double q = ((X.row(i) - p.means.row(k)).array().square() / p.variances.row(k).array()).sum();
      L(i, k) = -0.5 * (X.cols() * kLog2Pi + logdet + q);
    }
  }
  return L;
}

}  // namespace

BaselineModel fit_mixture_only(const Matrix& X, int k, const MixtureConfig& config,
                               const std::vector<int>* initial_labels) {
  MixtureConfig cfg = config;
  cfg.fixed_k = k;
  cfg.validate();
  check_finite(X);
  const auto N = X.rows();
  if (N < k) throw Error(ErrorCode::InvalidConfig, "fewer rows than mixture components");

  std::vector<int> labels =
      initial_labels ? *initial_labels
                     : kmeans_partition(X, k, derive_seed(config.seed, {0x6b6d65616e73ULL}),
                                        config.kmeans_iters);
  if (static_cast<Eigen::Index>(labels.size()) != N)
    throw Error(ErrorCode::LengthMismatch, "initial labels length differs from row count");

  Matrix r = hard_matrix(labels, k);
  DiagonalParams params;
  diag_m_step(X, r, config.dag.variance_floor, params);
  Vector weights = smooth_weights(r, config.alpha);

  BaselineModel out;
  out.variant = BaselineVariant::MixtureOnly;
  out.status = FitStatus::MaxIterations;
  std::vector<int> z = labels;
  double prev_ll = 0.0;
  for (int t = 1; t <= config.max_iters; ++t) {
    Matrix logjoint = add_log_weights(diag_log_densities(X, params), weights, {});
    const Vector lse = normalise_rows(logjoint, r, {});
    IterationRecord rec;
    rec.iteration = t;
    rec.loglik = lse.sum();
    double prior = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) prior += (config.alpha / k) * std::log(weights[c]);
    rec.penalized_objective = rec.loglik + prior;
    std::vector<int> z_next = hard_assignments(r);
    rec.assignment_change = assignment_change(z, z_next);
    rec.effective_k = effective_k(r, config.effective_k_threshold);
    rec.active_clusters = k;
    out.trace.push_back(rec);
    z = std::move(z_next);

    diag_m_step(X, r, config.dag.variance_floor, params);
    weights = smooth_weights(r, config.alpha);
    if (t > 1 && std::abs(rec.loglik - prev_ll) < config.eps_loglik &&
        rec.assignment_change < config.eps_assign) {
      out.status = FitStatus::Converged;
      break;
    }
    prev_ll = rec.loglik;
  }

  normalise_rows(add_log_weights(diag_log_densities(X, params), weights, {}), r, {});
  out.means = std::move(params.means);
  out.variances = std::move(params.variances);
  out.weights = std::move(weights);
  out.responsibilities = std::move(r);
  out.assignments = hard_assignments(out.responsibilities);
  return out;
}

Matrix responsibilities_for(const MixtureModel& model, const Matrix& X) {
  if (!model.dags.empty() && X.cols() != model.dags.front().nodes())
    throw Error(ErrorCode::SchemaMismatch, "item count differs from the fitted model");
  return e_step(X, model.dags, model.weights, model.active);
}

Matrix responsibilities_for(const BaselineModel& model, const Matrix& X) {
  if (model.variant == BaselineVariant::SingleGraph) {
    if (X.cols() != model.dag.nodes())
      throw Error(ErrorCode::SchemaMismatch, "item count differs from the fitted model");
    return Matrix::Ones(X.rows(), 1);
  }
  if (X.cols() != model.means.cols())
    throw Error(ErrorCode::SchemaMismatch, "item count differs from the fitted model");
  DiagonalParams p{model.means, model.variances};
  Matrix r;
  normalise_rows(add_log_weights(diag_log_densities(X, p), model.weights, {}), r, {});
  return r;
}

Matrix predict_scores(const MixtureModel& model, const Matrix& X) {
  const Matrix r = responsibilities_for(model, X);
  const auto J = X.cols();
  Matrix out = Matrix::Zero(X.rows(), J);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto x = row_of(X, i);
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      const double rik = r(i, k);
      if (rik == 0.0) continue;
      for (Eigen::Index j = 0; j < J; ++j)
        out(i, j) += rik * model.dags[k].conditional_mean(x, static_cast<int>(j));
    }
  }
  return out;
}

Matrix predict_scores(const BaselineModel& model, const Matrix& X) {
  if (model.variant == BaselineVariant::SingleGraph) {
    if (X.cols() != model.dag.nodes())
      throw Error(ErrorCode::SchemaMismatch, "item count differs from the fitted model");
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const auto x = row_of(X, i);
      for (Eigen::Index j = 0; j < X.cols(); ++j) out(i, j) = model.dag.conditional_mean(x, static_cast<int>(j));
    }
    return out;
  }
  const Matrix r = responsibilities_for(model, X);
  return r * model.means;
}

}  // namespace ordmix
