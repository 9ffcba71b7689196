#include "ordmix/stability.hpp"
#include "ordmix/metrics.hpp"
#include "ordmix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace ordmix {

SummaryStats summarize(std::span<const double> v) {
  SummaryStats s;
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

namespace {

std::vector<Eigen::Index> identity_rows(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return idx;
}

std::vector<Eigen::Index> uniform_resample(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& i : idx) i = pick(rng);
  return idx;
}

// Original rows through an embedding fit elsewhere; falls back to a fresh
// embedding of the rows themselves when they hold a category it never saw.
Matrix embed_rows(const OrdinalDataset& rows, const ScoreEmbedding& emb, bool& fallback) {
  try {
    fallback = false;
    return transform(rows, emb).X;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnseenCategory) throw;
    fallback = true;
    return transform(rows, fit_embedding(rows)).X;
  }
}

Matrix cluster_profiles(const Matrix& X, std::span<const int> labels) {
  const int K = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  Matrix sums = Matrix::Zero(K, X.cols());
  Vector counts = Vector::Zero(K);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(labels[i]) += X.row(static_cast<Eigen::Index>(i));
    counts[labels[i]] += 1.0;
  }
  for (int k = 0; k < K; ++k)
    if (counts[k] > 0) sums.row(k) /= counts[k];
  return sums;
}

int min_cluster_size(std::span<const int> labels) {
  std::vector<int> counts;
  for (int l : labels) {
    if (l >= static_cast<int>(counts.size())) counts.resize(l + 1, 0);
    ++counts[l];
  }
  int m = 0;
  for (int c : counts)
    if (c > 0 && (m == 0 || c < m)) m = c;
  return m;
}

std::string format_value(const std::string& key, double v) {
  std::ostringstream os;
  os << key << '=' << v;
  return os.str();
}

}  // namespace

const char* bootstrap_k_name(BootstrapK m) {
  switch (m) {
    case BootstrapK::Pipeline: return "pipeline";
    case BootstrapK::Pinned: return "pinned";
  }
  return "pipeline";
}

BootstrapK bootstrap_k_from_name(const std::string& name) {
  for (auto m : {BootstrapK::Pipeline, BootstrapK::Pinned})
    if (name == bootstrap_k_name(m)) return m;
  throw Error(ErrorCode::InvalidConfig, "bootstrap K mode must be pipeline or pinned, got '" + name + "'");
}

BootstrapReport bootstrap_stability(const OrdinalDataset& data, const MixtureModel& reference,
                                    const BootstrapOptions& opts, const MixtureConfig& config) {
  if (opts.B < 1) throw Error(ErrorCode::InvalidConfig, "bootstrap needs B >= 1");
  if (static_cast<Eigen::Index>(reference.assignments.size()) != data.rows())
    throw Error(ErrorCode::LengthMismatch, "reference assignments do not cover the data rows");
  const auto ref_emb = fit_embedding(data);

  BootstrapReport rep;
  rep.B = opts.B;
  rep.replicates.resize(static_cast<std::size_t>(opts.B));
  parallel_for(rep.replicates.size(), opts.threads, [&](std::size_t b) {
    const auto idx = opts.identity_resample ? identity_rows(data.rows())
                                            : uniform_resample(data.rows(), derive_seed(opts.seed, {b}));
    const auto sample = data.select_rows(idx);
    const auto emb = fit_embedding(sample);
    const Matrix Xb = transform(sample, emb).X;

    BootstrapReplicate out;
    out.index = static_cast<int>(b);
    MixtureModel conf;
    if (opts.k_mode == BootstrapK::Pipeline) {
      SelectionPlan plan = opts.plan;
      if (opts.threads > 1) plan.threads = 1;
      auto run = run_pipeline(Xb, plan, config);
      out.effective_k = run.k_bnp;
      conf = std::move(run.confirmatory);
    } else {
      out.effective_k = effective_k(fit(Xb, stage_config(config, 1, std::nullopt)), config.effective_k_threshold);
      conf = fit(Xb, reference.config);
    }
    out.k_confirm = conf.active_count();

    Matrix Xo;
    try {
      Xo = transform(data, emb).X;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnseenCategory) throw;
      Xo = transform(data, ref_emb).X;
      out.embedding_fallback = true;
    }
    const Matrix r = responsibilities_for(conf, Xo);
    const auto labels = hard_assignments(r, conf.active);
    out.agreement = assignment_agreement(labels, reference.assignments);
    out.mean_max_responsibility = r.rowwise().maxCoeff().mean();
    rep.replicates[b] = out;
  });

  std::vector<double> agree;
  double k_sum = 0.0, mmr_sum = 0.0;
  for (const auto& r : rep.replicates) {
    agree.push_back(r.agreement);
    k_sum += r.effective_k;
    mmr_sum += r.mean_max_responsibility;
  }
  rep.agreement = summarize(agree);
  rep.mean_effective_k = k_sum / opts.B;
  rep.mean_max_responsibility = mmr_sum / opts.B;
  return rep;
}

SensitivityContext make_reference(const OrdinalDataset& data, const SelectionPlan& plan,
                                  const MixtureConfig& config, const std::vector<std::string>& base_items) {
  SensitivityContext ctx;
  ctx.all_items = data;
  ctx.data = base_items.empty() ? data : data.select_items(base_items);
  ctx.plan = plan;
  ctx.config = config;
  ctx.reference = run_pipeline(ctx.data, plan, config);
  ctx.embedding = ctx.reference.embedding;
  ctx.X = transform(ctx.data, ctx.embedding).X;
  ctx.labels = hard_assignments(ctx.reference.confirmatory.responsibilities, ctx.reference.confirmatory.active);
  return ctx;
}

SensitivitySetting compare_to_reference(const SensitivityContext& ctx, const OrdinalDataset& items_data,
                                        const SelectionReport& run) {
  bool fallback = false;
  const Matrix Xo = embed_rows(items_data, run.embedding, fallback);
  const auto& model = run.confirmatory;
  const Matrix r = responsibilities_for(model, Xo);

  SensitivitySetting s;
  s.labels = hard_assignments(r, model.active);
  s.mse = run.holdout.back().mse;
  s.k_star = run.curve.k_star;
  s.k_bnp = run.k_bnp;
  s.effective_k = effective_k(r, ctx.config.effective_k_threshold);
  s.min_cluster = min_cluster_size(s.labels);

  const auto align = align_clusters(s.labels, ctx.labels);
  s.agreement = assignment_agreement(s.labels, ctx.labels, align);

  std::vector<int> ref_nodes, run_nodes;
  for (std::size_t j = 0; j < ctx.data.item_names.size(); ++j) {
    const int k = items_data.item_index(ctx.data.item_names[j]);
    if (k < 0) continue;
    ref_nodes.push_back(static_cast<int>(j));
    run_nodes.push_back(k);
  }
  double shd_sum = 0.0, jac_sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < align.candidate_ids.size(); ++i) {
    const int ref = align.reference_ids[i];
    if (ref == Alignment::kUnmatched) continue;
    const auto g_run = induced_subgraph(model.dags[align.candidate_ids[i]].structure, run_nodes);
    const auto g_ref = induced_subgraph(ctx.reference.confirmatory.dags[ref].structure, ref_nodes);
    shd_sum += shd(g_run, g_ref);
    jac_sum += edge_jaccard(g_run, g_ref);
    ++pairs;
  }
  s.mean_shd = pairs ? shd_sum / pairs : 0.0;
  s.mean_jaccard = pairs ? jac_sum / pairs : 0.0;

  Matrix shared(ctx.X.rows(), static_cast<Eigen::Index>(ref_nodes.size()));
  for (std::size_t c = 0; c < ref_nodes.size(); ++c) shared.col(static_cast<Eigen::Index>(c)) = ctx.X.col(ref_nodes[c]);
  s.profile_rmse = profile_rmse(cluster_profiles(shared, s.labels), cluster_profiles(shared, ctx.labels), align);
  return s;
}

SensitivityReport alpha_sweep(const SensitivityContext& ctx, const std::vector<double>& alphas) {
  if (alphas.empty()) throw Error(ErrorCode::InvalidConfig, "alpha sweep needs at least one value");
  SensitivityReport rep;
  rep.axis = "alpha";
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidConfig, "alpha must be positive");
    MixtureConfig cfg = ctx.config;
    cfg.alpha = a;
    auto s = compare_to_reference(ctx, ctx.data, run_pipeline(ctx.data, ctx.plan, cfg));
    s.label = format_value("alpha", a);
    s.value = a;
    rep.settings.push_back(std::move(s));
  }
  return rep;
}

SensitivityReport n_min_sweep(const SensitivityContext& ctx, const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw Error(ErrorCode::InvalidConfig, "n_min sweep needs at least one value");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw Error(ErrorCode::InvalidConfig, "n_min thresholds must be ascending");
  SensitivityReport rep;
  rep.axis = "n_min";
  for (double t : thresholds) {
    MixtureConfig cfg = ctx.config;
    cfg.n_min = t;
    auto s = compare_to_reference(ctx, ctx.data, run_pipeline(ctx.data, ctx.plan, cfg));
    s.label = format_value("n_min", t);
    s.value = t;
    rep.settings.push_back(std::move(s));
  }
  return rep;
}

SensitivityReport item_set_sweep(const SensitivityContext& ctx, const std::vector<ItemVariant>& variants) {
  SensitivityReport rep;
  rep.axis = "item_set";
  for (const auto& v : variants) {
    std::vector<std::string> items = ctx.data.item_names;
    for (const auto& name : v.remove) {
      auto it = std::find(items.begin(), items.end(), name);
      if (it == items.end())
        throw Error(ErrorCode::InvalidVariant, "variant '" + v.label + "' removes absent item '" + name + "'");
      items.erase(it);
    }
    for (const auto& name : v.add) {
      if (ctx.all_items.item_index(name) < 0)
        throw Error(ErrorCode::InvalidVariant, "variant '" + v.label + "' adds unknown item '" + name + "'");
      if (std::find(items.begin(), items.end(), name) != items.end())
        throw Error(ErrorCode::InvalidVariant, "variant '" + v.label + "' adds present item '" + name + "'");
      items.push_back(name);
    }
    if (items.size() < 3)
      throw Error(ErrorCode::InvalidVariant, "variant '" + v.label + "' leaves fewer than three items");
    const auto sub = ctx.all_items.select_items(items);
    auto s = compare_to_reference(ctx, sub, run_pipeline(sub, ctx.plan, ctx.config));
    s.label = v.label;
    s.value = static_cast<double>(items.size());
    rep.settings.push_back(std::move(s));
  }
  return rep;
}

SensitivityReport weight_resample_refit(const SensitivityContext& ctx, std::span<const double> row_weights,
                                        const WeightResampleOptions& opts) {
  if (opts.R < 1) throw Error(ErrorCode::InvalidConfig, "weight resampling needs R >= 1");
  if (static_cast<Eigen::Index>(row_weights.size()) != ctx.data.rows())
    throw Error(ErrorCode::LengthMismatch, "one weight per row is required");
  for (double w : row_weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidWeights, "row weights must be positive");

  SensitivityReport rep;
  rep.axis = "weights";
  rep.settings.resize(static_cast<std::size_t>(opts.R));
  parallel_for(rep.settings.size(), opts.threads, [&](std::size_t r) {
    std::vector<Eigen::Index> idx;
    if (opts.identity_resample) {
      idx = identity_rows(ctx.data.rows());
    } else {
      std::mt19937_64 rng(derive_seed(opts.seed, {r}));
      std::discrete_distribution<Eigen::Index> pick(row_weights.begin(), row_weights.end());
      idx.resize(static_cast<std::size_t>(ctx.data.rows()));
      for (auto& i : idx) i = pick(rng);
    }
    const auto sample = ctx.data.select_rows(idx);
    auto s = compare_to_reference(ctx, ctx.data, run_pipeline(sample, ctx.plan, ctx.config));
    s.label = "replicate=" + std::to_string(r);
    s.value = static_cast<double>(r);
    s.replicate = static_cast<int>(r);
    rep.settings[r] = std::move(s);
  });
  return rep;
}

}  // namespace ordmix
