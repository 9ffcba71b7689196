#include "ordmix/serialize.hpp"
#include "ordmix/io.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace ordmix {

namespace {

Json vec(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

Json trace_json(const std::vector<IterationRecord>& trace) {
  Json a = Json::array();
  for (const auto& t : trace)
    a.push_back({{"iteration", t.iteration},
                 {"loglik", t.loglik},
                 {"penalized_objective", t.penalized_objective},
                 {"assignment_change", t.assignment_change},
                 {"effective_k", t.effective_k},
                 {"active_clusters", t.active_clusters},
                 {"pruned", t.pruned}});
  return a;
}

using Setter = std::function<void(const Json&)>;

void apply_keys(const Json& j, const std::string& what, const std::map<std::string, Setter>& setters) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, what + " settings must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown " + what + " setting '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::InvalidConfig, what + " setting '" + key + "' has the wrong type");
    }
  }
}

template <class T>
Setter set(T& field) {
  return [&field](const Json& v) { field = v.get<T>(); };
}

}  // namespace

Json to_json(const DagStructure& g) {
  Json edges = Json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  return {{"nodes", g.nodes()}, {"edges", edges}};
}

Json to_json(const ArchetypeDag& d) {
  Json nodes = Json::array();
  for (int j = 0; j < d.nodes(); ++j)
    nodes.push_back({{"parents", d.structure.parents(j)},
                     {"coefficients", d.coefficients[j]},
                     {"intercept", d.intercepts[j]},
                     {"residual_var", d.residual_vars[j]}});
  Json out = to_json(d.structure);
  out["node_params"] = nodes;
  return out;
}

Json to_json(const ScoreEmbedding& e) {
  Json items = Json::array();
  for (std::size_t j = 0; j < e.item_names.size(); ++j) {
    Json scores = Json::array();
    for (double s : e.scores[j]) scores.push_back(std::isfinite(s) ? Json(s) : Json(nullptr));
    items.push_back({{"name", e.item_names[j]},
                     {"categories", e.category_counts[j]},
                     {"masses", e.masses[j]},
                     {"midpoints", e.midpoints[j]},
                     {"scores", scores}});
  }
  return {{"items", items}};
}

Json to_json(const MixtureConfig& c) {
  return {{"k", c.fixed_k ? Json(*c.fixed_k) : Json(nullptr)},
          {"k_max", c.k_max},
          {"alpha", c.alpha},
          {"max_iters", c.max_iters},
          {"eps_loglik", c.eps_loglik},
          {"eps_assign", c.eps_assign},
          {"n_min", c.n_min},
          {"effective_k_threshold", c.effective_k_threshold},
          {"kmeans_iters", c.kmeans_iters},
          {"max_parents", c.dag.max_parents},
          {"penalty", c.dag.penalty},
          {"variance_floor", c.dag.variance_floor},
          {"restarts", c.dag.restarts},
          {"perturb", c.dag.perturb},
          {"seed", c.seed}};
}

void update_from_json(const Json& j, MixtureConfig& c) {
  apply_keys(j, "mixture",
             {{"k",
               [&](const Json& v) {
                 if (v.is_null()) c.fixed_k.reset();
                 else c.fixed_k = v.get<int>();
               }},
              {"k_max", set(c.k_max)},
              {"alpha", set(c.alpha)},
              {"max_iters", set(c.max_iters)},
              {"eps_loglik", set(c.eps_loglik)},
              {"eps_assign", set(c.eps_assign)},
              {"n_min", set(c.n_min)},
              {"effective_k_threshold", set(c.effective_k_threshold)},
              {"kmeans_iters", set(c.kmeans_iters)},
              {"max_parents", set(c.dag.max_parents)},
              {"penalty", set(c.dag.penalty)},
              {"variance_floor", set(c.dag.variance_floor)},
              {"restarts", set(c.dag.restarts)},
              {"perturb", set(c.dag.perturb)}});
}

Json to_json(const SelectionPlan& p) {
  return {{"k_grid", p.k_grid},
          {"test_fraction", p.outer_test_fraction},
          {"folds", p.inner_folds},
          {"seed_from_discovery", p.seed_from_discovery},
          {"seed", p.seed}};
}

void update_from_json(const Json& j, SelectionPlan& p) {
  apply_keys(j, "selection",
             {{"k_grid", set(p.k_grid)},
              {"test_fraction", set(p.outer_test_fraction)},
              {"folds", set(p.inner_folds)},
              {"seed_from_discovery", set(p.seed_from_discovery)}});
}

Json to_json(const MixtureModel& m) {
  Json dags = Json::array();
  for (const auto& d : m.dags) dags.push_back(to_json(d));
  Json active = Json::array();
  for (char a : m.active) active.push_back(a != 0);
  return {{"kind", m.discovery ? "bnp_discovery" : "fixed_k_dag"},
          {"status", fit_status_name(m.status)},
          {"components", m.components()},
          {"active_clusters", m.active_count()},
          {"effective_k", effective_k(m, m.config.effective_k_threshold)},
          {"config", to_json(m.config)},
          {"weights", vec(m.weights)},
          {"active", active},
          {"cluster_mass", vec(m.cluster_mass())},
          {"dags", dags},
          {"trace", trace_json(m.trace)},
          {"assignments", m.assignments}};
}

Json to_json(const BaselineModel& m) {
  Json out = {{"kind", baseline_name(m.variant)}, {"status", fit_status_name(m.status)}};
  if (m.variant == BaselineVariant::SingleGraph) {
    out["dag"] = to_json(m.dag);
    out["search"] = {{"initial_bic", m.search.initial_bic},
                     {"final_bic", m.search.final_bic},
                     {"steps", m.search.steps.size()}};
  } else {
    out["weights"] = vec(m.weights);
    out["means"] = mat(m.means);
    out["variances"] = mat(m.variances);
    out["trace"] = trace_json(m.trace);
  }
  return out;
}

Json to_json(const KCurve& c) {
  return {{"k_grid", c.k_grid}, {"mse", c.mse}, {"fold_mse", c.fold_mse}, {"k_star", c.k_star}};
}

Json to_json(const SelectionReport& r) {
  Json holdout = Json::array();
  for (const auto& s : r.holdout)
    holdout.push_back({{"model", s.model}, {"mse", s.mse}, {"delta_vs_baseline", s.delta_vs_baseline}});
  return {{"items", r.item_names},
          {"n_train", r.split.train.size()},
          {"n_test", r.split.test.size()},
          {"k_bnp", r.k_bnp},
          {"k_star", r.curve.k_star},
          {"k_curve", to_json(r.curve)},
          {"holdout", holdout},
          {"embedding", to_json(r.embedding)},
          {"models",
           {{"single_graph", to_json(r.single_graph)},
            {"bnp_discovery", to_json(r.discovery)},
            {"mixture_only", to_json(r.mixture_only)},
            {"fixed_k_dag", to_json(r.fixed_k)},
            {"confirmatory", to_json(r.confirmatory)}}}};
}

Json to_json(const TierSpec& t) {
  Json marg = Json::array();
  for (const auto& m : t.marginals) marg.push_back({{"name", m.name}, {"frequencies", m.frequencies}});
  return {{"name", t.name},
          {"k_true", t.k_true},
          {"weights", t.weights},
          {"separation", t.separation},
          {"base_edges", t.base_edges},
          {"edge_differences", t.edge_differences},
          {"weight_min", t.weight_min},
          {"weight_max", t.weight_max},
          {"noise_sd", t.noise_sd},
          {"max_parents", t.max_parents},
          {"n", t.n},
          {"marginals", marg},
          {"thresholds", t.thresholds},
          {"replications", t.replications},
          {"seed", t.seed}};
}

void update_from_json(const Json& j, TierSpec& t) {
  apply_keys(j, "tier",
             {{"name", set(t.name)},
              {"k_true", set(t.k_true)},
              {"weights", set(t.weights)},
              {"separation", set(t.separation)},
              {"base_edges", set(t.base_edges)},
              {"edge_differences", set(t.edge_differences)},
              {"weight_min", set(t.weight_min)},
              {"weight_max", set(t.weight_max)},
              {"noise_sd", set(t.noise_sd)},
              {"max_parents", set(t.max_parents)},
              {"n", set(t.n)},
              {"marginals",
               [&](const Json& v) {
                 t.marginals.clear();
                 for (const auto& m : v)
                   t.marginals.push_back({m.at("name").get<std::string>(), m.at("frequencies").get<std::vector<double>>()});
               }},
              {"thresholds", set(t.thresholds)},
              {"replications", set(t.replications)},
              {"seed", set(t.seed)}});
}

Json to_json(const BenchmarkInstance& inst) {
  Json items = Json::object();
  for (std::size_t j = 0; j < inst.data.item_names.size(); ++j)
    items[inst.data.item_names[j]] = inst.data.category_counts[j];
  Json dags = Json::array();
  for (const auto& d : inst.dags) dags.push_back(to_json(d));
  return {{"items", items},
          {"tier", to_json(inst.spec)},
          {"replicate", inst.replicate},
          {"labels", inst.labels},
          {"dags", dags},
          {"cluster_means", mat(inst.cluster_means)},
          {"thresholds", inst.thresholds}};
}

Json to_json(const BenchmarkReport& r) {
  Json rows = Json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"tier", x.tier},
                    {"replicate", x.replicate},
                    {"model", x.model},
                    {"mse", x.mse},
                    {"ari", x.ari},
                    {"nmi", x.nmi},
                    {"shd", std::isfinite(x.shd) ? Json(x.shd) : Json(nullptr)},
                    {"effective_k", x.clusters}});
  Json summary = Json::array();
  for (const auto& s : r.summary)
    summary.push_back({{"tier", s.tier}, {"model", s.model}, {"metric", s.metric}, {"mean", s.mean}, {"sd", s.sd}, {"count", s.count}});
  Json curves = Json::array();
  for (const auto& tier : r.curves) {
    Json t = Json::array();
    for (const auto& c : tier) t.push_back(to_json(c));
    curves.push_back(t);
  }
  return {{"rows", rows}, {"summary", summary}, {"k_star", r.k_star}, {"k_curves", curves}};
}

Json to_json(const BootstrapReport& r) {
  Json reps = Json::array();
  for (const auto& x : r.replicates)
    reps.push_back({{"replicate", x.index},
                    {"agreement", x.agreement},
                    {"effective_k", x.effective_k},
                    {"k_confirm", x.k_confirm},
                    {"mean_max_responsibility", x.mean_max_responsibility},
                    {"embedding_fallback", x.embedding_fallback}});
  return {{"B", r.B},
          {"replicates", reps},
          {"agreement",
           {{"mean", r.agreement.mean}, {"sd", r.agreement.sd}, {"min", r.agreement.min}, {"max", r.agreement.max}}},
          {"mean_effective_k", r.mean_effective_k},
          {"mean_max_responsibility", r.mean_max_responsibility}};
}

Json to_json(const SensitivityReport& r) {
  Json settings = Json::array();
  for (const auto& s : r.settings)
    settings.push_back({{"label", s.label},
                        {"value", s.value},
                        {"replicate", s.replicate},
                        {"mse", s.mse},
                        {"k_star", s.k_star},
                        {"k_bnp", s.k_bnp},
                        {"effective_k", s.effective_k},
                        {"min_cluster", s.min_cluster},
                        {"mean_shd", s.mean_shd},
                        {"mean_jaccard", s.mean_jaccard},
                        {"profile_rmse", s.profile_rmse},
                        {"agreement", s.agreement}});
  return {{"axis", r.axis}, {"settings", settings}};
}

std::string model_comparison_csv(const SelectionReport& r) {
  std::ostringstream os;
  os << "model,mse,delta_vs_baseline\n";
  for (const auto& s : r.holdout)
    os << s.model << ',' << format_number(s.mse) << ',' << format_number(s.delta_vs_baseline) << '\n';
  return os.str();
}

std::string k_curve_csv(const KCurve& c) {
  std::ostringstream os;
  os << "k,mse,mse_sd,selected\n";
  for (std::size_t g = 0; g < c.k_grid.size(); ++g) {
    std::vector<double> folds = c.fold_mse[g];
    os << c.k_grid[g] << ',' << format_number(c.mse[g]) << ',' << format_number(summarize(folds).sd) << ','
       << (c.k_grid[g] == c.k_star ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string benchmark_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "tier,replicate,model,metric,value\n";
  for (const auto& x : r.rows) {
    const std::pair<const char*, double> metrics[] = {
        {"mse", x.mse}, {"ari", x.ari}, {"nmi", x.nmi}, {"shd", x.shd}, {"effective_k", double(x.clusters)}};
    for (const auto& [name, v] : metrics)
      os << x.tier << ',' << x.replicate << ',' << x.model << ',' << name << ',' << format_number(v) << '\n';
  }
  return os.str();
}

std::string benchmark_summary_csv(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "tier,model,metric,mean,sd,count\n";
  for (const auto& s : r.summary)
    os << s.tier << ',' << s.model << ',' << s.metric << ',' << format_number(s.mean) << ',' << format_number(s.sd)
       << ',' << s.count << '\n';
  return os.str();
}

std::string bootstrap_csv(const BootstrapReport& r) {
  std::ostringstream os;
  os << "replicate,agreement,effective_k,k_confirm,mean_max_responsibility,embedding_fallback\n";
  for (const auto& x : r.replicates)
    os << x.index << ',' << format_number(x.agreement) << ',' << x.effective_k << ',' << x.k_confirm << ','
       << format_number(x.mean_max_responsibility) << ',' << (x.embedding_fallback ? 1 : 0) << '\n';
  return os.str();
}

std::string sensitivity_csv(const std::vector<SensitivityReport>& reports, double reference_mse) {
  std::ostringstream os;
  os << "axis,setting,value,replicate,mse,delta_mse,effective_k,k_star,k_bnp,min_cluster,mean_shd,mean_jaccard,"
        "profile_rmse,agreement\n";
  for (const auto& r : reports)
    for (const auto& s : r.settings)
      os << r.axis << ',' << s.label << ',' << format_number(s.value) << ',' << s.replicate << ','
         << format_number(s.mse) << ',' << format_number(s.mse - reference_mse) << ',' << s.effective_k << ','
         << s.k_star << ',' << s.k_bnp << ',' << s.min_cluster << ',' << format_number(s.mean_shd) << ','
         << format_number(s.mean_jaccard) << ',' << format_number(s.profile_rmse) << ','
         << format_number(s.agreement) << '\n';
  return os.str();
}

std::string assignments_csv(const Matrix& responsibilities, std::span<const int> labels) {
  std::ostringstream os;
  os << "row,cluster,max_responsibility\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    os << i + 1 << ',' << labels[i] << ',' << format_number(responsibilities.row(static_cast<Eigen::Index>(i)).maxCoeff())
       << '\n';
  return os.str();
}

}  // namespace ordmix
