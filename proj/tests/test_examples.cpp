#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "ordmix/benchmark.hpp"
#include "ordmix/embedding.hpp"
#include "ordmix/metrics.hpp"
#include "ordmix/mixture.hpp"
#include "ordmix/runner.hpp"
#include "ordmix/selection.hpp"
#include "ordmix/stability.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace ordmix;

namespace {

OrdinalDataset codes(const std::vector<std::vector<int>>& rows, const std::vector<int>& cats) {
  OrdinalDataset d;
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cats.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cats.size(); ++j) d.values(i, j) = rows[i][j];
  for (std::size_t j = 0; j < cats.size(); ++j) d.item_names.push_back("q" + std::to_string(j + 1));
  d.category_counts = cats;
  return d;
}

Matrix iid_normal(int n, int J, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix X(n, J);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < J; ++j) X(i, j) = z(rng);
  return X;
}

Matrix hard_r(const std::vector<int>& counts) {
  int n = 0;
  for (int c : counts) n += c;
  Matrix r = Matrix::Zero(n, static_cast<Eigen::Index>(counts.size()));
  int row = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    for (int c = 0; c < counts[k]; ++c) r(row++, static_cast<Eigen::Index>(k)) = 1.0;
  return r;
}

}  // namespace

TEST_CASE("small embedding cases") {
  const double q75 = oracle::quantile_bisect(0.75);

  const auto bin = codes({{1}, {2}}, {2});
  const auto emb = fit_embedding(bin);
  const auto X = transform(bin, emb).X;
  CHECK(X(0, 0) == doctest::Approx(-q75).epsilon(1e-12));
  CHECK(X(1, 0) == doctest::Approx(q75).epsilon(1e-12));
  CHECK(q75 == doctest::Approx(0.67449).epsilon(1e-5));

  const auto thirds = fit_embedding(codes({{1}, {2}, {3}}, {3}));
  CHECK(thirds.midpoints[0][1] == 0.5);
  CHECK(thirds.scores[0][1] == 0.0);

  // One row scored with an embedding fit elsewhere.
  const auto wide = codes({{1, 2}, {2, 1}, {2, 3}, {1, 3}}, {2, 3});
  const auto e2 = fit_embedding(wide);
  const auto one = transform(codes({{1, 1}}, {2, 3}), e2).X;
  REQUIRE(one.rows() == 1);
  CHECK(one(0, 0) == e2.scores[0][0]);
  CHECK(one(0, 1) == e2.scores[1][0]);
}

TEST_CASE("node fit and node BIC by hand") {
  Matrix X(3, 2);
  X << 0, 1, 1, 2, 2, 3;
  const std::vector<double> ones(3, 1.0);
  const auto f0 = weighted_node_fit(X, 1, {}, ones);
  CHECK(f0.coefficients[0] == doctest::Approx(2.0));
  CHECK(f0.rss == doctest::Approx(2.0));
  CHECK(f0.d == 1);

  Matrix Y(4, 2);
  Y << 1, 2, 2, 4, -1, -2, 3, 6;
  const std::vector<int> p0{0};
  const auto f1 = weighted_node_fit(Y, 1, p0, std::vector<double>(4, 1.0));
  CHECK(f1.coefficients[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f1.rss == doctest::Approx(0.0).epsilon(1e-9));

  Matrix W(3, 2);
  W << 0, 0, 1, 1, 2, 3;
  const std::vector<double> w{1, 1, 2};
  const auto fw = weighted_node_fit(W, 1, p0, w);
  const auto o = oracle::ols(W, 1, p0, {1, 1, 2});
  CHECK(fw.coefficients[0] == doctest::Approx(o.coef[0]).epsilon(1e-7));
  CHECK(fw.coefficients[1] == doctest::Approx(o.coef[1]).epsilon(1e-7));
  CHECK(fw.rss == doctest::Approx(o.rss).epsilon(1e-7));

  NodeFit a;
  a.n_eff = 10;
  a.rss = 10;
  a.d = 1;
  CHECK(node_bic(a) == doctest::Approx(std::log(10.0)).epsilon(1e-14));
  NodeFit b;
  b.n_eff = std::exp(1.0);
  b.rss = std::exp(1.0);
  b.d = 0;
  CHECK(node_bic(b) == doctest::Approx(0.0));
  NodeFit c;
  c.n_eff = 10;
  c.rss = 0;
  c.d = 1;
  CHECK(std::isfinite(node_bic(c)));
  CHECK(node_bic(c) < -200.0);
}

TEST_CASE("graph BIC decomposes and checks its weights") {
  const Matrix X = iid_normal(50, 2, 5);
  std::vector<double> ones(50, 1.0);
  const double sum = node_bic(weighted_node_fit(X, 0, {}, ones)) + node_bic(weighted_node_fit(X, 1, {}, ones));
  CHECK(graph_bic(X, DagStructure(2), ones) == doctest::Approx(sum).epsilon(1e-12));

  std::vector<double> zeros(50, 0.0);
  CHECK_THROWS_AS(graph_bic(X, DagStructure(2), zeros), Error);
  zeros[7] = 1.0;
  CHECK(std::isfinite(graph_bic(X, DagStructure(2), zeros)));
}

TEST_CASE("search on simple generated data") {
  DagOptions opts;
  const std::vector<double> ones(2000, 1.0);

  const Matrix E = iid_normal(2000, 3, 11);
  const auto empty = greedy_search(E, ones, opts);
  CHECK(empty.dag.structure.edge_count() <= 1);
  double best = 1e300;
  for (const auto& g : oracle::all_dags(3)) best = std::min(best, oracle::ols_graph_bic(E, g));
  CHECK(empty.trace.final_bic == doctest::Approx(best).epsilon(1e-9));

  Matrix C = iid_normal(2000, 3, 12);
  C.col(1) = 0.9 * C.col(0) + C.col(1);
  const auto chain = greedy_search(C, ones, opts);
  const auto edges = chain.dag.structure.edges();
  REQUIRE(edges.size() == 1);
  CHECK(std::min(edges[0].first, edges[0].second) == 0);
  CHECK(std::max(edges[0].first, edges[0].second) == 1);

  opts.restarts = 0;
  const auto again = greedy_search(C, ones, opts, &chain.dag.structure);
  CHECK(again.trace.steps.empty());
  CHECK(again.dag.structure == chain.dag.structure);
}

TEST_CASE("row densities of unit normals") {
  const auto dag = ArchetypeDag::empty(2);
  const std::vector<double> zero{0, 0}, unit{1, 0};
  CHECK(log_density_row(zero, dag) == doctest::Approx(-1.837877).epsilon(1e-6));
  CHECK(log_density_row(unit, dag) == doctest::Approx(-2.337877).epsilon(1e-6));
}

TEST_CASE("stick breaking edge cases") {
  const std::vector<double> half{0.5, 0.5};
  const auto w = stick_breaking_weights(half, 3);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.25);
  CHECK(w[2] == 0.25);
  const std::vector<double> near_one{1.0 - 1e-12, 0.5};
  CHECK(stick_breaking_weights(near_one, 3)[0] > 1.0 - 1e-11);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto d = draw_stick_breaking(1.0, 10, s);
    double t = 0;
    for (double x : d) t += x;
    CHECK(t == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("responsibility edge cases") {
  const Matrix X = iid_normal(20, 2, 3);
  const std::vector<ArchetypeDag> one{ArchetypeDag::empty(2)};
  const Matrix r1 = e_step(X, one, Vector::Ones(1));
  CHECK((r1.array() == 1.0).all());

  const std::vector<ArchetypeDag> twins{ArchetypeDag::empty(2), ArchetypeDag::empty(2)};
  const Matrix r2 = e_step(X, twins, Vector::Constant(2, 0.5));
  CHECK((r2.array() == 0.5).all());

  auto plus = ArchetypeDag::empty(2), minus = ArchetypeDag::empty(2);
  plus.intercepts.setConstant(10.0);
  minus.intercepts.setConstant(-10.0);
  const std::vector<ArchetypeDag> far{plus, minus};
  Matrix x(1, 2);
  x << 9.7, 10.4;
  CHECK(e_step(x, far, Vector::Constant(2, 0.5))(0, 0) > 1.0 - 1e-6);
}

TEST_CASE("smoothed weights edge cases") {
  const Vector none = smooth_weights(Matrix(0, 4), 1.0);
  for (int k = 0; k < 4; ++k) CHECK(none[k] == doctest::Approx(0.25));

  const Vector w = smooth_weights(hard_r({100, 0}), 1.0);
  CHECK(w[0] == doctest::Approx(100.5 / 101.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.5 / 101.0).epsilon(1e-14));

  const Vector tiny = smooth_weights(hard_r({30, 70}), 1e-9);
  CHECK(tiny[0] == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("effective K counts") {
  CHECK(effective_k(hard_r({50})) == 1);
  CHECK(effective_k(hard_r({96, 4})) == 1);
  CHECK(effective_k(hard_r({40, 30, 20, 6, 4})) == 4);
}

TEST_CASE("M step reductions") {
  Matrix X = iid_normal(400, 3, 21);
  X.col(2) = 0.8 * X.col(0) + X.col(2);
  MixtureConfig cfg;
  cfg.dag.restarts = 0;
  const Matrix r = hard_r({400, 0});
  std::vector<char> active{1, 1};
  const std::vector<ArchetypeDag> warm{ArchetypeDag::empty(3), ArchetypeDag::empty(3)};
  const auto dags = m_step(X, r, cfg, warm, active);
  CHECK(active[1] == 0);
  const auto solo = greedy_search(X, std::vector<double>(400, 1.0), cfg.dag);
  CHECK(dags[0].structure == solo.dag.structure);

  const auto again = m_step(X, r, cfg, dags, active);
  CHECK(again[0].structure == dags[0].structure);
  CHECK(again[0].intercepts.isApprox(dags[0].intercepts));
}

TEST_CASE("one-cluster mixture is the single graph") {
  Matrix X = iid_normal(600, 4, 31);
  X.col(1) += 0.7 * X.col(0);
  X.col(3) -= 0.6 * X.col(1);
  MixtureConfig cfg;
  cfg.fixed_k = 1;
  cfg.seed = 3;
  const auto m = fit(X, cfg);
  const auto s = fit_single_graph(X, cfg);
  CHECK(m.dags[0].structure == s.dag.structure);
  CHECK(graph_bic(X, m.dags[0].structure, std::vector<double>(600, 1.0)) ==
        doctest::Approx(s.search.final_bic).epsilon(1e-12));

  const Matrix P = predict_scores(m, X);
  for (int j = 0; j < 4; ++j) {
    const auto& pa = m.dags[0].structure.parents(j);
    const auto o = oracle::ols(X, j, pa);
    for (Eigen::Index i = 0; i < 600; i += 37) {
      double v = o.coef[0];
      for (std::size_t q = 0; q < pa.size(); ++q) v += o.coef[q + 1] * X(i, pa[q]);
      CHECK(P(i, j) == doctest::Approx(v).epsilon(1e-6));
    }
  }
}

TEST_CASE("hard mixture predictions use the assigned cluster") {
  MixtureModel m;
  auto a = ArchetypeDag::empty(2), b = ArchetypeDag::empty(2);
  a.structure.add_edge(0, 1);
  a.coefficients[1] = {2.0};
  a.intercepts << 50.0, 1.0;
  b.structure.add_edge(1, 0);
  b.coefficients[0] = {-1.0};
  b.intercepts << -50.0, -50.0;
  m.dags = {a, b};
  m.weights = Vector::Constant(2, 0.5);
  m.active = {1, 1};
  m.config.fixed_k = 2;
  Matrix X(2, 2);
  X << 50.3, 101.2, 0.2, -50.1;
  const Matrix P = predict_scores(m, X);
  CHECK(P(0, 0) == doctest::Approx(50.0));
  CHECK(P(0, 1) == doctest::Approx(1.0 + 2.0 * 50.3));
  CHECK(P(1, 0) == doctest::Approx(-50.0 + 50.1));
  CHECK(P(1, 1) == doctest::Approx(-50.0));
}

TEST_CASE("mixture-only baseline") {
  Matrix X = iid_normal(300, 3, 41);
  MixtureConfig cfg;
  const auto one = fit_mixture_only(X, 1, cfg);
  const Vector mu = X.colwise().mean();
  CHECK(one.means.row(0).transpose().isApprox(mu, 1e-12));
  const Matrix P = predict_scores(one, X);
  for (int j = 0; j < 3; ++j) CHECK((P.col(j).array() - mu[j]).abs().maxCoeff() < 1e-12);

  std::vector<int> truth(300);
  for (int i = 0; i < 300; ++i) {
    truth[i] = i % 2;
    X.row(i).array() += truth[i] ? 8.0 : -8.0;
  }
  cfg.seed = 2;
  const auto two = fit_mixture_only(X, 2, cfg);
  CHECK(ari(two.assignments, truth) == 1.0);
  for (std::size_t t = 1; t < two.trace.size(); ++t)
    CHECK(two.trace[t].loglik >= two.trace[t - 1].loglik - 1e-9 * std::abs(two.trace[t - 1].loglik));
}

TEST_CASE("holdout MSE identities") {
  Matrix X(2, 2), H(2, 2);
  X << 0, 0, 2, 2;
  H << 1, 1, 1, 1;
  CHECK(holdout_mse(X, H) == 1.0);
  CHECK(holdout_mse(X, X) == 0.0);

  std::mt19937_64 rng(8);
  const auto data = testing::random_dataset(500, 4, rng, 3, 5);
  const Matrix S = transform(data, fit_embedding(data)).X;
  BaselineModel b;
  b.variant = BaselineVariant::SingleGraph;
  b.dag = fit_structure(WeightedMoments(S, std::vector<double>(500, 1.0)), DagStructure(4), DagOptions{});
  const Matrix P = predict_scores(b, S);
  double var = 0;
  for (int j = 0; j < 4; ++j) {
    CHECK((P.col(j).array() - S.col(j).mean()).abs().maxCoeff() < 1e-12);
    var += (S.col(j).array() - S.col(j).mean()).square().mean();
  }
  CHECK(holdout_mse(b, S) == doctest::Approx(var / 4).epsilon(1e-12));
  CHECK(var / 4 > 0.5);
  CHECK(var / 4 < 1.0);
}

TEST_CASE("singleton grid") {
  const Matrix X = iid_normal(300, 3, 51);
  SelectionPlan plan;
  plan.k_grid = {1};
  plan.inner_folds = 3;
  MixtureConfig cfg;
  cfg.dag.restarts = 1;
  const auto c = select_k(X, plan, cfg);
  CHECK(c.k_star == 1);
  REQUIRE(c.mse.size() == 1);
  CHECK(std::isfinite(c.mse[0]));
}

TEST_CASE("metric examples") {
  const std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  CHECK(ari(a, b) == doctest::Approx(oracle::ari_pairs(a, b)).epsilon(1e-14));
  CHECK(ari(a, b) == doctest::Approx(-0.5));

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> u(0, 2);
  std::vector<int> x(20000), y(20000);
  for (auto& v : x) v = u(rng);
  for (auto& v : y) v = u(rng);
  CHECK(nmi(x, y) < 1e-3);
  CHECK(nmi(x, y) == doctest::Approx(oracle::nmi_counts(x, y)).epsilon(1e-12));

  DagStructure g1(3), g2(3), g3(3);
  g1.add_edge(0, 1);
  g1.add_edge(1, 2);
  g2.add_edge(0, 1);
  g2.add_edge(2, 1);
  g3.add_edge(2, 0);
  CHECK(edge_jaccard(g1, g2) == doctest::Approx(1.0 / 3.0));
  CHECK(edge_jaccard(g1, g3) == 0.0);
  CHECK(edge_jaccard(g1, g1) == 1.0);

  const std::vector<int> ref{0, 0, 0, 0, 1, 1, 1, 1}, flip{0, 0, 1, 1, 1, 1, 0, 0};
  CHECK(assignment_agreement(flip, ref) == 0.5);

  const std::vector<int> same{0, 1};
  const auto al = align_clusters(same, same);
  Matrix m1(2, 3);
  m1 << 0.1, 0.2, 0.3, -1, 0, 1;
  const Matrix m2 = m1.array() + 0.25;
  CHECK(profile_rmse(m1, m2, al) == doctest::Approx(0.25));
}

TEST_CASE("stress tier carries no cluster signal") {
  auto spec = default_tiers(42)[3];
  spec.separation = 0.0;
  REQUIRE(spec.edge_differences == 0);
  const auto inst = generate(spec, 0);
  for (Eigen::Index k = 1; k < inst.cluster_means.rows(); ++k) {
    CHECK(inst.cluster_means.row(k) == inst.cluster_means.row(0));
    CHECK(inst.dags[k].structure == inst.dags[0].structure);
    CHECK(inst.dags[k].coefficients == inst.dags[0].coefficients);
    CHECK(inst.dags[k].intercepts == inst.dags[0].intercepts);
  }
}

TEST_CASE("sweep defaults and trivial settings") {
  CHECK(RunConfig{}.alphas == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(RunConfig{}.n_mins == std::vector<double>{120, 400, 500, 700});
  CHECK(RunConfig{}.weight_replicates == 4);
  CHECK(WeightResampleOptions{}.R == 4);

  std::mt19937_64 rng(10);
  const auto data = testing::random_dataset(400, 4, rng, 3, 4);
  SelectionPlan plan;
  plan.k_grid = {1, 2};
  plan.inner_folds = 2;
  MixtureConfig cfg;
  cfg.seed = 5;
  cfg.dag.restarts = 1;
  const auto ctx = make_reference(data, plan, cfg);
  const auto self = compare_to_reference(ctx, ctx.data, ctx.reference);
  CHECK(self.mean_shd == 0.0);
  CHECK(self.mean_jaccard == 1.0);
  CHECK(self.agreement == 1.0);

  const auto noop = item_set_sweep(ctx, {ItemVariant{"none", {}, {}}});
  REQUIRE(noop.settings.size() == 1);
  CHECK(noop.settings[0].agreement == 1.0);
  CHECK(noop.settings[0].mean_shd == 0.0);
  CHECK(noop.settings[0].mse == ctx.reference.holdout.back().mse);
}

TEST_CASE("cluster-size floor limits") {
  Matrix X = iid_normal(500, 3, 61);
  for (int i = 0; i < 500; i += 2) X.row(i).array() += 4.0;
  MixtureConfig cfg;
  cfg.seed = 4;
  cfg.dag.restarts = 1;

  cfg.n_min = 0;
  const auto open = fit(X, cfg);
  for (const auto& it : open.trace) CHECK_FALSE(it.pruned);

  cfg.n_min = 501;
  const auto closed = fit(X, cfg);
  CHECK(closed.active_count() == 1);
  const auto single = fit_single_graph(X, cfg);
  CHECK(holdout_mse(closed, X) == doctest::Approx(holdout_mse(single, X)).epsilon(0.01));
}

TEST_CASE("generate writes every default instance") {
  const auto dir = testing::scratch_dir("generate_default");
  RunConfig c;
  c.command = "generate";
  c.output_dir = dir.string();
  c.seed = 1;
  const auto out = run(c);
  REQUIRE(out.exit_code == 0);
  int csv = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) csv += e.path().extension() == ".csv";
  CHECK(csv == 12);
  CHECK(out.result["summary"]["instances"] == 12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("equivalence oracle") {
  DagStructure fwd(3), back(3), vee(3);
  fwd.add_edge(0, 1);
  fwd.add_edge(1, 2);
  back.add_edge(2, 1);
  back.add_edge(1, 0);
  vee.add_edge(0, 1);
  vee.add_edge(2, 1);
  CHECK(oracle::markov_equivalent(fwd, back));
  CHECK_FALSE(oracle::markov_equivalent(fwd, vee));
  CHECK(shd(fwd, back) == 2);
}
