#include "doctest.h"
#include "oracles.hpp"

#include "ordmix/benchmark.hpp"
#include "ordmix/metrics.hpp"

#include <cmath>

using namespace ordmix;

TEST_CASE("default tiers") {
  const auto tiers = default_tiers(42);
  REQUIRE(tiers.size() == 4);
  const std::vector<std::string> names{"easy", "moderate", "hard", "stress"};
  for (int t = 0; t < 4; ++t) {
    CHECK(tiers[t].name == names[t]);
    CHECK_NOTHROW(tiers[t].validate());
    CHECK(tiers[t].items() == 8);
  }
  CHECK(tiers[0].separation > tiers[1].separation);
  CHECK(tiers[3].edge_differences == 0);
  CHECK(tiers[0].seed != tiers[1].seed);
  CHECK(default_tiers(42)[2].seed == tiers[2].seed);
  CHECK(bundled_marginals().size() == 8);
}

TEST_CASE("tier validation") {
  auto spec = default_tiers(1)[0];
  auto rejects = [](const TierSpec& s) {
    try {
      s.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidSpec;
    }
    return false;
  };
  auto s = spec;
  s.weights = {0.5, 0.5};
  CHECK(rejects(s));
  s = spec;
  s.weights = {0.5, 0.4, 0.2};
  CHECK(rejects(s));
  s = spec;
  s.noise_sd = 0;
  CHECK(rejects(s));
  s = spec;
  s.k_true = 1;
  s.weights = {1.0};
  CHECK(rejects(s));
  s = spec;
  s.weight_min = 1.0;
  s.weight_max = 0.5;
  CHECK(rejects(s));
}

TEST_CASE("generated instance structure") {
  auto spec = default_tiers(42)[0];
  spec.n = 2000;
  const auto inst = generate(spec, 1);
  CHECK(inst.data.rows() == 2000);
  CHECK(inst.data.items() == 8);
  CHECK_NOTHROW(inst.data.validate());
  CHECK(inst.latent.rows() == 2000);
  REQUIRE(inst.dags.size() == 3);
  for (const auto& d : inst.dags) {
    CHECK(is_acyclic(d.structure));
    CHECK(d.structure.edge_count() == static_cast<std::size_t>(spec.base_edges));
    for (int j = 0; j < 8; ++j) CHECK(d.structure.parents(j).size() <= 2);
    for (auto [s, t] : d.structure.edges()) {
      const double w = std::abs(d.edge_weight(s, t));
      CHECK(w >= spec.weight_min);
      CHECK(w <= spec.weight_max);
    }
  }
  CHECK(shd(inst.dags[0].structure, inst.dags[1].structure) > 0);
  for (int l : inst.labels) CHECK((l >= 0 && l < 3));

  const auto same = generate(spec, 1);
  CHECK(same.data.values == inst.data.values);
  CHECK(same.labels == inst.labels);
  CHECK(generate(spec, 2).data.values != inst.data.values);

  auto stress = default_tiers(42)[3];
  stress.n = 500;
  const auto st = generate(stress, 0);
  CHECK(st.dags[0].structure == st.dags[1].structure);
  CHECK(st.dags[1].structure == st.dags[2].structure);
}

TEST_CASE("thresholds reproduce the target marginals") {
  auto spec = default_tiers(42)[1];
  const auto inst = generate(spec, 0);
  const double n = static_cast<double>(inst.data.rows());
  for (int j = 0; j < spec.items(); ++j) {
    const auto& f = spec.marginals[j].frequencies;
    double cum = 0;
    for (std::size_t c = 0; c + 1 < f.size(); ++c) {
      cum += f[c];
      CHECK(mixture_marginal_cdf(inst, j, inst.thresholds[j][c]) == doctest::Approx(cum).epsilon(1e-8));
    }
    for (std::size_t c = 0; c < f.size(); ++c) {
      double count = 0;
      for (Eigen::Index i = 0; i < inst.data.rows(); ++i) count += inst.data.values(i, j) == static_cast<int>(c) + 1;
      const double se = std::sqrt(f[c] * (1 - f[c]) / n);
      CHECK(std::abs(count / n - f[c]) < 4.5 * se + 1e-12);
    }
  }
}

TEST_CASE("SEM moments against the reduced form and the sample") {
  auto spec = default_tiers(42)[0];
  spec.n = 30000;
  const auto inst = generate(spec, 0);
  for (int k = 0; k < 3; ++k) {
    const auto& d = inst.dags[k];
    const int J = d.nodes();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(J, J);
    for (auto [s, t] : d.structure.edges()) B(t, s) = d.edge_weight(s, t);
    const Eigen::MatrixXd A = (Eigen::MatrixXd::Identity(J, J) - B).inverse();
    Vector mean;
    Matrix cov;
    sem_moments(d, mean, cov);
    CHECK((mean - A * d.intercepts).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd S = A * d.residual_vars.asDiagonal() * A.transpose();
    CHECK((Eigen::MatrixXd(cov) - S).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((mean.transpose() - inst.cluster_means.row(k)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd rows(0, J);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < inst.latent.rows(); ++i)
      if (inst.labels[i] == k) idx.push_back(i);
    Eigen::MatrixXd Y(idx.size(), J);
    for (std::size_t i = 0; i < idx.size(); ++i) Y.row(i) = inst.latent.row(idx[i]);
    const Eigen::VectorXd m = Y.colwise().mean();
    const Eigen::MatrixXd C = (Y.rowwise() - m.transpose()).transpose() * (Y.rowwise() - m.transpose()) / (idx.size() - 1.0);
    CHECK((m - mean).cwiseAbs().maxCoeff() < 0.15);
    CHECK((C - S).cwiseAbs().maxCoeff() < 0.25 * (1 + S.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("aligned SHD of the truth is zero") {
  auto spec = default_tiers(42)[0];
  spec.n = 600;
  const auto inst = generate(spec, 0);
  CHECK(aligned_shd(inst.labels, inst.dags, inst.labels, inst.dags) == 0.0);
  std::vector<ArchetypeDag> empty(3, ArchetypeDag::empty(8));
  CHECK(aligned_shd(inst.labels, empty, inst.labels, inst.dags) == doctest::Approx(6.0));
}

TEST_CASE("replicate rows") {
  auto spec = default_tiers(42)[0];
  spec.n = 1200;
  const auto inst = generate(spec, 0);
  BenchmarkOptions opts;
  opts.mixture.seed = 4;
  opts.select_k = false;
  const auto res = run_replicate(inst, opts);
  REQUIRE(res.rows.size() == 4);
  for (int m = 0; m < 4; ++m) CHECK(res.rows[m].model == benchmark_models()[m]);
  CHECK(res.rows[0].clusters == 1);
  CHECK(std::isnan(res.rows[2].shd));
  CHECK(std::isfinite(res.rows[3].shd));
  CHECK(res.k_star == 0);
  CHECK(res.rows[3].ari > 0.8);

  std::vector<TierSpec> tiers{spec};
  tiers[0].replications = 2;
  opts.threads = 2;
  const auto rep = run_benchmark(tiers, opts);
  CHECK(rep.rows.size() == 8);
  CHECK(rep.rows[0].mse == res.rows[0].mse);
  CHECK(rep.k_star.size() == 1);
  bool found = false;
  for (const auto& s : rep.summary)
    if (s.model == "fixed_k_dag" && s.metric == "ari") {
      found = true;
      CHECK(s.count == 2);
      CHECK(s.mean == doctest::Approx((rep.rows[3].ari + rep.rows[7].ari) / 2));
    }
  CHECK(found);
}
