#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "ordmix/embedding.hpp"

#include <cmath>
#include <limits>

using namespace ordmix;

TEST_CASE("normal quantile agrees with bisection on the erfc cdf") {
  for (int i = 1; i <= 999; ++i) {
    const double p = i / 1000.0;
    CHECK(normal_quantile(p) == doctest::Approx(oracle::quantile_bisect(p)).epsilon(1e-12));
  }
  for (double p : {1e-300, 1e-12, 1e-6, 0.02425}) CHECK(normal_quantile(p) == doctest::Approx(oracle::quantile_bisect(p)).epsilon(1e-10));
  // Near 1 the quantile is ill-conditioned, so compare in probability.
  for (double p : {0.97575, 1 - 1e-6, 1 - 1e-12}) CHECK(std::abs(oracle::phi(normal_quantile(p)) - p) < 1e-15);
}

TEST_CASE("frozen quantiles") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.25) == doctest::Approx(-0.674490).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("quantile domain") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::numeric_limits<double>::quiet_NaN()}) {
    try {
      normal_quantile(p);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
}

TEST_CASE("cumulative midpoint scores") {
  OrdinalDataset d;
  d.item_names = {"a", "b"};
  d.category_counts = {3, 2};
  d.values.resize(100, 2);
  for (int i = 0; i < 100; ++i) {
    d.values(i, 0) = i < 80 ? 1 : (i < 90 ? 2 : 3);
    d.values(i, 1) = 1 + i % 2;
  }
  const auto emb = fit_embedding(d);
  CHECK(emb.masses[0][0] == doctest::Approx(0.8));
  CHECK(emb.midpoints[0][1] == doctest::Approx(0.85));
  CHECK(emb.score(0, 1) == doctest::Approx(-0.25335).epsilon(1e-4));
  CHECK(emb.score(0, 2) == doctest::Approx(1.03643).epsilon(1e-4));
  CHECK(emb.score(0, 3) == doctest::Approx(1.64485).epsilon(1e-4));
  CHECK(emb.score(1, 1) == doctest::Approx(oracle::quantile_bisect(0.25)).epsilon(1e-12));

  const auto t = transform(d, emb);
  CHECK(t.X(0, 0) == emb.score(0, 1));
  CHECK(t.X(95, 0) == emb.score(0, 3));
  CHECK(t.provenance.rfind("data:", 0) == 0);
}

TEST_CASE("spearman correlations survive the embedding") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = testing::random_dataset(300, 5, rng);
    const auto X = transform(d, fit_embedding(d)).X;
    for (int a = 0; a < 5; ++a)
      for (int b = a + 1; b < 5; ++b) {
        std::vector<double> ra, rb, ta, tb;
        for (int i = 0; i < 300; ++i) {
          ra.push_back(d.values(i, a));
          rb.push_back(d.values(i, b));
          ta.push_back(X(i, a));
          tb.push_back(X(i, b));
        }
        CHECK(std::abs(oracle::spearman(ra, rb) - oracle::spearman(ta, tb)) < 1e-12);
      }
  }
}

TEST_CASE("scores increase across observed categories") {
  std::mt19937_64 rng(5);
  const auto d = testing::random_dataset(200, 4, rng);
  const auto emb = fit_embedding(d);
  for (int j = 0; j < 4; ++j)
    for (int c = 1; c < d.category_counts[j]; ++c)
      if (emb.masses[j][c] > 0) CHECK(emb.score(j, c + 1) > emb.score(j, c));
}

TEST_CASE("zero-mass categories") {
  OrdinalDataset d;
  d.item_names = {"x"};
  d.category_counts = {4};
  d.values.resize(4, 1);
  d.values << 1, 1, 3, 3;
  const auto emb = fit_embedding(d);
  CHECK(emb.defined(0, 2));
  CHECK(emb.midpoints[0][1] == doctest::Approx(0.5));
  CHECK_FALSE(emb.defined(0, 4));
  CHECK(std::isnan(emb.scores[0][3]));

  OrdinalDataset other = d;
  other.values(0, 0) = 4;
  try {
    transform(other, emb);
    FAIL("expected UnseenCategory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnseenCategory);
  }
}

TEST_CASE("dataset validation") {
  auto code_of = [](const OrdinalDataset& d) {
    try {
      d.validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  OrdinalDataset d;
  d.item_names = {"a"};
  d.category_counts = {3};
  CHECK(code_of(d) == ErrorCode::EmptyDataset);
  d.values.resize(2, 1);
  d.values << 1, 4;
  CHECK(code_of(d) == ErrorCode::SchemaMismatch);
  d.values << 1, 2;
  d.category_counts = {1};
  CHECK(code_of(d) == ErrorCode::DegenerateItem);
  d.category_counts = {3};
  d.values << 2, 2;
  CHECK_THROWS_AS(fit_embedding(d), Error);
  d.item_names = {"a", "b"};
  CHECK(code_of(d) == ErrorCode::SchemaMismatch);
}

TEST_CASE("row and item selection") {
  std::mt19937_64 rng(3);
  const auto d = testing::random_dataset(20, 4, rng);
  const std::vector<Eigen::Index> rows{3, 3, 7};
  const auto s = d.select_rows(rows);
  CHECK(s.rows() == 3);
  CHECK(s.values(1, 2) == d.values(3, 2));
  const std::vector<std::string> names{"Q4", "Q2"};
  const auto t = d.select_items(names);
  CHECK(t.item_names == names);
  CHECK(t.values(5, 0) == d.values(5, 3));
  const std::vector<std::string> bad{"nope"};
  CHECK_THROWS_AS(d.select_items(bad), Error);
}
