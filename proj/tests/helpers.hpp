#pragma once

#include "files.hpp"
#include "ordmix/embedding.hpp"

#include <random>
#include <string>

namespace testing {

inline ordmix::OrdinalDataset random_dataset(int n, int items, std::mt19937_64& rng, int min_c = 3, int max_c = 7) {
  ordmix::OrdinalDataset d;
  d.values.resize(n, items);
  for (int j = 0; j < items; ++j) {
    const int C = std::uniform_int_distribution<int>(min_c, max_c)(rng);
    d.item_names.push_back("Q" + std::to_string(j + 1));
    d.category_counts.push_back(C);
    std::vector<double> w(C);
    for (auto& x : w) x = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    std::discrete_distribution<int> pick(w.begin(), w.end());
    for (int i = 0; i < n; ++i) d.values(i, j) = 1 + pick(rng);
    d.values(0, j) = 1;
    d.values(1, j) = C;
  }
  return d;
}

}  // namespace testing
