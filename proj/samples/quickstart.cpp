// Derives AHP weights for the five criteria and ranks three made-up phones
// against a reference.

#include <iostream>
#include <vector>

#include "mcdm/mcdm.hpp"

int main() {
  using namespace mcdm;

  ahp::PairwiseMatrix judgments;
  judgments.labels = {"SI", "NR", "RA", "NVR", "NVP"};
  judgments.rows = {
      {1, 1.0 / 3, 7, 3, 5},
      {3, 1, 9, 5, 7},
      {1.0 / 7, 1.0 / 9, 1, 1.0 / 5, 1.0 / 3},
      {1.0 / 3, 1.0 / 5, 5, 1, 3},
      {1.0 / 5, 1.0 / 7, 3, 1.0 / 3, 1},
  };
  const auto priorities = ahp::derive_weights(judgments);
  std::cout << "CR = " << priorities.consistency.cr << (priorities.consistency.acceptable ? " (ok)\n" : " (revise)\n");

  const Product reference{"P0", "Google Pixel 3 64GB", 299.0, 4.3, 2100, std::nullopt, std::nullopt};
  const std::vector<Product> candidates{
      {"P1", "Google Pixel 4a 128GB", 349.0, 4.6, 5400, VideoStats{320, 63850, std::nullopt}, std::nullopt},
      {"P2", "Samsung Galaxy A52 128GB", 379.0, 4.4, 12000, std::nullopt, std::nullopt},
      {"P3", "Google Pixel 3 XL 64GB", 329.0, 4.1, 900, VideoStats{80, 12000, std::nullopt}, std::nullopt},
  };

  for (const auto& sp : rank(reference, candidates, priorities.weights, ScoringConfig{})) {
    std::cout << sp.rank << ". " << sp.product.title << "  " << sp.comprehensive << '\n';
    for (const auto& part : sp.explanation)
      std::cout << "     " << label(part.criterion) << " " << part.score << " x " << part.weight << '\n';
  }
}
