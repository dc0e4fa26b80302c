#pragma once

#include <filesystem>
#include <string>

#include "mcdm/ahp.hpp"
#include "mcdm/catalog.hpp"
#include "mcdm/matrix_file.hpp"

#ifndef MCDM_FIXTURE_DIR
#error "MCDM_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace fixtures {

inline std::filesystem::path path(const std::string& name) { return std::filesystem::path(MCDM_FIXTURE_DIR) / name; }

inline nlohmann::json json(const std::string& name) { return mcdm::catalog::read_json_file(path(name)); }

inline mcdm::ahp::PairwiseMatrix sample_judgments() { return mcdm::ahp::load_matrix_file(path("sample_judgments.json")); }

inline mcdm::catalog::CatalogFile catalog() { return mcdm::catalog::load_catalog(path("catalog.json")); }

inline mcdm::catalog::CatalogFile experiment_catalog() {
  return mcdm::catalog::load_catalog(path("experiment_catalog.json"));
}

/// Expected weights of sample_judgments() to four decimals, SI..NVP order.
inline constexpr double kExpectedWeights[] = {0.2638, 0.5100, 0.0329, 0.1295, 0.0636};

}  // namespace fixtures
