#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdm/ahp.hpp"
#include "mcdm/catalog.hpp"
#include "mcdm/matrix_file.hpp"
#include "mcdm/scoring.hpp"

namespace mcdm {

/// Everything produced by one search: the weights used, their consistency
/// diagnostics (AHP only) and the explained top-n list.
struct RankedResult {
  Product reference;
  Method method = Method::ahp;
  ahp::WeightVector weights;
  std::optional<ahp::ConsistencyReport> consistency;
  ScoringConfig config;
  std::vector<ScoredProduct> results;
};

/// Fetches related products (filling in video stats where the provider has
/// them separately) and ranks them with the requested method.
inline RankedResult run_search(const catalog::Provider& provider, const Product& reference, Method method,
                               const MethodWeights& weights, const ScoringConfig& config) {
  auto candidates = provider.related_products(reference, catalog::kMaxRelated);
  for (auto& c : candidates)
    if (!c.video) c.video = provider.video_stats(c);

  RankedResult out;
  out.reference = reference;
  out.method = method;
  out.weights = weights.weights;
  out.consistency = weights.consistency;
  out.config = config;
  out.results = rank(reference, candidates, weights.weights, config);
  return out;
}

inline RankedResult run_search(const catalog::Provider& provider, const Product& reference, Method method,
                               const ahp::PairwiseMatrix* matrix, const ScoringConfig& config) {
  return run_search(provider, reference, method, method_weights(method, matrix), config);
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline nlohmann::json to_json(const ScoringConfig& c) {
  return {{"rating_max", c.rating_max},
          {"nr_threshold", c.nr_threshold},
          {"nvr_threshold", c.nvr_threshold},
          {"nvp_threshold", c.nvp_threshold},
          {"top_n", c.top_n},
          {"price_percentiles", {c.lower_percentile, c.upper_percentile}}};
}

inline nlohmann::json optional_text(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}

inline nlohmann::json reference_summary(const Product& p) {
  return {{"id", p.id},
          {"title", p.title},
          {"price", p.price},
          {"rating", p.rating},
          {"review_count", p.review_count},
          {"source_url", optional_text(p.source_url)},
          {"video_url", p.video ? optional_text(p.video->video_url) : nlohmann::json(nullptr)}};
}

inline nlohmann::json to_json(const ScoredProduct& sp) {
  nlohmann::json scores = nlohmann::json::object();
  nlohmann::json contributions = nlohmann::json::object();
  nlohmann::json weights = nlohmann::json::object();
  nlohmann::json display = nlohmann::json::object();
  for (const auto& part : sp.explanation) {
    const auto k = key(part.criterion);
    scores[k] = part.score;
    contributions[k] = part.contribution;
    weights[k] = part.weight;
    display[k] = round2(part.score);
  }
  display["comprehensive"] = round2(sp.comprehensive);
  return {{"id", sp.product.id},
          {"title", sp.product.title},
          {"price", sp.product.price},
          {"rating", sp.product.rating},
          {"review_count", sp.product.review_count},
          {"rank", sp.rank},
          {"comprehensive", sp.comprehensive},
          {"attribute", {{"v_t", sp.attribute.v_t}, {"v1", sp.attribute.v1}}},
          {"scores", std::move(scores)},
          {"weights", std::move(weights)},
          {"contributions", std::move(contributions)},
          {"display", std::move(display)},
          {"video_url", sp.product.video ? optional_text(sp.product.video->video_url) : nlohmann::json(nullptr)},
          {"source_url", optional_text(sp.product.source_url)}};
}

/// Shared ranked-result schema of the service and the CLI.
inline nlohmann::json to_json(const RankedResult& r) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& sp : r.results) results.push_back(to_json(sp));
  return {{"reference", reference_summary(r.reference)},
          {"method", to_string(r.method)},
          {"weights", ahp::to_json(r.weights)},
          {"consistency", r.consistency ? ahp::to_json(*r.consistency) : nlohmann::json(nullptr)},
          {"config", to_json(r.config)},
          {"results", std::move(results)}};
}

}  // namespace mcdm
