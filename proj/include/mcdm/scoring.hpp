#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcdm/ahp.hpp"
#include "mcdm/errors.hpp"
#include "mcdm/text.hpp"

namespace mcdm {

struct VideoStats {
  std::uint64_t video_review_count = 0;
  std::uint64_t video_play_count = 0;
  std::optional<std::string> video_url;

  bool operator==(const VideoStats&) const = default;
};

struct Product {
  std::string id;
  std::string title;
  double price = 0.0;
  double rating = 0.0;
  std::uint64_t review_count = 0;
  std::optional<VideoStats> video;
  std::optional<std::string> source_url;

  bool operator==(const Product&) const = default;
};

/// The five criteria, in canonical order.
enum class Criterion { si, nr, ra, nvr, nvp };

inline constexpr std::array<Criterion, 5> kCriteria{Criterion::si, Criterion::nr, Criterion::ra, Criterion::nvr,
                                                   Criterion::nvp};
inline constexpr std::array<std::string_view, 5> kCriterionLabels{"SI", "NR", "RA", "NVR", "NVP"};

inline std::string_view label(Criterion c) { return kCriterionLabels[static_cast<std::size_t>(c)]; }

/// Lowercase key used for score objects in JSON payloads.
inline std::string key(Criterion c) {
  std::string s(label(c));
  for (auto& ch : s) ch = static_cast<char>(ch - 'A' + 'a');
  return s;
}

struct ScoringConfig {
  double rating_max = 5.0;
  std::uint64_t nr_threshold = 10000;
  std::uint64_t nvr_threshold = 1000;
  std::uint64_t nvp_threshold = 100000;
  int top_n = 10;
  double lower_percentile = 5.0;
  double upper_percentile = 95.0;

  void validate() const {
    if (!(rating_max > 0.0) || !std::isfinite(rating_max)) throw Error(ErrorCode::invalid_config, "rating_max must be positive");
    if (nr_threshold == 0 || nvr_threshold == 0 || nvp_threshold == 0)
      throw Error(ErrorCode::invalid_config, "criterion thresholds must be positive");
    if (top_n < 1 || top_n > 30) throw Error(ErrorCode::invalid_config, "top_n must be in [1, 30]");
    if (!(lower_percentile >= 0.0 && lower_percentile <= upper_percentile && upper_percentile <= 100.0))
      throw Error(ErrorCode::invalid_config, "price percentiles must satisfy 0 <= lower <= upper <= 100");
  }
};

struct AttributeVector {
  double v_t = 0.0;
  double v1 = 0.0;
};

struct CriterionScores {
  double si = 0.0;
  double nr = 0.0;
  double ra = 0.0;
  double nvr = 0.0;
  double nvp = 0.0;

  double operator[](Criterion c) const {
    switch (c) {
      case Criterion::si: return si;
      case Criterion::nr: return nr;
      case Criterion::ra: return ra;
      case Criterion::nvr: return nvr;
      case Criterion::nvp: return nvp;
    }
    return 0.0;
  }
};

struct Contribution {
  Criterion criterion;
  double score;
  double weight;
  double contribution;
};

struct ScoredProduct {
  Product product;
  AttributeVector attribute;
  double similarity = 0.0;  // SI in [0, 1]
  CriterionScores scores;
  double comprehensive = 0.0;
  int rank = 0;
  std::vector<Contribution> explanation;
};

/// Inter-percentile width of the price distribution. A zero width is the
/// degenerate case where every price is equal.
struct PriceRange {
  double width = 0.0;

  bool degenerate() const noexcept { return !(width > 0.0); }
};

/// Percentile with linear interpolation between closest ranks, p in [0, 100].
inline double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::insufficient_data, "percentile of an empty sample");
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline PriceRange price_range(std::span<const double> prices, const ScoringConfig& config) {
  if (prices.size() < 2) throw Error(ErrorCode::insufficient_data, "price range needs at least 2 prices");
  std::vector<double> sorted(prices.begin(), prices.end());
  for (double p : sorted)
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::domain, "prices must be non-negative");
  std::sort(sorted.begin(), sorted.end());
  const double width = percentile(sorted, config.upper_percentile) - percentile(sorted, config.lower_percentile);
  return PriceRange{width > 0.0 ? width : 0.0};
}

/// v1 = 1 - |cand - ref| / range, clamped to [0, 1].
inline double price_vector(double ref_price, double cand_price, PriceRange range) {
  if (!(ref_price >= 0.0) || !(cand_price >= 0.0)) throw Error(ErrorCode::domain, "prices must be non-negative");
  if (range.degenerate()) return ref_price == cand_price ? 1.0 : 0.0;
  const double v = 1.0 - std::abs(cand_price - ref_price) / range.width;
  return std::clamp(v, 0.0, 1.0);
}

/// Cosine between the reference's (1, 1) and the candidate's (v_t, v1).
inline double product_similarity(AttributeVector a) {
  const double norm = std::sqrt(a.v_t * a.v_t + a.v1 * a.v1);
  if (norm == 0.0) return 0.0;
  if (a.v_t == a.v1) return 1.0;
  return std::clamp((a.v_t + a.v1) / (std::sqrt(2.0) * norm), 0.0, 1.0);
}

namespace detail {

inline double capped_percent(std::uint64_t value, std::uint64_t threshold) {
  const double v = static_cast<double>(std::min(value, threshold));
  return v * 100.0 / static_cast<double>(threshold);
}

}  // namespace detail

inline CriterionScores criterion_scores(const Product& product, double si, const ScoringConfig& config) {
  CriterionScores s;
  s.si = std::clamp(si, 0.0, 1.0) * 100.0;
  s.ra = std::clamp(product.rating, 0.0, config.rating_max) * 100.0 / config.rating_max;
  s.nr = detail::capped_percent(product.review_count, config.nr_threshold);
  if (product.video) {
    s.nvr = detail::capped_percent(product.video->video_review_count, config.nvr_threshold);
    s.nvp = detail::capped_percent(product.video->video_play_count, config.nvp_threshold);
  }
  return s;
}

/// Weights in canonical criterion order. Throws unless the labels are
/// exactly the five criteria.
inline std::array<double, 5> aligned_weights(const ahp::WeightVector& weights) {
  if (weights.labels.size() != kCriteria.size() || weights.weights.size() != kCriteria.size())
    throw Error(ErrorCode::criteria_mismatch, "weights must cover exactly SI, NR, RA, NVR, NVP");
  std::array<double, 5> out{};
  for (auto c : kCriteria) {
    auto w = weights.find(label(c));
    if (!w) throw Error(ErrorCode::criteria_mismatch, "weights are missing criterion " + std::string(label(c)));
    if (!(*w >= 0.0) || !std::isfinite(*w)) throw Error(ErrorCode::domain, "weights must be non-negative");
    out[static_cast<std::size_t>(c)] = *w;
  }
  return out;
}

inline std::vector<Contribution> explain(const CriterionScores& scores, const ahp::WeightVector& weights) {
  const auto w = aligned_weights(weights);
  std::vector<Contribution> out;
  out.reserve(kCriteria.size());
  for (auto c : kCriteria) {
    const double wi = w[static_cast<std::size_t>(c)];
    out.push_back({c, scores[c], wi, wi * scores[c]});
  }
  return out;
}

inline double total(std::span<const Contribution> parts) {
  double acc = 0.0;
  for (const auto& p : parts) acc += p.contribution;
  return acc;
}

/// Weighted sum of the five criterion scores.
inline double comprehensive_score(const CriterionScores& scores, const ahp::WeightVector& weights) {
  return total(explain(scores, weights));
}

inline ahp::WeightVector make_weights(std::array<double, 5> values) {
  ahp::WeightVector w;
  for (auto c : kCriteria) w.labels.emplace_back(label(c));
  w.weights.assign(values.begin(), values.end());
  return w;
}

/// Rescales to unit sum.
inline ahp::WeightVector normalized(ahp::WeightVector w) {
  double s = 0.0;
  for (double v : w.weights) s += v;
  if (!(s > 0.0)) throw Error(ErrorCode::domain, "weights must have a positive sum");
  for (double& v : w.weights) v /= s;
  return w;
}

inline void validate_product(const Product& p, const ScoringConfig& config) {
  if (!(p.price >= 0.0) || !std::isfinite(p.price))
    throw Error(ErrorCode::domain, "product " + p.id + " has a negative price", {p.id});
  if (!(p.rating >= 0.0) || p.rating > config.rating_max)
    throw Error(ErrorCode::domain, "product " + p.id + " has a rating outside [0, rating_max]", {p.id});
}

inline constexpr std::size_t kMaxCandidates = 30;

/// Comprehensive score descending, then SI descending, then id ascending.
inline bool ranks_before(const ScoredProduct& a, const ScoredProduct& b) {
  if (a.comprehensive != b.comprehensive) return a.comprehensive > b.comprehensive;
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.product.id < b.product.id;
}

/**
 * Scores every candidate against the reference and returns the top_n by
 * comprehensive score, each carrying its explanation. The TF-IDF corpus and
 * the price range are built from the reference plus all candidates.
 */
inline std::vector<ScoredProduct> rank(const Product& reference, std::span<const Product> candidates,
                                       const ahp::WeightVector& weights, const ScoringConfig& config) {
  config.validate();
  if (candidates.empty()) throw Error(ErrorCode::no_candidates, "no candidate products to rank");
  if (candidates.size() > kMaxCandidates)
    throw Error(ErrorCode::too_many_candidates,
                "at most " + std::to_string(kMaxCandidates) + " candidates per search, got " +
                    std::to_string(candidates.size()));
  aligned_weights(weights);
  validate_product(reference, config);
  for (const auto& c : candidates) validate_product(c, config);

  std::vector<text::TitleDocument> docs;
  docs.reserve(candidates.size() + 1);
  docs.push_back(text::tokenize(reference.title, reference.id));
  for (const auto& c : candidates) docs.push_back(text::tokenize(c.title, c.id));
  const auto corpus = text::build_corpus(docs);

  std::vector<double> prices;
  prices.reserve(candidates.size() + 1);
  prices.push_back(reference.price);
  for (const auto& c : candidates) prices.push_back(c.price);
  const auto range = price_range(prices, config);

  const auto ref_vec = text::tfidf_vector(docs.front(), corpus);
  std::vector<ScoredProduct> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ScoredProduct sp;
    sp.product = candidates[i];
    sp.attribute.v_t = text::cosine(ref_vec, text::tfidf_vector(docs[i + 1], corpus));
    sp.attribute.v1 = price_vector(reference.price, candidates[i].price, range);
    sp.similarity = product_similarity(sp.attribute);
    sp.scores = criterion_scores(candidates[i], sp.similarity, config);
    sp.explanation = explain(sp.scores, weights);
    sp.comprehensive = total(sp.explanation);
    scored.push_back(std::move(sp));
  }

  std::sort(scored.begin(), scored.end(), ranks_before);
  if (scored.size() > static_cast<std::size_t>(config.top_n)) scored.resize(static_cast<std::size_t>(config.top_n));
  for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = static_cast<int>(i + 1);
  return scored;
}

/// The three ranking generators compared in the user study.
enum class Method { similarity_only, equal_weights, ahp };

inline constexpr std::array<Method, 3> kMethods{Method::similarity_only, Method::equal_weights, Method::ahp};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::similarity_only: return "similarity_only";
    case Method::equal_weights: return "equal_weights";
    case Method::ahp: return "ahp";
  }
  return "unknown";
}

/// Accepts the canonical names plus the CLI shorthands "similarity" / "equal".
inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "similarity_only" || s == "similarity") return Method::similarity_only;
  if (s == "equal_weights" || s == "equal") return Method::equal_weights;
  if (s == "ahp") return Method::ahp;
  return std::nullopt;
}

struct MethodWeights {
  ahp::WeightVector weights;
  std::optional<ahp::ConsistencyReport> consistency;
};

inline MethodWeights method_weights(Method method, const ahp::PairwiseMatrix* matrix) {
  switch (method) {
    case Method::similarity_only: return {make_weights({1.0, 0.0, 0.0, 0.0, 0.0}), std::nullopt};
    case Method::equal_weights: return {make_weights({0.2, 0.2, 0.2, 0.2, 0.2}), std::nullopt};
    case Method::ahp: {
      if (matrix == nullptr) throw Error(ErrorCode::missing_matrix, "the ahp method needs a pairwise comparison matrix");
      auto p = ahp::derive_weights(*matrix);
      aligned_weights(p.weights);
      return {std::move(p.weights), p.consistency};
    }
  }
  throw Error(ErrorCode::domain, "unknown ranking method");
}

/// similarity_only orders by SI alone (all weight on SI), equal_weights gives
/// each criterion 0.2, ahp uses the eigenvector weights of `matrix`.
inline std::vector<ScoredProduct> rank_by_method(const Product& reference, std::span<const Product> candidates,
                                                 Method method, const ahp::PairwiseMatrix* matrix,
                                                 const ScoringConfig& config) {
  const auto mw = method_weights(method, matrix);
  return rank(reference, candidates, mw.weights, config);
}

}  // namespace mcdm
