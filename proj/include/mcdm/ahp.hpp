#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mcdm/errors.hpp"

namespace mcdm::ahp {

/// Smallest and largest judgment allowed on the 1-9 scale.
inline constexpr double kScaleMin = 1.0 / 9.0;
inline constexpr double kScaleMax = 9.0;

inline constexpr double kReciprocityTolerance = 1e-9;
inline constexpr double kAcceptableRatio = 0.1;

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 1000;

/**
 * Square judgment matrix. Entry (i, j) states how strongly criterion i
 * dominates criterion j. The type does not enforce its invariants on
 * construction so that malformed input can be reported cell by cell by
 * validate_matrix().
 */
struct PairwiseMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;

  std::size_t order() const noexcept { return rows.size(); }
  double operator()(std::size_t i, std::size_t j) const { return rows[i][j]; }

  /// Builds the matrix w_i / w_j, which is perfectly consistent.
  static PairwiseMatrix from_weights(std::vector<std::string> labels, std::span<const double> w) {
    PairwiseMatrix m;
    m.labels = std::move(labels);
    m.rows.assign(w.size(), std::vector<double>(w.size(), 1.0));
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j)
        if (i != j) m.rows[i][j] = w[i] / w[j];
    return m;
  }

  /// Same judgments with criteria reordered: result(i, j) = (*this)(perm[i], perm[j]).
  PairwiseMatrix permuted(std::span<const std::size_t> perm) const {
    PairwiseMatrix m;
    const std::size_t n = order();
    m.labels.resize(n);
    m.rows.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
      m.labels[i] = labels[perm[i]];
      for (std::size_t j = 0; j < n; ++j) m.rows[i][j] = rows[perm[i]][perm[j]];
    }
    return m;
  }
};

struct Violation {
  enum class Kind { diagonal, reciprocity, scale_bounds, label };

  Kind kind;
  std::size_t row;
  std::size_t col;
  std::string message;
};

inline std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::diagonal: return "diagonal";
    case Violation::Kind::reciprocity: return "reciprocity";
    case Violation::Kind::scale_bounds: return "scale_bounds";
    case Violation::Kind::label: return "label";
  }
  return "unknown";
}

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Thrown when a matrix fails validation inside derive_weights() and friends.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(ErrorCode::validation, summarize(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& v) {
    std::string msg = "pairwise matrix has " + std::to_string(v.size()) + " violation(s)";
    if (!v.empty()) msg += ": " + v.front().message;
    return msg;
  }

  std::vector<Violation> violations_;
};

/// Power iteration ran out of iterations. Carries the last normalized iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::vector<double> last_iterate, double last_delta)
      : Error(ErrorCode::convergence,
              "power iteration did not converge (last max-norm step " + std::to_string(last_delta) + ")"),
        last_iterate_(std::move(last_iterate)),
        last_delta_(last_delta) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double last_delta() const noexcept { return last_delta_; }

 private:
  std::vector<double> last_iterate_;
  double last_delta_;
};

struct WeightVector {
  std::vector<std::string> labels;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }

  std::optional<double> find(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return weights[i];
    return std::nullopt;
  }
};

struct ConsistencyReport {
  double lambda_max = 0.0;
  double ci = 0.0;
  double ri = 0.0;
  double cr = 0.0;
  bool acceptable = true;
};

struct EigenResult {
  double lambda_max = 0.0;
  WeightVector weights;
  int iterations = 0;
};

struct Priorities {
  WeightVector weights;
  ConsistencyReport consistency;
};

/// Checks shape, positivity, unit diagonal, reciprocity and scale bounds.
/// Throws on structural problems (non-square, n < 2, label count) and on
/// non-positive entries; every other problem is collected as a Violation.
inline ValidationResult validate_matrix(const PairwiseMatrix& m) {
  const std::size_t n = m.order();
  if (n < 2) throw Error(ErrorCode::structural, "pairwise matrix needs order >= 2, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (m.rows[i].size() != n)
      throw Error(ErrorCode::structural,
                  "pairwise matrix is not square: row " + std::to_string(i) + " has " +
                      std::to_string(m.rows[i].size()) + " entries, expected " + std::to_string(n),
                  {"row " + std::to_string(i)});
  }
  if (m.labels.size() != n)
    throw Error(ErrorCode::structural, "expected " + std::to_string(n) + " criteria labels, got " +
                                           std::to_string(m.labels.size()));

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v <= 0.0) {
        const std::string cell = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        throw Error(ErrorCode::domain, "judgment at " + cell + " must be positive and finite", {cell});
      }
    }

  ValidationResult result;
  auto cell = [](std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.labels[i].empty())
      result.violations.push_back({Violation::Kind::label, i, i, "criterion label " + std::to_string(i) + " is empty"});
    else if (!seen.insert(m.labels[i]).second)
      result.violations.push_back({Violation::Kind::label, i, i, "duplicate criterion label '" + m.labels[i] + "'"});
  }

  // Relative slack admits 1/9 and 9 after floating-point round-off.
  constexpr double slack = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 1.0)
      result.violations.push_back(
          {Violation::Kind::diagonal, i, i, "diagonal entry " + cell(i, i) + " must equal 1"});
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (v < kScaleMin * (1.0 - slack) || v > kScaleMax * (1.0 + slack))
        result.violations.push_back({Violation::Kind::scale_bounds, i, j,
                                     "entry " + cell(i, j) + " = " + std::to_string(v) + " outside [1/9, 9]"});
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double product = m(i, j) * m(j, i);
      if (std::abs(product - 1.0) > kReciprocityTolerance)
        result.violations.push_back({Violation::Kind::reciprocity, j, i,
                                     "entry " + cell(j, i) + " is not the reciprocal of " + cell(i, j)});
    }
  return result;
}

inline void require_valid(const PairwiseMatrix& m) {
  auto result = validate_matrix(m);
  if (!result.ok()) throw ValidationError(std::move(result.violations));
}

namespace detail {

inline std::vector<double> multiply(const PairwiseMatrix& m, std::span<const double> x) {
  const std::size_t n = m.order();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace detail

/**
 * Dominant eigenpair by power iteration. The iterate is renormalized to unit
 * sum after every step and iteration stops once the max-norm difference of
 * successive iterates drops below `tol`. The eigenvalue is recovered from the
 * final iterate as sum(A x) / sum(x).
 *
 * `start` must be strictly positive; when omitted the uniform vector 1/n is
 * used. Throws ConvergenceError if `max_iter` steps are not enough.
 */
inline EigenResult principal_eigen(const PairwiseMatrix& m, double tol = kDefaultTolerance,
                                   int max_iter = kDefaultMaxIterations,
                                   std::span<const double> start = {}) {
  require_valid(m);
  if (!(tol > 0.0)) throw Error(ErrorCode::domain, "tolerance must be positive");
  if (max_iter < 1) throw Error(ErrorCode::domain, "max_iter must be at least 1");

  const std::size_t n = m.order();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  if (!start.empty()) {
    if (start.size() != n) throw Error(ErrorCode::structural, "start vector length does not match matrix order");
    if (std::any_of(start.begin(), start.end(), [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
      throw Error(ErrorCode::domain, "start vector must be strictly positive");
    const double s = detail::sum(start);
    for (std::size_t i = 0; i < n; ++i) x[i] = start[i] / s;
  }

  double delta = 0.0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    auto y = detail::multiply(m, x);
    const double s = detail::sum(y);
    delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= s;
      delta = std::max(delta, std::abs(y[i] - x[i]));
    }
    x = std::move(y);
    if (delta < tol) {
      EigenResult out;
      out.lambda_max = detail::sum(detail::multiply(m, x)) / detail::sum(x);
      out.weights.labels = m.labels;
      out.weights.weights = std::move(x);
      out.iterations = iter;
      return out;
    }
  }
  throw ConvergenceError(std::move(x), delta);
}

/// Random consistency index for matrices of order 1..10.
inline double random_index(std::size_t n) {
  static constexpr std::array<double, 11> table{0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49};
  if (n < 1 || n >= table.size())
    throw Error(ErrorCode::unsupported_order,
                "no random consistency index for order " + std::to_string(n) + " (supported: 1..10)");
  return table[n];
}

inline ConsistencyReport consistency(const PairwiseMatrix& m, double lambda_max) {
  const std::size_t n = m.order();
  ConsistencyReport report;
  report.lambda_max = lambda_max;
  report.ri = random_index(n);
  if (n <= 2) {
    report.ci = 0.0;
    report.cr = 0.0;
  } else {
    // lambda_max >= n holds mathematically; round-off may leave it a hair below.
    report.ci = std::max(0.0, (lambda_max - static_cast<double>(n)) / static_cast<double>(n - 1));
    report.cr = report.ci / report.ri;
  }
  report.acceptable = report.cr <= kAcceptableRatio;
  return report;
}

/// Weights plus consistency diagnostics. Weights are returned even when the
/// judgments are not acceptably consistent; callers check `acceptable`.
inline Priorities derive_weights(const PairwiseMatrix& m) {
  auto eigen = principal_eigen(m, kDefaultTolerance, kDefaultMaxIterations);
  Priorities out;
  out.consistency = consistency(m, eigen.lambda_max);
  out.weights = std::move(eigen.weights);
  return out;
}

}  // namespace mcdm::ahp
