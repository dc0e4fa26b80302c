#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcdm {

enum class ErrorCode {
  structural,
  domain,
  validation,
  convergence,
  unsupported_order,
  empty_document,
  empty_corpus,
  stale_corpus,
  undefined_similarity,
  insufficient_data,
  criteria_mismatch,
  no_candidates,
  too_many_candidates,
  missing_matrix,
  missing_reference,
  not_found,
  ambiguous_url,
  malformed_key,
  empty_category,
  provider_unavailable,
  parse,
  duplicate_id,
  invalid_config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::structural: return "structural";
    case ErrorCode::domain: return "domain";
    case ErrorCode::validation: return "validation";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::unsupported_order: return "unsupported_order";
    case ErrorCode::empty_document: return "empty_document";
    case ErrorCode::empty_corpus: return "empty_corpus";
    case ErrorCode::stale_corpus: return "stale_corpus";
    case ErrorCode::undefined_similarity: return "undefined_similarity";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::criteria_mismatch: return "criteria_mismatch";
    case ErrorCode::no_candidates: return "no_candidates";
    case ErrorCode::too_many_candidates: return "too_many_candidates";
    case ErrorCode::missing_matrix: return "missing_matrix";
    case ErrorCode::missing_reference: return "missing_reference";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::ambiguous_url: return "ambiguous_url";
    case ErrorCode::malformed_key: return "malformed_key";
    case ErrorCode::empty_category: return "empty_category";
    case ErrorCode::provider_unavailable: return "provider_unavailable";
    case ErrorCode::parse: return "parse";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::invalid_config: return "invalid_config";
  }
  return "unknown";
}

/// Base exception for every failure raised by the library. `details` holds
/// machine-readable fragments (offending ids, cell coordinates, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace mcdm
