#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mcdm/pipeline.hpp"

namespace mcdm::experiment {

struct TauDistance {
  double distance = 0.0;  // discordant pairs / comparable pairs, in [0, 1]
  std::size_t common = 0;
  std::size_t len_a = 0;
  std::size_t len_b = 0;
};

/**
 * Normalized Kendall tau distance between two rankings of ids. Only ids
 * present in both lists are compared, so lists truncated to different
 * lengths can still be related. Fewer than two shared ids gives 0.
 */
inline TauDistance kendall_tau_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  TauDistance out;
  out.len_a = a.size();
  out.len_b = b.size();
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < b.size(); ++i) pos_b.emplace(b[i], i);

  std::vector<std::size_t> order;  // positions in b, listed in a's order
  for (const auto& id : a)
    if (auto it = pos_b.find(id); it != pos_b.end()) order.push_back(it->second);
  out.common = order.size();
  if (order.size() < 2) return out;

  std::size_t discordant = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j]) ++discordant;
  const double pairs = static_cast<double>(order.size() * (order.size() - 1) / 2);
  out.distance = static_cast<double>(discordant) / pairs;
  return out;
}

struct ReferenceSpec {
  std::string domain;
  std::string key;
};

struct DomainResult {
  std::string domain;
  Product reference;
  std::map<Method, RankedResult> runs;
  std::vector<std::pair<std::pair<Method, Method>, TauDistance>> taus;

  std::vector<std::string> ordering(Method m) const {
    std::vector<std::string> ids;
    for (const auto& sp : runs.at(m).results) ids.push_back(sp.product.id);
    return ids;
  }

  std::size_t distinct_orderings() const {
    std::vector<std::vector<std::string>> seen;
    for (auto m : kMethods) {
      auto ids = ordering(m);
      if (std::find(seen.begin(), seen.end(), ids) == seen.end()) seen.push_back(std::move(ids));
    }
    return seen.size();
  }
};

/// References file: a JSON array of {"domain": ..., "key": ...} objects or of
/// plain id/URL strings, optionally wrapped as {"references": [...]}.
inline std::vector<ReferenceSpec> references_from_json(const nlohmann::json& doc) {
  const nlohmann::json* list = &doc;
  if (doc.is_object() && doc.contains("references")) list = &doc["references"];
  if (!list->is_array()) throw Error(ErrorCode::parse, "references file must contain an array");
  std::vector<ReferenceSpec> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& entry = (*list)[i];
    const std::string where = "references[" + std::to_string(i) + "]";
    if (entry.is_string()) {
      out.push_back({entry.get<std::string>(), entry.get<std::string>()});
    } else if (entry.is_object() && entry.contains("key") && entry["key"].is_string()) {
      auto key = entry["key"].get<std::string>();
      auto domain = entry.contains("domain") && entry["domain"].is_string() ? entry["domain"].get<std::string>() : key;
      out.push_back({std::move(domain), std::move(key)});
    } else {
      throw Error(ErrorCode::parse, where + " must be a string or an object with a string 'key'", {where});
    }
  }
  if (out.empty()) throw Error(ErrorCode::parse, "references file lists no references");
  return out;
}

/// Runs the three generators for one reference and relates their orderings.
inline DomainResult run_domain(const catalog::Provider& provider, const ReferenceSpec& spec,
                               const ahp::PairwiseMatrix& matrix, const ScoringConfig& config) {
  DomainResult out;
  out.domain = spec.domain;
  out.reference = provider.find_reference(spec.key);
  for (auto m : kMethods) out.runs.emplace(m, run_search(provider, out.reference, m, &matrix, config));
  for (std::size_t i = 0; i < kMethods.size(); ++i)
    for (std::size_t j = i + 1; j < kMethods.size(); ++j)
      out.taus.push_back({{kMethods[i], kMethods[j]},
                          kendall_tau_distance(out.ordering(kMethods[i]), out.ordering(kMethods[j]))});
  return out;
}

inline nlohmann::json to_json(const DomainResult& d) {
  nlohmann::json orderings = nlohmann::json::object();
  nlohmann::json runs = nlohmann::json::object();
  for (const auto& [m, run] : d.runs) {
    orderings[std::string(to_string(m))] = d.ordering(m);
    runs[std::string(to_string(m))] = to_json(run);
  }
  nlohmann::json taus = nlohmann::json::array();
  for (const auto& [methods, tau] : d.taus)
    taus.push_back({{"a", to_string(methods.first)},
                    {"b", to_string(methods.second)},
                    {"distance", tau.distance},
                    {"common", tau.common},
                    {"len_a", tau.len_a},
                    {"len_b", tau.len_b}});
  return {{"domain", d.domain},
          {"reference", reference_summary(d.reference)},
          {"orderings", std::move(orderings)},
          {"distinct_orderings", d.distinct_orderings()},
          {"kendall_tau", std::move(taus)},
          {"runs", std::move(runs)}};
}

}  // namespace mcdm::experiment
