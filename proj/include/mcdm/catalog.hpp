#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mcdm/errors.hpp"
#include "mcdm/scoring.hpp"

namespace mcdm::catalog {

inline constexpr std::string_view kFormatVersion = "1";
inline constexpr int kMaxRelated = 30;

struct CatalogFile {
  std::string version{kFormatVersion};
  std::vector<Product> products;
  std::map<std::string, std::string> categories;  // product id -> category

  const Product* find(std::string_view id) const {
    auto it = std::find_if(products.begin(), products.end(), [&](const Product& p) { return p.id == id; });
    return it == products.end() ? nullptr : &*it;
  }

  bool operator==(const CatalogFile&) const = default;
};

// --- JSON schema -----------------------------------------------------------

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* field, const std::string& where) {
  if (!obj.contains(field)) throw Error(ErrorCode::parse, where + "." + field + " is missing", {where + "." + field});
  return obj[field];
}

inline std::string require_string(const nlohmann::json& obj, const char* field, const std::string& where) {
  const auto& v = require(obj, field, where);
  if (!v.is_string()) throw Error(ErrorCode::parse, where + "." + field + " must be a string", {where + "." + field});
  return v.get<std::string>();
}

inline double require_number(const nlohmann::json& obj, const char* field, const std::string& where) {
  const auto& v = require(obj, field, where);
  if (!v.is_number()) throw Error(ErrorCode::parse, where + "." + field + " must be a number", {where + "." + field});
  return v.get<double>();
}

inline std::uint64_t require_count(const nlohmann::json& obj, const char* field, const std::string& where) {
  const auto& v = require(obj, field, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw Error(ErrorCode::parse, where + "." + field + " must be a non-negative integer", {where + "." + field});
  return v.get<std::uint64_t>();
}

inline std::optional<std::string> optional_string(const nlohmann::json& obj, const char* field,
                                                  const std::string& where) {
  if (!obj.contains(field) || obj[field].is_null()) return std::nullopt;
  if (!obj[field].is_string())
    throw Error(ErrorCode::parse, where + "." + field + " must be a string or null", {where + "." + field});
  return obj[field].get<std::string>();
}

}  // namespace detail

inline nlohmann::json to_json(const VideoStats& v) {
  return {{"review_count", v.video_review_count},
          {"play_count", v.video_play_count},
          {"url", v.video_url ? nlohmann::json(*v.video_url) : nlohmann::json(nullptr)}};
}

/// Product record without the category (which lives in the catalog).
inline nlohmann::json to_json(const Product& p) {
  return {{"id", p.id},
          {"title", p.title},
          {"price", p.price},
          {"rating", p.rating},
          {"review_count", p.review_count},
          {"video", p.video ? to_json(*p.video) : nlohmann::json(nullptr)},
          {"source_url", p.source_url ? nlohmann::json(*p.source_url) : nlohmann::json(nullptr)}};
}

inline Product product_from_json(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::parse, where + " must be an object", {where});
  Product p;
  p.id = detail::require_string(obj, "id", where);
  p.title = detail::require_string(obj, "title", where);
  p.price = detail::require_number(obj, "price", where);
  p.rating = detail::require_number(obj, "rating", where);
  p.review_count = detail::require_count(obj, "review_count", where);
  if (obj.contains("video") && !obj["video"].is_null()) {
    const auto& v = obj["video"];
    const std::string vw = where + ".video";
    if (!v.is_object()) throw Error(ErrorCode::parse, vw + " must be an object or null", {vw});
    VideoStats stats;
    stats.video_review_count = detail::require_count(v, "review_count", vw);
    stats.video_play_count = detail::require_count(v, "play_count", vw);
    stats.video_url = detail::optional_string(v, "url", vw);
    p.video = std::move(stats);
  }
  p.source_url = detail::optional_string(obj, "source_url", where);
  return p;
}

/// Checks catalog invariants: unique ids, a category for every product,
/// non-negative prices and ratings.
inline void validate(const CatalogFile& c) {
  if (c.version != kFormatVersion)
    throw Error(ErrorCode::parse, "unsupported catalog version '" + c.version + "' (expected \"1\")", {"version"});
  std::set<std::string> seen;
  std::set<std::string> duplicates;
  for (const auto& p : c.products)
    if (!seen.insert(p.id).second) duplicates.insert(p.id);
  if (!duplicates.empty()) {
    std::vector<std::string> ids(duplicates.begin(), duplicates.end());
    std::string list;
    for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::duplicate_id, "duplicate product id(s): " + list, ids);
  }
  std::vector<std::string> bad;
  for (const auto& p : c.products) {
    auto it = c.categories.find(p.id);
    if (p.id.empty() || it == c.categories.end() || it->second.empty() || !(p.price >= 0.0) || !(p.rating >= 0.0))
      bad.push_back(p.id);
  }
  if (!bad.empty()) throw Error(ErrorCode::parse, "invalid product record(s)", bad);
  for (const auto& [id, _] : c.categories)
    if (!seen.contains(id)) throw Error(ErrorCode::parse, "category assigned to unknown product " + id, {id});
}

inline CatalogFile catalog_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "catalog must be a JSON object");
  CatalogFile c;
  c.version = detail::require_string(doc, "version", "catalog");
  const auto& products = detail::require(doc, "products", "catalog");
  if (!products.is_array()) throw Error(ErrorCode::parse, "catalog.products must be an array", {"products"});
  for (std::size_t i = 0; i < products.size(); ++i) {
    const std::string where = "products[" + std::to_string(i) + "]";
    auto p = product_from_json(products[i], where);
    c.categories[p.id] = detail::require_string(products[i], "category", where);
    c.products.push_back(std::move(p));
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const CatalogFile& c) {
  nlohmann::json products = nlohmann::json::array();
  for (const auto& p : c.products) {
    auto obj = to_json(p);
    auto it = c.categories.find(p.id);
    obj["category"] = it == c.categories.end() ? "" : it->second;
    products.push_back(std::move(obj));
  }
  return {{"version", c.version}, {"products", std::move(products)}};
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

inline CatalogFile load_catalog(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return catalog_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.details());
  }
}

// --- provider configuration -----------------------------------------------

struct ProviderConfig {
  enum class Kind { local, remote };

  Kind kind = Kind::local;
  std::filesystem::path path;  // local
  std::string endpoint;        // remote, e.g. "http://127.0.0.1:8080"
  /// Header values may reference the environment as "${env:NAME}".
  std::map<std::string, std::string> headers;
  /// Remote route templates for "details", "search" and "videos". Placeholders
  /// {id}, {category}, {title} and {limit} are substituted percent-encoded.
  std::map<std::string, std::string> routes{
      {"details", "/products/{id}"},
      {"search", "/search?category={category}&limit={limit}"},
      {"videos", "/videos?q={title}"},
  };
  /// Key holding the result array of list responses ("" = top-level array).
  std::map<std::string, std::string> list_keys{{"search", "results"}, {"videos", "items"}};
  /// Remote response field (dotted path) -> Product field.
  std::map<std::string, std::string> mapping;
  /// Remote video entry field -> one of id, play_count, review_count, url.
  std::map<std::string, std::string> video_mapping{
      {"id", "id"}, {"play_count", "play_count"}, {"review_count", "review_count"}, {"url", "url"}};
  std::chrono::milliseconds timeout{5000};
  std::chrono::seconds cache_ttl{600};

  void validate() const {
    if (kind == Kind::local) {
      if (path.empty()) throw Error(ErrorCode::invalid_config, "local provider requires a catalog path");
      return;
    }
    if (endpoint.empty()) throw Error(ErrorCode::invalid_config, "remote provider requires an endpoint");
    if (mapping.empty()) throw Error(ErrorCode::invalid_config, "remote provider requires a field mapping");
    std::set<std::string> targets;
    for (const auto& [_, field] : mapping) targets.insert(field);
    for (const char* needed : {"id", "title"})
      if (!targets.contains(needed))
        throw Error(ErrorCode::invalid_config, std::string("remote field mapping must produce '") + needed + "'");
    for (const char* route : {"details", "search", "videos"})
      if (!routes.contains(route)) throw Error(ErrorCode::invalid_config, std::string("missing route '") + route + "'");
  }
};

inline ProviderConfig provider_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  if (!doc.is_object()) throw Error(ErrorCode::invalid_config, "provider config must be a JSON object");
  ProviderConfig cfg;
  const auto kind = doc.value("kind", std::string("local"));
  if (kind == "local") {
    cfg.kind = ProviderConfig::Kind::local;
    cfg.path = doc.value("path", std::string());
    if (!cfg.path.empty() && cfg.path.is_relative() && !base_dir.empty()) cfg.path = base_dir / cfg.path;
  } else if (kind == "remote") {
    cfg.kind = ProviderConfig::Kind::remote;
    cfg.endpoint = doc.value("endpoint", std::string());
    auto read_map = [&](const char* field, std::map<std::string, std::string>& out, bool replace) {
      if (!doc.contains(field)) return;
      if (!doc[field].is_object()) throw Error(ErrorCode::invalid_config, std::string(field) + " must be an object");
      if (replace) out.clear();
      for (const auto& [k, v] : doc[field].items()) {
        if (!v.is_string()) throw Error(ErrorCode::invalid_config, std::string(field) + "." + k + " must be a string");
        out[k] = v.get<std::string>();
      }
    };
    read_map("headers", cfg.headers, true);
    read_map("routes", cfg.routes, false);
    read_map("list_keys", cfg.list_keys, false);
    read_map("mapping", cfg.mapping, true);
    read_map("video_mapping", cfg.video_mapping, true);
    if (doc.contains("timeout_ms")) cfg.timeout = std::chrono::milliseconds(doc["timeout_ms"].get<long long>());
    if (doc.contains("cache_ttl_s")) cfg.cache_ttl = std::chrono::seconds(doc["cache_ttl_s"].get<long long>());
  } else {
    throw Error(ErrorCode::invalid_config, "provider kind must be 'local' or 'remote', got '" + kind + "'");
  }
  cfg.validate();
  return cfg;
}

inline ProviderConfig load_provider_config(const std::filesystem::path& path) {
  return provider_config_from_json(read_json_file(path), path.parent_path());
}

inline ProviderConfig local_config(std::filesystem::path path) {
  ProviderConfig cfg;
  cfg.kind = ProviderConfig::Kind::local;
  cfg.path = std::move(path);
  return cfg;
}

inline CatalogFile load_catalog(const ProviderConfig& source) {
  source.validate();
  if (source.kind != ProviderConfig::Kind::local)
    throw Error(ErrorCode::invalid_config, "only local providers expose a whole catalog");
  return load_catalog(source.path);
}

// --- reference keys --------------------------------------------------------

/// Catalog id named by a product URL: the segment after "/dp/", or else the
/// last non-empty path segment. Plain ids are returned unchanged.
inline std::string extract_product_id(std::string_view key) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  key = trim(key);
  if (key.empty()) throw Error(ErrorCode::malformed_key, "reference key is empty");

  const bool is_url = key.find("://") != std::string_view::npos || key.find('/') != std::string_view::npos;
  if (!is_url) return std::string(key);

  std::string_view path = key;
  if (auto scheme = path.find("://"); scheme != std::string_view::npos) {
    path.remove_prefix(scheme + 3);
    auto slash = path.find('/');
    path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
  }
  if (auto q = path.find_first_of("?#"); q != std::string_view::npos) path = path.substr(0, q);

  std::vector<std::string_view> segments;
  while (!path.empty()) {
    auto slash = path.find('/');
    auto seg = path.substr(0, slash);
    if (!seg.empty()) segments.push_back(seg);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }

  std::set<std::string_view> dp_ids;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i)
    if (segments[i] == "dp") dp_ids.insert(segments[i + 1]);
  if (dp_ids.size() > 1)
    throw Error(ErrorCode::ambiguous_url, "URL names more than one product: " + std::string(key),
                std::vector<std::string>(dp_ids.begin(), dp_ids.end()));
  if (dp_ids.size() == 1) return std::string(*dp_ids.begin());
  if (segments.empty()) throw Error(ErrorCode::malformed_key, "URL has no product path segment: " + std::string(key));
  return std::string(segments.back());
}

// --- providers -------------------------------------------------------------

/// Source of reference products, related products and video statistics.
/// Implementations are safe for concurrent use.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual Product find_reference(std::string_view key) const = 0;
  virtual std::vector<Product> related_products(const Product& reference, int limit) const = 0;
  /// Empty when no video is known; failures to reach the source throw.
  virtual std::optional<VideoStats> video_stats(const Product& product) const = 0;
};

inline void check_limit(int limit) {
  if (limit < 1 || limit > kMaxRelated)
    throw Error(ErrorCode::domain, "related-product limit must be in [1, 30], got " + std::to_string(limit));
}

class LocalProvider final : public Provider {
 public:
  explicit LocalProvider(CatalogFile catalog) : catalog_(std::move(catalog)) { validate(catalog_); }

  const CatalogFile& catalog() const noexcept { return catalog_; }

  Product find_reference(std::string_view key) const override {
    const auto id = extract_product_id(key);
    if (const auto* p = catalog_.find(id)) return *p;
    throw Error(ErrorCode::not_found, "no product with id '" + id + "'", {id});
  }

  /// Same-category products in id order, reference excluded.
  std::vector<Product> related_products(const Product& reference, int limit) const override {
    check_limit(limit);
    auto cat = catalog_.categories.find(reference.id);
    if (cat == catalog_.categories.end())
      throw Error(ErrorCode::not_found, "reference '" + reference.id + "' is not in the catalog", {reference.id});
    std::vector<Product> out;
    for (const auto& p : catalog_.products) {
      if (p.id == reference.id) continue;
      auto it = catalog_.categories.find(p.id);
      if (it != catalog_.categories.end() && it->second == cat->second) out.push_back(p);
    }
    if (out.empty())
      throw Error(ErrorCode::empty_category, "category '" + cat->second + "' has no products besides the reference",
                  {cat->second});
    std::sort(out.begin(), out.end(), [](const Product& a, const Product& b) { return a.id < b.id; });
    if (out.size() > static_cast<std::size_t>(limit)) out.resize(static_cast<std::size_t>(limit));
    return out;
  }

  std::optional<VideoStats> video_stats(const Product& product) const override {
    if (const auto* p = catalog_.find(product.id); p && p->video) return p->video;
    return product.video;
  }

 private:
  CatalogFile catalog_;
};

}  // namespace mcdm::catalog
