#pragma once

#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "mcdm/catalog.hpp"

namespace mcdm::catalog {

namespace detail {

inline std::string percent_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

inline std::string expand_route(std::string route, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    const std::string token = "{" + name + "}";
    for (auto pos = route.find(token); pos != std::string::npos; pos = route.find(token, pos)) {
      const auto encoded = percent_encode(value);
      route.replace(pos, token.size(), encoded);
      pos += encoded.size();
    }
  }
  return route;
}

/// Resolves "${env:NAME}" references against the process environment.
inline std::string expand_header(const std::string& value) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto start = value.find("${env:", pos);
    if (start == std::string::npos) break;
    auto end = value.find('}', start);
    if (end == std::string::npos) throw Error(ErrorCode::invalid_config, "unterminated ${env:...} in header template");
    out.append(value, pos, start - pos);
    const auto name = value.substr(start + 6, end - start - 6);
    const char* env = std::getenv(name.c_str());
    if (env == nullptr) throw Error(ErrorCode::invalid_config, "environment variable " + name + " is not set", {name});
    out += env;
    pos = end + 1;
  }
  out.append(value, pos, std::string::npos);
  return out;
}

/// Looks up a dotted path ("data.price") in a JSON object.
inline const nlohmann::json* lookup(const nlohmann::json& obj, std::string_view path) {
  const nlohmann::json* cur = &obj;
  while (!path.empty()) {
    auto dot = path.find('.');
    const std::string part(path.substr(0, dot));
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &(*cur)[part];
    if (dot == std::string_view::npos) break;
    path.remove_prefix(dot + 1);
  }
  return cur;
}

/// Numbers sometimes arrive as strings ("1,234", "4.5 out of 5").
inline std::optional<double> as_number(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) return std::nullopt;
  std::string digits;
  for (char c : v.get<std::string>()) {
    if (c == ',' || c == '$') continue;
    if ((c >= '0' && c <= '9') || c == '.' || (c == '-' && digits.empty())) {
      digits.push_back(c);
    } else if (!digits.empty()) {
      break;
    }
  }
  if (digits.empty()) return std::nullopt;
  try {
    return std::stod(digits);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::string as_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

}  // namespace detail

/**
 * Generic HTTP/JSON adapter. Three routes stand in for product details,
 * product search and video search; response fields are translated through
 * the configured mapping. Responses are cached per (route, key) for
 * `cache_ttl`.
 */
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.kind != ProviderConfig::Kind::remote)
      throw Error(ErrorCode::invalid_config, "RemoteProvider needs a remote provider config");
  }

  Product find_reference(std::string_view key) const override {
    const auto id = extract_product_id(key);
    const auto body = fetch("details", id, {{"id", id}}, true);
    const nlohmann::json* obj = &body;
    if (auto it = config_.list_keys.find("details"); it != config_.list_keys.end() && !it->second.empty()) {
      obj = detail::lookup(body, it->second);
      if (obj == nullptr) throw Error(ErrorCode::provider_unavailable, "details response lacks '" + it->second + "'");
    }
    auto [product, category] = map_product(*obj);
    if (product.id.empty()) product.id = id;
    remember_category(product.id, category);
    return product;
  }

  std::vector<Product> related_products(const Product& reference, int limit) const override {
    check_limit(limit);
    auto category = known_category(reference.id);
    if (!category) {
      find_reference(reference.id);
      category = known_category(reference.id);
    }
    const std::string cat = category.value_or("");
    const auto body = fetch("search", cat + "|" + std::to_string(limit),
                            {{"category", cat}, {"limit", std::to_string(limit)}, {"id", reference.id}}, false);
    std::vector<Product> out;
    for (const auto& entry : list_of("search", body)) {
      auto [product, entry_category] = map_product(entry);
      if (product.id.empty() || product.id == reference.id) continue;
      remember_category(product.id, entry_category.empty() ? cat : entry_category);
      out.push_back(std::move(product));
      if (out.size() == static_cast<std::size_t>(limit)) break;
    }
    if (out.empty()) throw Error(ErrorCode::empty_category, "remote search returned no related products", {cat});
    return out;
  }

  /// Picks the entry with the most plays; ties go to the smallest video id,
  /// then to the earlier entry.
  std::optional<VideoStats> video_stats(const Product& product) const override {
    const auto body = fetch("videos", product.id + "|" + product.title, {{"title", product.title}, {"id", product.id}},
                            false);
    std::optional<VideoStats> best;
    std::string best_id;
    for (const auto& entry : list_of("videos", body)) {
      VideoStats v;
      std::string vid;
      for (const auto& [remote, field] : config_.video_mapping) {
        const auto* value = detail::lookup(entry, remote);
        if (value == nullptr) continue;
        if (field == "play_count") {
          v.video_play_count = static_cast<std::uint64_t>(std::max(0.0, detail::as_number(*value).value_or(0.0)));
        } else if (field == "review_count") {
          v.video_review_count = static_cast<std::uint64_t>(std::max(0.0, detail::as_number(*value).value_or(0.0)));
        } else if (field == "url") {
          if (!value->is_null()) v.video_url = detail::as_text(*value);
        } else if (field == "id") {
          vid = detail::as_text(*value);
        }
      }
      const bool better = !best || v.video_play_count > best->video_play_count ||
                          (v.video_play_count == best->video_play_count && !vid.empty() && !best_id.empty() &&
                           vid < best_id);
      if (better) {
        best = std::move(v);
        best_id = vid;
      }
    }
    return best;
  }

  void clear_cache() const {
    std::unique_lock lock(mutex_);
    cache_.clear();
  }

 private:
  using Clock = std::chrono::steady_clock;

  struct CacheEntry {
    Clock::time_point expires;
    nlohmann::json body;
  };

  nlohmann::json fetch(const std::string& route_name, const std::string& key,
                       const std::map<std::string, std::string>& values, bool not_found_is_error) const {
    const auto cache_key = route_name + "\n" + key;
    if (config_.cache_ttl.count() > 0) {
      std::shared_lock lock(mutex_);
      if (auto it = cache_.find(cache_key); it != cache_.end() && it->second.expires > Clock::now())
        return it->second.body;
    }

    httplib::Client client(config_.endpoint);
    const auto ms = config_.timeout.count();
    client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    httplib::Headers headers;
    for (const auto& [name, value] : config_.headers) headers.emplace(name, detail::expand_header(value));

    const auto path = detail::expand_route(config_.routes.at(route_name), values);
    auto res = client.Get(path, headers);
    if (!res)
      throw Error(ErrorCode::provider_unavailable,
                  "request to " + config_.endpoint + path + " failed: " + httplib::to_string(res.error()));
    if (res->status == 404 && not_found_is_error)
      throw Error(ErrorCode::not_found, "remote provider has no product '" + values.at("id") + "'", {values.at("id")});
    if (res->status < 200 || res->status >= 300)
      throw Error(ErrorCode::provider_unavailable,
                  "remote provider answered " + std::to_string(res->status) + " for " + path);
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::provider_unavailable, "remote provider sent invalid JSON: " + std::string(e.what()));
    }

    if (config_.cache_ttl.count() > 0) {
      std::unique_lock lock(mutex_);
      cache_[cache_key] = CacheEntry{Clock::now() + config_.cache_ttl, body};
    }
    return body;
  }

  nlohmann::json list_of(const std::string& route_name, const nlohmann::json& body) const {
    const nlohmann::json* list = &body;
    if (auto it = config_.list_keys.find(route_name); it != config_.list_keys.end() && !it->second.empty())
      list = detail::lookup(body, it->second);
    if (list == nullptr || list->is_null()) return nlohmann::json::array();
    if (!list->is_array())
      throw Error(ErrorCode::provider_unavailable, "remote " + route_name + " response is not a list");
    return *list;
  }

  std::pair<Product, std::string> map_product(const nlohmann::json& obj) const {
    Product p;
    std::string category;
    for (const auto& [remote, field] : config_.mapping) {
      const auto* value = detail::lookup(obj, remote);
      if (value == nullptr || value->is_null()) continue;
      if (field == "id") {
        p.id = detail::as_text(*value);
      } else if (field == "title") {
        p.title = detail::as_text(*value);
      } else if (field == "price") {
        p.price = std::max(0.0, detail::as_number(*value).value_or(0.0));
      } else if (field == "rating") {
        p.rating = std::max(0.0, detail::as_number(*value).value_or(0.0));
      } else if (field == "review_count") {
        p.review_count = static_cast<std::uint64_t>(std::max(0.0, detail::as_number(*value).value_or(0.0)));
      } else if (field == "source_url") {
        p.source_url = detail::as_text(*value);
      } else if (field == "category") {
        category = detail::as_text(*value);
      }
    }
    return {std::move(p), std::move(category)};
  }

  void remember_category(const std::string& id, const std::string& category) const {
    if (category.empty()) return;
    std::unique_lock lock(mutex_);
    categories_[id] = category;
  }

  std::optional<std::string> known_category(const std::string& id) const {
    std::shared_lock lock(mutex_);
    if (auto it = categories_.find(id); it != categories_.end()) return it->second;
    return std::nullopt;
  }

  ProviderConfig config_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, CacheEntry> cache_;
  mutable std::map<std::string, std::string> categories_;
};

inline std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.kind == ProviderConfig::Kind::local) return std::make_unique<LocalProvider>(load_catalog(config.path));
  return std::make_unique<RemoteProvider>(config);
}

}  // namespace mcdm::catalog
