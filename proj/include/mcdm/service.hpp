#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mcdm/ahp.hpp"
#include "mcdm/catalog.hpp"
#include "mcdm/matrix_file.hpp"
#include "mcdm/pipeline.hpp"

namespace mcdm::service {

using Clock = std::chrono::system_clock;

struct ServiceOptions {
  ScoringConfig scoring;
  std::chrono::seconds session_ttl{3600};
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> snapshot_path;
};

struct Session {
  std::string id;
  Clock::time_point created_at;
  std::optional<ahp::PairwiseMatrix> matrix;
  std::optional<ahp::Priorities> priorities;  // weights + consistency
  std::optional<Product> reference;
  std::optional<nlohmann::json> last_result;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::missing_matrix:
    case ErrorCode::missing_reference: return 409;
    case ErrorCode::provider_unavailable: return 502;
    case ErrorCode::invalid_config: return 500;
    default: return 422;
  }
}

inline Response error_response(int status, std::string_view code, const std::string& message,
                               nlohmann::json details = nlohmann::json::array()) {
  return {status, {{"error", {{"code", code}, {"message", message}, {"details", std::move(details)}}}}};
}

inline Response error_response(const Error& e) {
  return error_response(http_status(e.code()), to_string(e.code()), e.what(), e.details());
}

namespace detail {

inline std::string new_session_id() {
  static thread_local std::random_device rd;
  static constexpr char hex[] = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 4; ++i) {
    auto word = rd();
    for (int k = 0; k < 8; ++k) {
      id.push_back(hex[word & 0xF]);
      word >>= 4;
    }
  }
  return id;
}

inline long long to_epoch(Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::seconds>(t.time_since_epoch()).count();
}

inline Clock::time_point from_epoch(long long s) { return Clock::time_point(std::chrono::seconds(s)); }

inline std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  while (!path.empty()) {
    auto slash = path.find('/');
    auto seg = path.substr(0, slash);
    if (!seg.empty()) parts.push_back(seg);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

}  // namespace detail

/// Session JSON, as returned by GET /v1/sessions/{id} and written to snapshots.
inline nlohmann::json to_json(const Session& s) {
  return {{"id", s.id},
          {"created_at", detail::to_epoch(s.created_at)},
          {"matrix", s.matrix ? ahp::to_json(*s.matrix) : nlohmann::json(nullptr)},
          {"weights", s.priorities ? ahp::to_json(s.priorities->weights) : nlohmann::json(nullptr)},
          {"consistency", s.priorities ? ahp::to_json(s.priorities->consistency) : nlohmann::json(nullptr)},
          {"reference", s.reference ? catalog::to_json(*s.reference) : nlohmann::json(nullptr)},
          {"last_result", s.last_result ? *s.last_result : nlohmann::json(nullptr)}};
}

/**
 * Sessions live in memory and expire after `ttl` without access. Every
 * session has its own mutex so state transitions on one session are
 * serialized while different sessions proceed in parallel.
 */
class SessionStore {
 public:
  struct Slot {
    std::mutex mutex;
    Session session;
    Clock::time_point last_access;
  };

  explicit SessionStore(std::chrono::seconds ttl) : ttl_(ttl) {}

  std::shared_ptr<Slot> create() {
    auto slot = std::make_shared<Slot>();
    slot->session.created_at = Clock::now();
    slot->last_access = slot->session.created_at;
    std::lock_guard lock(mutex_);
    purge_locked();
    do {
      slot->session.id = detail::new_session_id();
    } while (slots_.contains(slot->session.id));
    slots_.emplace(slot->session.id, slot);
    return slot;
  }

  std::shared_ptr<Slot> find(const std::string& id) {
    std::lock_guard lock(mutex_);
    purge_locked();
    auto it = slots_.find(id);
    if (it == slots_.end()) return nullptr;
    it->second->last_access = Clock::now();
    return it->second;
  }

  void insert(Session session, Clock::time_point last_access) {
    auto slot = std::make_shared<Slot>();
    slot->last_access = last_access;
    const auto id = session.id;
    slot->session = std::move(session);
    std::lock_guard lock(mutex_);
    slots_[id] = std::move(slot);
  }

  std::vector<std::shared_ptr<Slot>> all() {
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<Slot>> out;
    for (const auto& [_, slot] : slots_) out.push_back(slot);
    return out;
  }

  std::size_t size() {
    std::lock_guard lock(mutex_);
    purge_locked();
    return slots_.size();
  }

 private:
  void purge_locked() {
    const auto now = Clock::now();
    std::erase_if(slots_, [&](const auto& kv) { return kv.second->last_access + ttl_ < now; });
  }

  std::chrono::seconds ttl_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
};

/**
 * JSON API behind the web UI. handle() is the transport-independent core;
 * mount() wires it into an httplib server under the /v1 prefix.
 */
class Service {
 public:
  Service(std::shared_ptr<const catalog::Provider> provider, ServiceOptions options)
      : provider_(std::move(provider)), options_(std::move(options)), sessions_(options_.session_ttl) {
    options_.scoring.validate();
    load_snapshot();
  }

  const ServiceOptions& options() const noexcept { return options_; }
  SessionStore& sessions() noexcept { return sessions_; }

  Response handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return route(method, path, body);
    } catch (const Error& e) {
      return error_response(e);
    } catch (const std::exception& e) {
      return error_response(500, "internal", e.what());
    }
  }

  void mount(httplib::Server& server) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      add_cors(res);
      if (req.method == "OPTIONS") {
        res.status = 204;
        return;
      }
      auto out = handle(req.method, req.path, req.body);
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json; charset=utf-8");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);
    server.Options(".*", handler);
  }

  // --- endpoints ----------------------------------------------------------

  Response create_session() {
    auto slot = sessions_.create();
    nlohmann::json body;
    {
      std::lock_guard lock(slot->mutex);
      body = to_json(slot->session);
    }
    save_snapshot();
    return {201, body};
  }

  Response get_session(const std::string& id) {
    auto slot = require_session(id);
    std::lock_guard lock(slot->mutex);
    return {200, to_json(slot->session)};
  }

  /// Stores the judgments and answers with weights and consistency. An
  /// inconsistent matrix is accepted; the response then carries an advisory.
  Response submit_comparisons(const std::string& id, const nlohmann::json& payload) {
    auto slot = require_session(id);
    auto matrix = ahp::matrix_from_json(payload);
    check_criteria(matrix);
    auto validation = ahp::validate_matrix(matrix);
    if (!validation.ok()) {
      nlohmann::json details = nlohmann::json::array();
      for (const auto& v : validation.violations) details.push_back(ahp::to_json(v));
      return error_response(422, "validation", "pairwise matrix is invalid", std::move(details));
    }
    auto priorities = ahp::derive_weights(matrix);

    nlohmann::json body = ahp::to_json(priorities);
    body["ri"] = priorities.consistency.ri;
    if (!priorities.consistency.acceptable)
      body["advisory"] = "consistency ratio exceeds 0.1; revise the pairwise judgments";
    {
      std::lock_guard lock(slot->mutex);
      slot->session.matrix = std::move(matrix);
      slot->session.priorities = std::move(priorities);
      slot->session.last_result.reset();
    }
    save_snapshot();
    return {200, std::move(body)};
  }

  Response set_reference(const std::string& id, const nlohmann::json& payload) {
    auto slot = require_session(id);
    if (!payload.is_object() || !payload.contains("key") || !payload["key"].is_string())
      throw Error(ErrorCode::malformed_key, "request body must be {\"key\": \"<product id or URL>\"}");
    auto product = provider_->find_reference(payload["key"].get<std::string>());
    auto body = reference_summary(product);
    {
      std::lock_guard lock(slot->mutex);
      slot->session.reference = std::move(product);
      slot->session.last_result.reset();
    }
    save_snapshot();
    return {200, std::move(body)};
  }

  /// Body: {"method": "ahp" | "equal_weights" | "similarity_only", "top_n": N}.
  Response generate_ranking(const std::string& id, const nlohmann::json& payload) {
    auto slot = require_session(id);
    Method method = Method::ahp;
    ScoringConfig config = options_.scoring;
    if (payload.is_object()) {
      if (payload.contains("method")) {
        if (!payload["method"].is_string()) throw Error(ErrorCode::parse, "method must be a string");
        auto m = parse_method(payload["method"].get<std::string>());
        if (!m) throw Error(ErrorCode::parse, "unknown method '" + payload["method"].get<std::string>() + "'");
        method = *m;
      }
      if (payload.contains("top_n")) {
        if (!payload["top_n"].is_number_integer()) throw Error(ErrorCode::parse, "top_n must be an integer");
        config.top_n = payload["top_n"].get<int>();
        if (config.top_n < 1 || config.top_n > 30) throw Error(ErrorCode::domain, "top_n must be in [1, 30]");
      }
    } else if (!payload.is_null()) {
      throw Error(ErrorCode::parse, "request body must be a JSON object");
    }

    nlohmann::json result;
    {
      std::lock_guard lock(slot->mutex);
      auto& s = slot->session;
      if (!s.reference) throw Error(ErrorCode::missing_reference, "set a reference product before ranking");
      MethodWeights weights;
      if (method == Method::ahp) {
        if (!s.priorities)
          throw Error(ErrorCode::missing_matrix, "submit pairwise comparisons before ranking with ahp");
        weights = {s.priorities->weights, s.priorities->consistency};
      } else {
        weights = method_weights(method, nullptr);
      }
      result = to_json(run_search(*provider_, *s.reference, method, weights, config));
      s.last_result = result;
    }
    save_snapshot();
    return {200, std::move(result)};
  }

  Response get_product(const std::string& id) {
    auto product = provider_->find_reference(id);
    return {200, catalog::to_json(product)};
  }

  void save_snapshot() {
    if (!options_.snapshot_path) return;
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& slot : sessions_.all()) {
      std::lock_guard lock(slot->mutex);
      auto entry = to_json(slot->session);
      entry["last_access"] = detail::to_epoch(slot->last_access);
      doc.push_back(std::move(entry));
    }
    std::lock_guard lock(snapshot_mutex_);
    const auto tmp = options_.snapshot_path->string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << nlohmann::json{{"sessions", doc}}.dump();
    }
    std::filesystem::rename(tmp, *options_.snapshot_path);
  }

 private:
  Response route(std::string_view method, std::string_view path, std::string_view raw_body) {
    const auto parts = detail::split_path(path);
    if (method == "GET" && parts.size() == 1 && parts[0] == "healthz") return {200, {{"status", "ok"}}};
    if (parts.empty() || parts[0] != "v1") return error_response(404, "not_found", "no route for " + std::string(path));

    nlohmann::json body;
    if (!raw_body.empty()) {
      try {
        body = nlohmann::json::parse(raw_body);
      } catch (const nlohmann::json::parse_error& e) {
        return error_response(400, "bad_request", std::string("request body is not valid JSON: ") + e.what());
      }
    }

    if (parts.size() == 3 && parts[1] == "products" && method == "GET") return get_product(std::string(parts[2]));
    if (parts.size() >= 2 && parts[1] == "sessions") {
      if (parts.size() == 2 && method == "POST") return create_session();
      if (parts.size() >= 3) {
        const std::string id(parts[2]);
        if (parts.size() == 3 && method == "GET") return get_session(id);
        if (parts.size() == 4 && parts[3] == "comparisons" && method == "PUT") return submit_comparisons(id, body);
        if (parts.size() == 4 && parts[3] == "reference" && method == "POST") return set_reference(id, body);
        if (parts.size() == 4 && parts[3] == "rank" && method == "POST") return generate_ranking(id, body);
      }
    }
    return error_response(404, "not_found", "no route for " + std::string(method) + " " + std::string(path));
  }

  std::shared_ptr<SessionStore::Slot> require_session(const std::string& id) {
    auto slot = sessions_.find(id);
    if (!slot) throw Error(ErrorCode::not_found, "unknown session '" + id + "'", {id});
    return slot;
  }

  static void check_criteria(const ahp::PairwiseMatrix& m) {
    std::vector<std::string> expected(kCriterionLabels.begin(), kCriterionLabels.end());
    auto got = m.labels;
    std::sort(expected.begin(), expected.end());
    std::sort(got.begin(), got.end());
    if (got != expected)
      throw Error(ErrorCode::criteria_mismatch, "comparisons must cover exactly the criteria SI, NR, RA, NVR, NVP",
                  m.labels);
  }

  void add_cors(httplib::Response& res) const {
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  }

  void load_snapshot() {
    if (!options_.snapshot_path || !std::filesystem::exists(*options_.snapshot_path)) return;
    const auto doc = catalog::read_json_file(*options_.snapshot_path);
    for (const auto& entry : doc.value("sessions", nlohmann::json::array())) {
      Session s;
      s.id = entry.at("id").get<std::string>();
      s.created_at = detail::from_epoch(entry.at("created_at").get<long long>());
      if (!entry["matrix"].is_null()) {
        s.matrix = ahp::matrix_from_json(entry["matrix"]);
        s.priorities = ahp::derive_weights(*s.matrix);
      }
      if (!entry["reference"].is_null()) s.reference = catalog::product_from_json(entry["reference"], "reference");
      if (!entry["last_result"].is_null()) s.last_result = entry["last_result"];
      sessions_.insert(std::move(s), detail::from_epoch(entry.value("last_access", entry["created_at"].get<long long>())));
    }
  }

  std::shared_ptr<const catalog::Provider> provider_;
  ServiceOptions options_;
  SessionStore sessions_;
  std::mutex snapshot_mutex_;
};

}  // namespace mcdm::service
