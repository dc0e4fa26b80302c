#pragma once

// In-process HTTP stub standing in for a marketplace / video API. Serves a
// catalog fixture in a foreign response shape (string prices, nested video
// statistics) so that the remote adapter's field mapping is exercised.

#include <atomic>
#include <chrono>
#include <map>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mcdm/catalog.hpp"

namespace stub {

inline constexpr const char* kApiKey = "stub-secret";

class StubRemote {
 public:
  explicit StubRemote(mcdm::catalog::CatalogFile catalog) : catalog_(std::move(catalog)) {
    server_.Get("/products/(.*)", [this](const httplib::Request& req, httplib::Response& res) {
      if (!admit(req, res)) return;
      const auto* p = catalog_.find(req.matches[1].str());
      if (!p) {
        res.status = 404;
        res.set_content(R"({"message":"no such product"})", "application/json");
        return;
      }
      res.set_content(product(*p).dump(), "application/json");
    });
    server_.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      if (!admit(req, res)) return;
      const auto category = req.get_param_value("category");
      const auto limit = std::stoi(req.get_param_value("limit"));
      nlohmann::json results = nlohmann::json::array();
      for (const auto& p : catalog_.products)
        if (catalog_.categories.at(p.id) == category && static_cast<int>(results.size()) < limit + 1)
          results.push_back(product(p));
      res.set_content(nlohmann::json{{"results", results}}.dump(), "application/json");
    });
    server_.Get("/videos", [this](const httplib::Request& req, httplib::Response& res) {
      if (!admit(req, res)) return;
      const auto q = req.get_param_value("q");
      nlohmann::json items = nlohmann::json::array();
      if (q == "plays test") {
        for (int plays : {120, 990, 455})
          items.push_back({{"videoId", "v" + std::to_string(plays)},
                           {"statistics", {{"viewCount", std::to_string(plays)}, {"commentCount", "3"}}},
                           {"url", "https://video.example.com/" + std::to_string(plays)}});
      } else {
        for (const auto& p : catalog_.products) {
          if (p.title != q || !p.video) continue;
          // Decoy with fewer plays first, then the representative video.
          items.push_back({{"videoId", p.id + "-b"},
                           {"statistics", {{"viewCount", std::to_string(p.video->video_play_count / 2)},
                                           {"commentCount", "1"}}},
                           {"url", "https://video.example.com/decoy"}});
          items.push_back({{"videoId", p.id + "-a"},
                           {"statistics", {{"viewCount", std::to_string(p.video->video_play_count)},
                                           {"commentCount", std::to_string(p.video->video_review_count)}}},
                           {"url", p.video->video_url ? *p.video->video_url : ""}});
        }
      }
      res.set_content(nlohmann::json{{"items", items}}.dump(), "application/json");
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubRemote() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  StubRemote(const StubRemote&) = delete;
  StubRemote& operator=(const StubRemote&) = delete;

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }
  void set_failing(bool failing) { failing_ = failing; }

 private:
  bool admit(const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    if (failing_) {
      res.status = 503;
      return false;
    }
    if (req.get_header_value("X-Api-Key") != kApiKey) {
      res.status = 401;
      res.set_content(R"({"message":"bad key"})", "application/json");
      return false;
    }
    return true;
  }

  nlohmann::json product(const mcdm::Product& p) const {
    char price[32];
    std::snprintf(price, sizeof price, "$%.2f", p.price);
    return {{"asin", p.id},
            {"product_title", p.title},
            {"price", price},
            {"stars", p.rating},
            {"reviews_total", p.review_count},
            {"category_path", catalog_.categories.at(p.id)},
            {"link", p.source_url ? nlohmann::json(*p.source_url) : nlohmann::json(nullptr)}};
  }

  mcdm::catalog::CatalogFile catalog_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
  std::atomic<bool> failing_{false};
};

}  // namespace stub
