#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <set>
#include <thread>

#include <unistd.h>

#include "mcdm/remote_provider.hpp"
#include "mcdm/service.hpp"
#include "support/fixtures.hpp"
#include "support/stub_remote.hpp"

using namespace mcdm;
using namespace mcdm::service;
using nlohmann::json;

namespace {

std::shared_ptr<const catalog::Provider> local_provider() {
  return std::make_shared<catalog::LocalProvider>(fixtures::catalog());
}

std::string sample_payload() { return fixtures::json("sample_judgments.json").dump(); }

std::string uniform_payload() { return fixtures::json("uniform_matrix.json").dump(); }

class ServiceTest : public ::testing::Test {
 protected:
  std::string new_session() {
    auto r = svc.handle("POST", "/v1/sessions", "");
    EXPECT_EQ(r.status, 201);
    return r.body["id"].get<std::string>();
  }

  Response put(const std::string& id, const std::string& body) {
    return svc.handle("PUT", "/v1/sessions/" + id + "/comparisons", body);
  }
  Response reference(const std::string& id, const std::string& key) {
    return svc.handle("POST", "/v1/sessions/" + id + "/reference", json{{"key", key}}.dump());
  }
  Response rank(const std::string& id, const json& body) {
    return svc.handle("POST", "/v1/sessions/" + id + "/rank", body.dump());
  }

  Service svc{local_provider(), ServiceOptions{}};
};

void expect_error(const Response& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body.dump();
  ASSERT_TRUE(r.body.contains("error")) << r.body.dump();
  EXPECT_EQ(r.body["error"]["code"], code);
  EXPECT_TRUE(r.body["error"]["message"].is_string());
  EXPECT_TRUE(r.body["error"]["details"].is_array());
}

std::vector<std::string> result_ids(const json& payload) {
  std::vector<std::string> out;
  for (const auto& r : payload["results"]) out.push_back(r["id"].get<std::string>());
  return out;
}

}  // namespace

TEST_F(ServiceTest, Health) {
  auto r = svc.handle("GET", "/healthz", "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
}

TEST_F(ServiceTest, SessionsAreDistinctAndRetrievable) {
  const auto a = new_session();
  const auto b = new_session();
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), 32u);
  auto got = svc.handle("GET", "/v1/sessions/" + a, "");
  EXPECT_EQ(got.status, 200);
  EXPECT_EQ(got.body["id"], a);
  EXPECT_TRUE(got.body["weights"].is_null());
  EXPECT_TRUE(got.body["reference"].is_null());
  expect_error(svc.handle("GET", "/v1/sessions/nope", ""), 404, "not_found");
}

TEST_F(ServiceTest, SampleComparisonsGiveExpectedWeights) {
  const auto id = new_session();
  auto r = put(id, sample_payload());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_NEAR(r.body["lambda_max"].get<double>(), 5.2372, 0.002);
  EXPECT_NEAR(r.body["cr"].get<double>(), 0.0529, 0.001);
  EXPECT_TRUE(r.body["acceptable"].get<bool>());
  EXPECT_FALSE(r.body.contains("advisory"));
  const char* labels[] = {"SI", "NR", "RA", "NVR", "NVP"};
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(r.body["weights"][labels[i]].get<double>(), fixtures::kExpectedWeights[i], 0.005);

  auto session = svc.handle("GET", "/v1/sessions/" + id, "");
  EXPECT_FALSE(session.body["weights"].is_null());
  EXPECT_FALSE(session.body["matrix"].is_null());
}

TEST_F(ServiceTest, UniformComparisons) {
  const auto id = new_session();
  auto r = put(id, uniform_payload());
  ASSERT_EQ(r.status, 200);
  for (const auto& [_, w] : r.body["weights"].items()) EXPECT_NEAR(w.get<double>(), 0.2, 1e-12);
  EXPECT_EQ(r.body["cr"].get<double>(), 0.0);
}

TEST_F(ServiceTest, InconsistentComparisonsAreAdvisory) {
  // Cyclic judgments over SI/NR/RA; NVR and NVP are neutral.
  json doc = {{"criteria", {"SI", "NR", "RA", "NVR", "NVP"}},
              {"matrix",
               {{1, 9, "1/9", 1, 1}, {"1/9", 1, 9, 1, 1}, {9, "1/9", 1, 1, 1}, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}}}};
  const auto id = new_session();
  auto r = put(id, doc.dump());
  EXPECT_EQ(r.status, 200);
  EXPECT_FALSE(r.body["acceptable"].get<bool>());
  EXPECT_GT(r.body["cr"].get<double>(), 0.1);
  EXPECT_TRUE(r.body["advisory"].is_string());
}

TEST_F(ServiceTest, WrongCriteriaSetIsRejected) {
  const auto id = new_session();
  expect_error(put(id, fixtures::json("cyclic_matrix.json").dump()), 422, "criteria_mismatch");
}

TEST_F(ServiceTest, InvalidMatrixListsViolations) {
  auto doc = fixtures::json("sample_judgments.json");
  doc["matrix"][3][0] = 5;  // (0,3) is 3
  doc["matrix"][2][2] = 2;
  const auto id = new_session();
  auto r = put(id, doc.dump());
  expect_error(r, 422, "validation");
  ASSERT_EQ(r.body["error"]["details"].size(), 2u);
  std::set<std::string> kinds;
  for (const auto& v : r.body["error"]["details"]) {
    kinds.insert(v["kind"].get<std::string>());
    EXPECT_TRUE(v.contains("row"));
    EXPECT_TRUE(v.contains("col"));
  }
  EXPECT_EQ(kinds, (std::set<std::string>{"diagonal", "reciprocity"}));
  EXPECT_TRUE(svc.handle("GET", "/v1/sessions/" + id, "").body["matrix"].is_null());
}

TEST_F(ServiceTest, MalformedBodies) {
  const auto id = new_session();
  expect_error(put(id, "{not json"), 400, "bad_request");
  expect_error(put(id, R"({"criteria": ["SI"]})"), 422, "parse");
  expect_error(svc.handle("POST", "/v1/sessions/" + id + "/reference", R"({"id": "B001"})"), 422, "malformed_key");
  expect_error(svc.handle("POST", "/v1/sessions/" + id + "/reference", R"({"key": "  "})"), 422, "malformed_key");
  expect_error(put("missing", sample_payload()), 404, "not_found");
  expect_error(svc.handle("DELETE", "/v1/sessions/" + id, ""), 404, "not_found");
  expect_error(svc.handle("GET", "/elsewhere", ""), 404, "not_found");
}

TEST_F(ServiceTest, ReferenceByIdOrUrl) {
  const auto id = new_session();
  auto by_id = reference(id, "B002");
  ASSERT_EQ(by_id.status, 200);
  EXPECT_EQ(by_id.body["id"], "B002");
  auto by_url = reference(id, "https://shop.example.com/google/dp/B002");
  EXPECT_EQ(by_url.body, by_id.body);
  expect_error(reference(id, "B999"), 404, "not_found");
}

TEST_F(ServiceTest, RankPrerequisites) {
  const auto id = new_session();
  expect_error(rank(id, {{"method", "equal_weights"}}), 409, "missing_reference");
  ASSERT_EQ(reference(id, "B001").status, 200);
  expect_error(rank(id, {{"method", "ahp"}}), 409, "missing_matrix");
  expect_error(rank(id, json::object()), 409, "missing_matrix");

  auto sim = rank(id, {{"method", "similarity_only"}});
  ASSERT_EQ(sim.status, 200) << sim.body.dump();
  EXPECT_EQ(sim.body["results"].size(), 10u);
  EXPECT_TRUE(sim.body["consistency"].is_null());

  expect_error(rank(id, {{"method", "best"}}), 422, "parse");
  expect_error(rank(id, {{"method", "equal_weights"}, {"top_n", 0}}), 422, "domain");
  expect_error(rank(id, {{"method", "equal_weights"}, {"top_n", 31}}), 422, "domain");
}

TEST_F(ServiceTest, AhpRankMatchesGoldenOrdering) {
  const auto golden = fixtures::json("golden_rank.json");
  const auto id = new_session();
  ASSERT_EQ(put(id, sample_payload()).status, 200);
  ASSERT_EQ(reference(id, "https://shop.example.com/google/dp/B001").status, 200);
  auto r = rank(id, {{"method", "ahp"}, {"top_n", 10}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(result_ids(r.body), golden["top10"].get<std::vector<std::string>>());
  double previous = 1e9;
  for (const auto& row : r.body["results"]) {
    const double c = row["comprehensive"].get<double>();
    EXPECT_LE(c, previous);
    previous = c;
    double sum = 0;
    for (const auto& [_, part] : row["contributions"].items()) sum += part.get<double>();
    EXPECT_NEAR(sum, c, 1e-9);
  }
  EXPECT_TRUE(r.body["consistency"]["acceptable"].get<bool>());
  EXPECT_EQ(svc.handle("GET", "/v1/sessions/" + id, "").body["last_result"], r.body);

  auto top3 = rank(id, {{"method", "ahp"}, {"top_n", 3}});
  EXPECT_EQ(top3.body["results"].size(), 3u);
}

TEST_F(ServiceTest, RepeatedRequestsAreByteIdentical) {
  const auto id = new_session();
  put(id, sample_payload());
  reference(id, "B001");
  const auto first = rank(id, {{"method", "ahp"}}).body.dump();
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rank(id, {{"method", "ahp"}}).body.dump(), first);

  const auto other = new_session();
  put(other, sample_payload());
  reference(other, "B001");
  EXPECT_EQ(rank(other, {{"method", "ahp"}}).body.dump(), first);
}

TEST_F(ServiceTest, NewComparisonsClearLastResult) {
  const auto id = new_session();
  put(id, sample_payload());
  reference(id, "B001");
  rank(id, {{"method", "ahp"}});
  put(id, uniform_payload());
  EXPECT_TRUE(svc.handle("GET", "/v1/sessions/" + id, "").body["last_result"].is_null());
}

TEST_F(ServiceTest, SessionsAreIsolatedUnderInterleaving) {
  const auto a = new_session();
  const auto b = new_session();
  put(a, sample_payload());
  reference(a, "B001");
  const auto a_state = svc.handle("GET", "/v1/sessions/" + a, "").body;

  // Hammer b (and a fresh session) from several threads while reading a.
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        put(b, (i + t) % 2 ? uniform_payload() : sample_payload());
        reference(b, (i % 2) ? "B026" : "B003");
        rank(b, {{"method", "equal_weights"}, {"top_n", 1 + i}});
        if (svc.handle("GET", "/v1/sessions/" + a, "").body != a_state) ++mismatches;
      }
    });
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
  EXPECT_EQ(svc.handle("GET", "/v1/sessions/" + a, "").body, a_state);

  auto rb = svc.handle("GET", "/v1/sessions/" + b, "").body;
  EXPECT_FALSE(rb["weights"].is_null());
}

TEST_F(ServiceTest, ProductsEndpoint) {
  auto r = svc.handle("GET", "/v1/products/B002", "");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["video"]["play_count"], 63850);
  expect_error(svc.handle("GET", "/v1/products/B999", ""), 404, "not_found");
}

TEST(ServiceSessions, ExpireAfterIdleTtl) {
  ServiceOptions opts;
  opts.session_ttl = std::chrono::seconds(1);
  Service svc(local_provider(), opts);
  const auto id = svc.handle("POST", "/v1/sessions", "").body["id"].get<std::string>();
  EXPECT_EQ(svc.handle("GET", "/v1/sessions/" + id, "").status, 200);
  std::this_thread::sleep_for(std::chrono::milliseconds(1100));
  EXPECT_EQ(svc.handle("GET", "/v1/sessions/" + id, "").status, 404);
  EXPECT_EQ(svc.sessions().size(), 0u);
}

TEST(ServiceSessions, SnapshotSurvivesRestart) {
  const auto path =
      std::filesystem::temp_directory_path() / ("mcdm_snapshot_" + std::to_string(::getpid()) + ".json");
  std::filesystem::remove(path);
  ServiceOptions opts;
  opts.snapshot_path = path;

  std::string id;
  json before;
  {
    Service svc(local_provider(), opts);
    id = svc.handle("POST", "/v1/sessions", "").body["id"].get<std::string>();
    svc.handle("PUT", "/v1/sessions/" + id + "/comparisons", sample_payload());
    svc.handle("POST", "/v1/sessions/" + id + "/reference", R"({"key":"B001"})");
    svc.handle("POST", "/v1/sessions/" + id + "/rank", R"({"method":"ahp"})");
    before = svc.handle("GET", "/v1/sessions/" + id, "").body;
  }
  ASSERT_TRUE(std::filesystem::exists(path));
  Service restarted(local_provider(), opts);
  EXPECT_EQ(restarted.handle("GET", "/v1/sessions/" + id, "").body, before);
  auto again = restarted.handle("POST", "/v1/sessions/" + id + "/rank", R"({"method":"ahp"})");
  EXPECT_EQ(again.body, before["last_result"]);
  std::filesystem::remove(path);
}

// --- over HTTP -------------------------------------------------------------------------

class HttpServiceTest : public ::testing::Test {
 protected:
  void start(std::shared_ptr<const catalog::Provider> provider) {
    ServiceOptions opts;
    opts.cors_origin = "http://ui.example";
    svc = std::make_unique<Service>(std::move(provider), opts);
    svc->mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  void TearDown() override {
    server.stop();
    if (thread.joinable()) thread.join();
  }

  static json body_of(const httplib::Result& r) { return json::parse(r->body); }

  std::unique_ptr<Service> svc;
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(HttpServiceTest, FullFlowWithCors) {
  start(local_provider());
  auto created = client->Post("/v1/sessions", "", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
  const auto id = body_of(created)["id"].get<std::string>();

  auto cmp = client->Put("/v1/sessions/" + id + "/comparisons", sample_payload(), "application/json");
  ASSERT_TRUE(cmp);
  EXPECT_EQ(cmp->status, 200);
  auto ref = client->Post("/v1/sessions/" + id + "/reference", R"({"key":"B001"})", "application/json");
  EXPECT_EQ(ref->status, 200);
  auto ranked = client->Post("/v1/sessions/" + id + "/rank", R"({"method":"ahp"})", "application/json");
  ASSERT_EQ(ranked->status, 200);
  EXPECT_EQ(result_ids(body_of(ranked)), fixtures::json("golden_rank.json")["top10"].get<std::vector<std::string>>());

  auto preflight = client->Options("/v1/sessions");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);
  EXPECT_NE(preflight->get_header_value("Access-Control-Allow-Methods").find("PUT"), std::string::npos);

  auto missing = client->Get("/v1/sessions/unknown");
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(body_of(missing)["error"]["code"], "not_found");
}

TEST_F(HttpServiceTest, RemoteProviderFlowAndFailure) {
  ::setenv("MCDM_STUB_API_KEY", stub::kApiKey, 1);
  stub::StubRemote remote(fixtures::catalog());
  auto config = catalog::load_provider_config(fixtures::path("remote_provider.json"));
  config.endpoint = remote.endpoint();
  start(catalog::make_provider(config));

  const auto t0 = std::chrono::steady_clock::now();
  const auto id = body_of(client->Post("/v1/sessions", "", "application/json"))["id"].get<std::string>();
  ASSERT_EQ(client->Put("/v1/sessions/" + id + "/comparisons", sample_payload(), "application/json")->status, 200);
  ASSERT_EQ(client->Post("/v1/sessions/" + id + "/reference", R"({"key":"B001"})", "application/json")->status, 200);
  auto ranked = client->Post("/v1/sessions/" + id + "/rank", R"({"method":"ahp"})", "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  ASSERT_EQ(ranked->status, 200) << ranked->body;
  EXPECT_EQ(result_ids(body_of(ranked)), fixtures::json("golden_rank.json")["top10"].get<std::vector<std::string>>());
  EXPECT_LT(elapsed, std::chrono::seconds(1));

  remote.set_failing(true);
  auto failed = client->Post("/v1/sessions/" + id + "/reference", R"({"key":"B007"})", "application/json");
  EXPECT_EQ(failed->status, 502);
  EXPECT_EQ(body_of(failed)["error"]["code"], "provider_unavailable");
}
