#pragma once

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "mcdm/ahp.hpp"
#include "mcdm/catalog.hpp"
#include "mcdm/experiment.hpp"
#include "mcdm/matrix_file.hpp"
#include "mcdm/pipeline.hpp"
#include "mcdm/remote_provider.hpp"
#include "mcdm/service.hpp"

namespace mcdm::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Process exit codes. Nothing else is ever returned.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInconsistent = 2,
  kNoCandidates = 3,
  kUsage = 64,
};

struct ScoringFlags {
  std::string config_file;
  std::optional<double> rating_max;
  std::optional<std::uint64_t> nr_threshold;
  std::optional<std::uint64_t> nvr_threshold;
  std::optional<std::uint64_t> nvp_threshold;
  std::optional<int> top_n;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_file, "JSON file with scoring thresholds")->check(CLI::ExistingFile);
    app.add_option("--top", top_n, "Number of results to keep (1-30)");
    app.add_option("--rating-max", rating_max, "Upper end of the rating scale");
    app.add_option("--nr-threshold", nr_threshold, "Review count that scores 100");
    app.add_option("--nvr-threshold", nvr_threshold, "Video review count that scores 100");
    app.add_option("--nvp-threshold", nvp_threshold, "Video play count that scores 100");
  }

  /// Defaults, then the config file, then explicit flags.
  ScoringConfig resolve() const {
    ScoringConfig c;
    if (!config_file.empty()) {
      const auto doc = catalog::read_json_file(config_file);
      c.rating_max = doc.value("rating_max", c.rating_max);
      c.nr_threshold = doc.value("nr_threshold", c.nr_threshold);
      c.nvr_threshold = doc.value("nvr_threshold", c.nvr_threshold);
      c.nvp_threshold = doc.value("nvp_threshold", c.nvp_threshold);
      c.top_n = doc.value("top_n", c.top_n);
      if (doc.contains("price_percentiles")) {
        c.lower_percentile = doc["price_percentiles"].at(0).get<double>();
        c.upper_percentile = doc["price_percentiles"].at(1).get<double>();
      }
    }
    if (rating_max) c.rating_max = *rating_max;
    if (nr_threshold) c.nr_threshold = *nr_threshold;
    if (nvr_threshold) c.nvr_threshold = *nvr_threshold;
    if (nvp_threshold) c.nvp_threshold = *nvp_threshold;
    if (top_n) c.top_n = *top_n;
    c.validate();
    return c;
  }
};

inline nlohmann::json envelope(const nlohmann::json& effective_config, nlohmann::json results) {
  return {{"schema_version", kSchemaVersion},
          {"tool_version", kToolVersion},
          {"effective_config", effective_config},
          {"results", std::move(results)}};
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline void print_priorities(std::ostream& out, const ahp::Priorities& p) {
  out << "criterion  weight\n";
  for (std::size_t i = 0; i < p.weights.size(); ++i)
    out << std::left << std::setw(10) << p.weights.labels[i] << ' ' << fixed(p.weights.weights[i], 4) << '\n';
  const auto& c = p.consistency;
  out << "lambda_max " << fixed(c.lambda_max, 4) << "\nCI         " << fixed(c.ci, 4) << "\nRI         "
      << fixed(c.ri, 2) << "\nCR         " << fixed(c.cr, 4) << "\n"
      << (c.acceptable ? "consistency acceptable (CR <= 0.1)\n" : "consistency NOT acceptable (CR > 0.1): revise the judgments\n");
}

inline void print_ranking(std::ostream& out, const RankedResult& r) {
  out << "reference " << r.reference.id << ": " << r.reference.title << "  (method " << to_string(r.method) << ")\n";
  out << std::left << std::setw(5) << "rank" << std::setw(10) << "id" << std::right << std::setw(8) << "score"
      << std::setw(8) << "SI" << std::setw(8) << "NR" << std::setw(8) << "RA" << std::setw(8) << "NVR"
      << std::setw(8) << "NVP" << "  title\n";
  for (const auto& sp : r.results) {
    out << std::left << std::setw(5) << sp.rank << std::setw(10) << sp.product.id << std::right << std::setw(8)
        << fixed(sp.comprehensive, 2);
    for (auto c : kCriteria) out << std::setw(8) << fixed(sp.scores[c], 2);
    out << "  " << sp.product.title << '\n';
  }
}

inline std::unique_ptr<catalog::Provider> open_provider(const std::string& catalog_path, const std::string& provider_path) {
  if (!provider_path.empty()) return catalog::make_provider(catalog::load_provider_config(provider_path));
  return std::make_unique<catalog::LocalProvider>(catalog::load_catalog(std::filesystem::path(catalog_path)));
}

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::no_candidates:
    case ErrorCode::empty_category: return kNoCandidates;
    default: return kFailure;
  }
}

namespace detail {
inline std::atomic<httplib::Server*> active_server{nullptr};
inline void stop_server(int) {
  if (auto* s = active_server.load()) s->stop();
}
}  // namespace detail

/// Entry point shared by the mcdm binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-criteria product ranking: AHP weights, TF-IDF similarity, explained top-n results"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // ahp
  auto* ahp_cmd = app.add_subcommand("ahp", "Derive criterion weights from a pairwise comparison matrix");
  std::string matrix_path;
  bool json = false;
  ahp_cmd->add_option("--matrix", matrix_path, "Matrix JSON file")->required();
  ahp_cmd->add_flag("--json", json, "Emit JSON");

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Rank a reference product's related products");
  std::string catalog_path;
  std::string provider_path;
  std::string reference;
  std::string method_name;
  ScoringFlags rank_flags;
  auto* rank_catalog = rank_cmd->add_option("--catalog", catalog_path, "Catalog JSON file");
  auto* rank_provider = rank_cmd->add_option("--provider", provider_path, "Provider config JSON file");
  rank_catalog->excludes(rank_provider);
  rank_cmd->add_option("--reference", reference, "Reference product id or URL")->required();
  rank_cmd->add_option("--matrix", matrix_path, "Matrix JSON file (ahp method)");
  rank_cmd->add_option("--method", method_name, "ahp (default), equal or similarity");
  rank_cmd->add_flag("--json", json, "Emit JSON");
  rank_flags.add_to(*rank_cmd);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Compare the similarity-only, equal-weight and AHP generators");
  std::string references_path;
  ScoringFlags exp_flags;
  exp_cmd->add_option("--catalog", catalog_path, "Catalog JSON file")->required();
  exp_cmd->add_option("--references", references_path, "References JSON file")->required();
  exp_cmd->add_option("--matrix", matrix_path, "Matrix JSON file")->required();
  exp_cmd->add_flag("--json", json, "Emit JSON");
  exp_flags.add_to(*exp_cmd);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP JSON service");
  std::string bind = "127.0.0.1";
  int port = 8080;
  long long ttl_seconds = 3600;
  std::string cors_origin = "*";
  std::string snapshot;
  ScoringFlags serve_flags;
  auto* serve_catalog = serve_cmd->add_option("--catalog", catalog_path, "Catalog JSON file")->envname("MCDM_CATALOG");
  auto* serve_provider =
      serve_cmd->add_option("--provider", provider_path, "Provider config JSON file")->envname("MCDM_PROVIDER");
  serve_catalog->excludes(serve_provider);
  serve_cmd->add_option("--bind", bind, "Bind address")->envname("MCDM_BIND");
  serve_cmd->add_option("--port", port, "Port")->envname("MCDM_PORT");
  serve_cmd->add_option("--session-ttl", ttl_seconds, "Idle session lifetime in seconds")->envname("MCDM_SESSION_TTL");
  serve_cmd->add_option("--cors-origin", cors_origin, "Allowed CORS origin")->envname("MCDM_CORS_ORIGIN");
  serve_cmd->add_option("--snapshot", snapshot, "File-backed session snapshot")->envname("MCDM_SNAPSHOT");
  serve_flags.add_to(*serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (ahp_cmd->parsed()) {
      const auto priorities = ahp::derive_weights(ahp::load_matrix_file(matrix_path));
      if (json)
        out << envelope(nlohmann::json::object(), ahp::to_json(priorities)).dump(2) << '\n';
      else
        print_priorities(out, priorities);
      return priorities.consistency.acceptable ? kOk : kInconsistent;
    }

    if (rank_cmd->parsed()) {
      Method method = Method::ahp;
      if (!method_name.empty()) {
        auto m = parse_method(method_name);
        if (!m) {
          err << "error: --method must be one of ahp, equal, similarity\n";
          return kUsage;
        }
        method = *m;
      }
      if (method == Method::ahp && matrix_path.empty()) {
        err << "error: the ahp method needs --matrix FILE (or pass --method equal|similarity)\n";
        return kUsage;
      }
      if (method != Method::ahp && !matrix_path.empty()) {
        err << "error: --matrix only applies to the ahp method\n";
        return kUsage;
      }
      if (catalog_path.empty() && provider_path.empty()) {
        err << "error: one of --catalog or --provider is required\n";
        return kUsage;
      }
      const auto config = rank_flags.resolve();
      const auto provider = open_provider(catalog_path, provider_path);
      std::optional<ahp::PairwiseMatrix> matrix;
      if (method == Method::ahp) matrix = ahp::load_matrix_file(matrix_path);
      const auto ref = provider->find_reference(reference);
      const auto result = run_search(*provider, ref, method, matrix ? &*matrix : nullptr, config);
      if (json)
        out << envelope(to_json(config), to_json(result)).dump(2) << '\n';
      else
        print_ranking(out, result);
      return kOk;
    }

    if (exp_cmd->parsed()) {
      const auto config = exp_flags.resolve();
      const catalog::LocalProvider provider(catalog::load_catalog(std::filesystem::path(catalog_path)));
      const auto matrix = ahp::load_matrix_file(matrix_path);
      const auto refs = experiment::references_from_json(catalog::read_json_file(references_path));
      std::vector<experiment::DomainResult> domains;
      for (const auto& spec : refs) domains.push_back(experiment::run_domain(provider, spec, matrix, config));

      if (json) {
        nlohmann::json results = nlohmann::json::array();
        for (const auto& d : domains) results.push_back(experiment::to_json(d));
        out << envelope(to_json(config), std::move(results)).dump(2) << '\n';
      } else {
        for (const auto& d : domains) {
          out << "[" << d.domain << "] reference " << d.reference.id << ": " << d.reference.title << '\n';
          for (auto m : kMethods) {
            out << "  " << std::left << std::setw(16) << to_string(m);
            for (const auto& id : d.ordering(m)) out << ' ' << id;
            out << '\n';
          }
          for (const auto& [methods, tau] : d.taus)
            out << "  tau(" << to_string(methods.first) << ", " << to_string(methods.second)
                << ") = " << fixed(tau.distance, 4) << "  over " << tau.common << " shared ids\n";
        }
      }
      return kOk;
    }

    if (serve_cmd->parsed()) {
      if (catalog_path.empty() && provider_path.empty()) {
        err << "error: one of --catalog or --provider is required\n";
        return kUsage;
      }
      service::ServiceOptions options;
      options.scoring = serve_flags.resolve();
      options.session_ttl = std::chrono::seconds(ttl_seconds);
      options.cors_origin = cors_origin;
      if (!snapshot.empty()) options.snapshot_path = snapshot;
      std::shared_ptr<const catalog::Provider> provider = open_provider(catalog_path, provider_path);
      service::Service svc(provider, options);
      httplib::Server server;
      svc.mount(server);
      detail::active_server = &server;
      std::signal(SIGINT, detail::stop_server);
      std::signal(SIGTERM, detail::stop_server);
      err << "listening on http://" << bind << ':' << port << "/v1\n";
      const bool ok = server.listen(bind, port);
      detail::active_server = nullptr;
      if (!ok) {
        err << "error: cannot listen on " << bind << ':' << port << '\n';
        return kFailure;
      }
      return kOk;
    }
  } catch (const ahp::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) err << "  " << ahp::to_string(v.kind) << ": " << v.message << '\n';
    return kFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace mcdm::cli
