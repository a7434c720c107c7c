// Copyright 2026 The wpirsharp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "wpir/net.hpp"
#include "wpir/table.hpp"
#include "wpir/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerificationFailure = 2;
constexpr int kExitRuntimeError = 3;

std::vector<double> parse_gamma(const std::string& joined) {
  std::vector<double> weights;
  std::size_t start = 0;
  while (start <= joined.size()) {
    const auto stop = joined.find(';', start);
    const std::string item =
        joined.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    if (!item.empty()) weights.push_back(std::stod(item));
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return weights;
}

wpir::SystemParams build_params(int servers, int messages, const std::string& gamma) {
  std::vector<double> weights = gamma.empty() ? std::vector<double>{} : parse_gamma(gamma);
  if (!weights.empty() && !std::is_sorted(weights.begin(), weights.end())) {
    std::cerr << "note: trust weights re-sorted ascending (server 1 is most trusted)\n";
  }
  return wpir::SystemParams(servers, messages, std::move(weights));
}

std::vector<std::string> parse_endpoints(const std::string& joined) {
  std::vector<std::string> endpoints;
  std::size_t start = 0;
  while (start <= joined.size()) {
    const auto stop = joined.find(';', start);
    const std::string item =
        joined.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
    if (!item.empty()) endpoints.push_back(item);
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return endpoints;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw wpir::FormatError("cannot open " + path + " for writing");
  out << text;
}

int run_tradeoff(int servers, int messages, const std::string& gamma, int points,
                 const std::string& metric_name, const std::string& format,
                 const std::string& out_path) {
  const auto params = build_params(servers, messages, gamma);
  const auto metric = wpir::metric_from_name(metric_name);
  const auto grid = wpir::default_download_grid(params, points);
  const auto curve = wpir::tradeoff_curve(metric, params, grid);
  std::ostringstream os;
  if (format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& point : curve) rows.push_back(wpir::to_json(point));
    os << rows.dump(2) << "\n";
  } else {
    os << wpir::tradeoff_csv_header() << "\n";
    for (const auto& point : curve) os << wpir::csv_row(point) << "\n";
  }
  write_output(os.str(), out_path);
  return kExitOk;
}

int run_simulate(int servers, int messages, const std::string& gamma,
                 const std::string& alloc, std::uint64_t trials, std::uint64_t seed) {
  const auto params = build_params(servers, messages, gamma);
  const auto allocation = wpir::preset_allocation(alloc, params);
  wpir::validate(allocation);
  const auto store = wpir::MessageStore::random(params, seed ^ 0x5745ULL);
  wpir::SimReport merged;
  for (int k = 1; k <= params.message_count; ++k) {
    merged.merge(wpir::run_trials(allocation, store, k, trials, seed + static_cast<std::uint64_t>(k)));
  }
  auto json = wpir::to_json(merged);
  json["analytic_D"] = wpir::download_cost(allocation);
  json["empirical_rho_maxl"] =
      wpir::empirical_leakage(merged, wpir::Metric::kMaxLeakage, params.trust);
  json["empirical_rho_mi"] =
      wpir::empirical_leakage(merged, wpir::Metric::kMutualInformation, params.trust);
  json["analytic_rho_maxl"] = wpir::rho_maxl(allocation, params.trust);
  json["analytic_rho_mi"] = wpir::rho_mi(allocation, params.trust);
  std::cout << json.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"W-PIR# weakly private information retrieval toolkit"};
  app.require_subcommand(1);

  int servers = 3;
  int messages = 2;
  std::string gamma;
  int points = 21;
  std::string metric = "maxl";
  std::string format = "csv";
  std::string out_path;
  std::string suite = "all";
  bool perturb = false;
  bool as_json = false;
  std::string alloc = "uniform-tsc";
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string store_path;
  std::string listen_address = "127.0.0.1:9000";
  std::string servers_list;
  int retrieve_index = 1;

  auto* tradeoff = app.add_subcommand("tradeoff", "emit privacy/download tradeoff curves");
  tradeoff->add_option("--metric", metric, "maxl or mi");
  tradeoff->add_option("--n", servers, "server count");
  tradeoff->add_option("--k", messages, "message count");
  tradeoff->add_option("--gamma", gamma, "semicolon-joined trust weights");
  tradeoff->add_option("--points", points, "grid points on [1, D*]");
  tradeoff->add_option("--format", format, "csv or json");
  tradeoff->add_option("--out", out_path, "output path (default stdout)");

  auto* table = app.add_subcommand("table", "print the query/answer table");
  table->add_option("--n", servers, "server count");
  table->add_option("--k", messages, "message count");

  auto* verify = app.add_subcommand("verify", "run certificate batteries");
  verify->add_option("--suite", suite, "maxl-kkt, prop2, prop4, hull, or all");
  verify->add_flag("--perturb", perturb, "inject a primal perturbation (must fail)");
  verify->add_flag("--json", as_json, "emit the KKT certificate as JSON");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo protocol runs");
  simulate->add_option("--n", servers, "server count");
  simulate->add_option("--k", messages, "message count");
  simulate->add_option("--gamma", gamma, "semicolon-joined trust weights");
  simulate->add_option("--alloc", alloc, "preset or allocation JSON file");
  simulate->add_option("--trials", trials, "trials per message");
  simulate->add_option("--seed", seed, "PRNG seed");

  auto* genstore = app.add_subcommand("genstore", "write a random message store");
  genstore->add_option("--n", servers, "server count");
  genstore->add_option("--k", messages, "message count");
  genstore->add_option("--seed", seed, "PRNG seed");
  genstore->add_option("--out", store_path, "store file path")->required();

  auto* serve = app.add_subcommand("serve", "answer queries for one store");
  serve->add_option("--store", store_path, "store file path")->required();
  serve->add_option("--listen", listen_address, "host:port");

  auto* retrieve = app.add_subcommand("retrieve", "retrieve one message over the wire");
  retrieve->add_option("--k", retrieve_index, "message index to retrieve");
  retrieve->add_option("--messages", messages, "message count of the store");
  retrieve->add_option("--alloc", alloc, "preset or allocation JSON file");
  retrieve->add_option("--servers", servers_list, "semicolon-joined host:port list")
      ->required();
  retrieve->add_option("--seed", seed, "PRNG seed");
  retrieve->add_option("--gamma", gamma, "semicolon-joined trust weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tradeoff->parsed()) {
      return run_tradeoff(servers, messages, gamma, points, metric, format, out_path);
    }
    if (table->parsed()) {
      std::cout << wpir::render_code_table(wpir::SystemParams(servers, messages));
      return kExitOk;
    }
    if (verify->parsed()) {
      if (as_json) {
        const wpir::SystemParams params(servers, messages);
        const auto cert = wpir::kkt_verify_maxl(params, 7.0 / 6.0, perturb ? 0.01 : 0.0);
        std::cout << wpir::to_json(cert).dump(2) << "\n";
        return cert.ok() ? kExitOk : kExitVerificationFailure;
      }
      bool all_passed = true;
      for (const auto& result : wpir::verify_suites(suite, perturb ? 0.01 : 0.0)) {
        std::cout << (result.passed ? "PASS" : "FAIL") << " " << result.name << ": "
                  << result.detail << "\n";
        all_passed = all_passed && result.passed;
      }
      return all_passed ? kExitOk : kExitVerificationFailure;
    }
    if (simulate->parsed()) {
      return run_simulate(servers, messages, gamma, alloc, trials, seed);
    }
    if (genstore->parsed()) {
      const auto params = build_params(servers, messages, gamma);
      wpir::save_store(wpir::MessageStore::random(params, seed), store_path);
      std::cout << "wrote " << store_path << "\n";
      return kExitOk;
    }
    if (serve->parsed()) {
      wpir::serve_blocking(store_path, listen_address);
      return kExitOk;
    }
    if (retrieve->parsed()) {
      const auto endpoints = parse_endpoints(servers_list);
      const auto params =
          build_params(static_cast<int>(endpoints.size()), messages, gamma);
      const auto allocation = wpir::preset_allocation(alloc, params);
      const auto symbols =
          wpir::client_retrieve(retrieve_index, allocation, endpoints, seed);
      std::ostringstream os;
      os << std::hex;
      for (const auto symbol : symbols) {
        os.width(2);
        os.fill('0');
        os << static_cast<int>(symbol);
      }
      std::cout << os.str() << "\n";
      return kExitOk;
    }
  } catch (const wpir::Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitRuntimeError;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitUsage;
}
