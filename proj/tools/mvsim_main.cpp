#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvsim/error.hpp"
#include "mvsim/experiment.hpp"
#include "mvsim/format.hpp"
#include "mvsim/functional.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/oracles.hpp"
#include "mvsim/reference_models.hpp"
#include "mvsim/version.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitOverCap = 5;

struct PointCloud {
  std::vector<double> values;
  std::size_t dimension = 0;
};

// One point per row, comma- or whitespace-separated; '#' starts a comment.
PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw mvsim::DomainError(path + ":" + std::to_string(line_no) + ": not a number: '" +
                                 token + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (cloud.dimension == 0) cloud.dimension = row.size();
    if (row.size() != cloud.dimension) {
      throw mvsim::DomainError(path + ":" + std::to_string(line_no) + ": ragged row with " +
                               std::to_string(row.size()) + " columns, expected " +
                               std::to_string(cloud.dimension));
    }
    cloud.values.insert(cloud.values.end(), row.begin(), row.end());
  }
  if (cloud.dimension == 0) throw mvsim::DomainError(path + ": no points");
  return cloud;
}

int cmd_run(const std::string& config_path, const mvsim::RunOptions& options) {
  mvsim::ExperimentConfig config;
  try {
    config = mvsim::parse_config(config_path);
  } catch (const mvsim::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return kExitInvalid;
  }
  const auto outcome = mvsim::run_experiment(config, options);
  if (outcome.exit_code == kExitInvalid) {
    std::cerr << config_path << ": " << outcome.message << "\n";
    return kExitInvalid;
  }
  std::cout << config.name << ": " << mvsim::to_string(outcome.verdict);
  if (outcome.fit) {
    std::cout << "  slope " << mvsim::format_double(outcome.fit->slope) << " +/- "
              << mvsim::format_double(outcome.fit->slope_half_width);
  }
  if (!outcome.message.empty()) std::cout << "  (" << outcome.message << ")";
  std::cout << "\nartifacts: " << outcome.output_dir.string() << "\n";
  return outcome.exit_code;
}

int cmd_wasserstein(const std::string& a, const std::string& b, double p,
                    const std::string& method, std::size_t projections, std::uint64_t seed) {
  PointCloud x, y;
  try {
    x = read_cloud(a);
    y = read_cloud(b);
  } catch (const mvsim::DomainError& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }
  if (x.dimension != y.dimension) {
    std::cerr << "dimension mismatch: " << x.dimension << " vs " << y.dimension << "\n";
    return kExitInvalid;
  }
  const std::size_t d = x.dimension;
  const auto mu = mvsim::DiscreteMeasure::uniform(x.values, d);
  const auto nu = mvsim::DiscreteMeasure::uniform(y.values, d);
  std::string used = method;
  if (used == "auto") {
    if (d == 1) {
      used = "1d";
    } else if (mu.size() == nu.size() && mu.size() <= mvsim::kExactTransportCap) {
      used = "exact";
    } else {
      used = "sliced";
    }
  }
  double value = 0.0;
  try {
    if (used == "exact") {
      value = mvsim::wasserstein_exact(mu, nu, p);
    } else if (used == "1d") {
      value = mvsim::wasserstein_1d(mu, nu, p);
    } else {
      value = mvsim::wasserstein_sliced(mu, nu, p, projections, seed);
    }
  } catch (const mvsim::CapacityError& e) {
    std::cerr << e.what() << "\n";
    return kExitOverCap;
  } catch (const mvsim::DomainError& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }
  std::cout << mvsim::format_double(value) << "\n";
  std::cerr << "method=" << used << " p=" << mvsim::format_double(p) << " d=" << d
            << " sizes=" << mu.size() << "," << nu.size();
  if (used == "sliced") std::cerr << " projections=" << projections << " seed=" << seed;
  std::cerr << (used == "sliced" && d > 1 ? " (approximation)" : " (exact)") << "\n";
  return 0;
}

int cmd_catalog() {
  std::cout << "models:\n";
  for (const auto& entry : mvsim::model_catalog()) {
    std::cout << "  " << entry.id << "  " << entry.description << "\n";
  }
  std::cout << "functionals:\n";
  for (const auto& [id, description] : mvsim::functional_catalog()) {
    std::cout << "  " << id << "  " << description << "\n";
  }
  std::cout << "estimators:\n"
               "  strong-traj  strong-W2  weak-semigroup  strong-semigroup  mean-measure-W1\n";
  return 0;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& r : mvsim::oracles::run_selftest()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"McKean-Vlasov particle simulation and convergence-rate experiments"};
  app.set_version_flag("--version", std::string(mvsim::kVersion));
  app.require_subcommand(1);
  app.footer(
      "points.csv columns: N,n,h,T,model,functional,estimator,estimate,std_error,R,secondary,"
      "secondary_std_error,clean\n"
      "plotdata.csv columns: axis_value,log_axis,estimate,log_estimate,std_error,log_fit,clean\n"
      "Default output directory: $" +
      std::string(mvsim::kOutputDirEnv) + "/<name>, else ./mvsim-out/<name>.");

  auto* run = app.add_subcommand("run", "run an experiment config");
  std::string config_path;
  std::uint64_t run_seed = 0;
  std::string run_output;
  int workers = 0;
  bool quiet = false;
  run->add_option("config", config_path, "YAML experiment config")->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "override the config seed");
  auto* out_opt = run->add_option("--output", run_output, "artifact directory");
  run->add_option("--workers", workers, "worker threads (default: hardware parallelism)")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--quiet", quiet, "no progress lines");

  auto* ws = app.add_subcommand("wasserstein", "W_p between two CSV point clouds");
  std::string file_a, file_b, method = "auto";
  double p = 2.0;
  std::size_t projections = 256;
  std::uint64_t ws_seed = 1;
  ws->add_option("a", file_a, "first point cloud (one point per row)")->required();
  ws->add_option("b", file_b, "second point cloud")->required();
  ws->add_option("--p", p, "order p >= 1")->check(CLI::Range(1.0, 1e300));
  ws->add_option("--method", method, "exact | 1d | sliced | auto")
      ->check(CLI::IsMember({"exact", "1d", "sliced", "auto"}));
  ws->add_option("--projections", projections, "directions for the sliced method");
  ws->add_option("--seed", ws_seed, "seed for the sliced directions");

  auto* catalog = app.add_subcommand("catalog", "list models, functionals and estimators");
  auto* selftest = app.add_subcommand("selftest", "run the oracle suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInvalid;
  }

  try {
    if (run->parsed()) {
      mvsim::RunOptions options;
      if (*seed_opt) options.seed = run_seed;
      if (*out_opt) options.output = run_output;
      options.workers = workers;
      options.quiet = quiet;
      return cmd_run(config_path, options);
    }
    if (ws->parsed()) return cmd_wasserstein(file_a, file_b, p, method, projections, ws_seed);
    if (catalog->parsed()) return cmd_catalog();
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
