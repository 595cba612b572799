// polybound: partition catalogs, single-network bounds and ensemble sweeps.
//
//   polybound catalog --order 2-9 --out data/catalog
//   polybound bound network.json --order 10 --path graph --mf-start standard
//   polybound sweep sweep.json --out results/fig2

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "polybound/catalog_io.hpp"
#include "polybound/engine.hpp"
#include "polybound/error.hpp"
#include "polybound/graphs.hpp"
#include "polybound/model.hpp"
#include "polybound/network_io.hpp"
#include "polybound/sweep.hpp"

namespace fs = std::filesystem;
using namespace polybound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::InvalidMagnetization:
    case ErrorCode::UndefinedMetric:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

// "2-9", "5" or "2,4,6".
std::vector<int> parse_order_range(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) {
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        for (int n = lo; n <= hi; ++n) out.push_back(n);
      }
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::Configuration, "cannot parse order range '" + spec + "'");
  }
  if (out.empty()) throw Error(ErrorCode::Configuration, "empty order range");
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

int cmd_catalog(const std::string& orders_spec, const fs::path& out_dir) {
  const auto orders = parse_order_range(orders_spec);
  for (int n : orders) {
    if (n < kMinCatalogOrder || n > kMaxCatalogOrder) {
      throw Error(ErrorCode::UnsupportedOrder,
                  "order " + std::to_string(n) + " is not supported: catalogs cover orders " +
                      std::to_string(kMinCatalogOrder) + ".." + std::to_string(kMaxCatalogOrder) +
                      "; use --path brute in `bound` for higher moments");
    }
  }
  fs::create_directories(out_dir);
  std::printf("%-6s %-22s %-4s %s\n", "order", "# partitions", "pi", "file");
  for (int n : orders) {
    const GraphCatalog catalog = enumerate_partitions(n);
    const auto path = catalog_file(out_dir, n);
    save_catalog(catalog, path);
    const CatalogSummary s = summarize(catalog);
    std::printf("%-6d %-22s %-4d %s\n", n, format_summary(s).c_str(), s.max_clique, path.string().c_str());
  }
  return kExitOk;
}

int cmd_bound(const fs::path& network_file, int order, const std::string& path_name,
              const std::string& start_name, const fs::path& catalog_dir) {
  const BoltzmannMachine bm = load_network(network_file);
  BoundOptions opts;
  opts.path = parse_evaluator_path(path_name);
  opts.mf_start = parse_mean_field_start(start_name);
  CatalogSet catalogs;
  if (opts.path == EvaluatorPath::Graph) {
    if (order > kMaxGraphBoundOrder) {
      throw Error(ErrorCode::Configuration, "order " + std::to_string(order) +
                                                " exceeds the graph path (max " +
                                                std::to_string(kMaxGraphBoundOrder) + "); use --path brute");
    }
    catalogs = load_catalogs(catalog_dir, std::max(order - 1, kMinCatalogOrder));
    opts.catalogs = &catalogs;
  }

  const BoundResult r = lower_bound_log_z(bm, order, opts);
  std::printf("N               %d\n", bm.size());
  std::printf("order K         %d\n", r.order);
  std::printf("mf_start        %s\n", to_string(opts.mf_start));
  std::printf("mf_converged    %s (residual %.3g, %d iterations)\n", r.mean_field.converged ? "yes" : "no",
              r.mean_field.residual, r.mean_field.iterations);
  std::printf("evaluator_path  %s\n", to_string(r.evaluator_path));
  std::printf("log_z_tilde     %.17g\n", r.log_z_tilde);
  for (std::size_t n = 0; n < r.moments_used.size(); ++n) {
    std::printf("<dH^%zu>%*s%.17g\n", n, n < 10 ? 9 : 8, "", r.moments_used[n]);
  }
  for (std::size_t l = 0; l < r.mus.size(); ++l) {
    std::printf("mu_%zu%*s%.17g\n", 2 * l, 2 * l < 10 ? 12 : 11, "", r.mus[l]);
  }
  std::printf("inner_sum       %.17g\n", r.inner_sum);
  std::printf("dominance       %.6g\n", r.dominance);
  std::printf("log_bound       %.17g\n", r.log_bound);
  if (bm.size() <= kMaxEnumerationUnits) {
    const double log_z = exact_log_partition(bm);
    std::printf("log_z_exact     %.17g\n", log_z);
    std::printf("rel_error       %.17g\n", relative_error(r.log_bound, log_z));
  }
  if (!r.valid) {
    std::fprintf(stderr, "bound inner sum is not positive (%.6g); the bound is uninformative here\n",
                 r.inner_sum);
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_sweep(const fs::path& config_file, const fs::path& out_prefix, const fs::path& catalog_dir,
              const std::string& path_override, const std::string& start_override, long long seed_override) {
  SweepConfig config = parse_sweep_config(read_file(config_file));
  if (!path_override.empty()) config.path = parse_evaluator_path(path_override);
  if (!start_override.empty()) config.mf_starts = {parse_mean_field_start(start_override)};
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  config.validate();

  CatalogSet catalogs;
  if (config.path == EvaluatorPath::Graph) {
    int top = 2;
    for (int k : config.orders) top = std::max(top, k - 1);
    catalogs = load_catalogs(catalog_dir, std::max(top, kMinCatalogOrder));
  }
  const SweepResult result = run_sweep(config, config.path == EvaluatorPath::Graph ? &catalogs : nullptr);
  const fs::path rows_path = out_prefix.string() + ".csv";
  const fs::path agg_path = out_prefix.string() + "_aggregate.csv";
  write_file(rows_path, rows_to_csv(result, config));
  write_file(agg_path, aggregates_to_csv(result, config));

  std::size_t failures = 0;
  for (const auto& r : result.rows) failures += r.error.empty() ? 0 : 1;
  std::printf("wrote %zu rows to %s (%zu failed), aggregates to %s\n", result.rows.size(),
              rows_path.string().c_str(), failures, agg_path.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order lower bounds on the Boltzmann machine partition function"};
  app.require_subcommand(1);

  std::string catalog_dir = default_catalog_dir().string();

  auto* catalog = app.add_subcommand("catalog", "Enumerate partition graphs and write catalog files");
  std::string catalog_orders = "2-9";
  std::string catalog_out = catalog_dir;
  catalog->add_option("--order", catalog_orders, "Orders to generate, e.g. 2-9 or 4,5")->capture_default_str();
  catalog->add_option("--out", catalog_out, "Output directory")->capture_default_str();

  auto* bound = app.add_subcommand("bound", "Lower bound on log Z for one network file");
  std::string network_file;
  int bound_order = 10;
  std::string bound_path = "graph";
  std::string bound_start = "standard";
  bound->add_option("network", network_file, "Network JSON file")->required();
  bound->add_option("--order", bound_order, "Even bound order K")->capture_default_str();
  bound->add_option("--path", bound_path, "Moment evaluator: graph|brute")->capture_default_str();
  bound->add_option("--mf-start", bound_start, "Mean-field start: standard|zero")->capture_default_str();
  bound->add_option("--catalog-dir", catalog_dir, "Directory with order_<n>.json catalogs")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Ensemble sweep over SK networks");
  std::string sweep_config;
  std::string sweep_out = "sweep";
  std::string sweep_path;
  std::string sweep_start;
  long long sweep_seed = -1;
  sweep->add_option("config", sweep_config, "Sweep config JSON")->required();
  sweep->add_option("--out", sweep_out, "Output prefix (<out>.csv, <out>_aggregate.csv)")->capture_default_str();
  sweep->add_option("--path", sweep_path, "Override evaluator path: graph|brute");
  sweep->add_option("--mf-start", sweep_start, "Override mean-field start: standard|zero");
  sweep->add_option("--seed", sweep_seed, "Override the base seed");
  sweep->add_option("--catalog-dir", catalog_dir, "Directory with order_<n>.json catalogs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*catalog) return cmd_catalog(catalog_orders, catalog_out);
    if (*bound) return cmd_bound(network_file, bound_order, bound_path, bound_start, catalog_dir);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, catalog_dir, sweep_path, sweep_start, sweep_seed);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
