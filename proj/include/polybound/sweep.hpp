#pragma once

// Ensemble sweeps over SK networks: exact log Z and <s_0 s_1> by
// enumeration against the optimized bounds of several orders.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "polybound/catalog_io.hpp"
#include "polybound/engine.hpp"
#include "polybound/model.hpp"

namespace polybound {

struct SweepConfig {
  int n = 14;
  double sigma_theta = 0.2;
  std::vector<double> sigma_w_grid;
  std::vector<int> orders{2, 4, 6, 8, 10};
  int networks_per_point = 200;
  /// Networks per group mean; the aggregate reports the spread of group
  /// means as the error bar.
  int group_size = 20;
  std::uint64_t seed = 1;
  std::vector<MeanFieldStart> mf_starts{MeanFieldStart::Standard};
  EvaluatorPath path = EvaluatorPath::Graph;
  bool correlations = true;
  /// 0 = hardware concurrency.
  int threads = 0;

  /// Throws Configuration for empty grids, negative values or odd orders.
  void validate() const;
};

SweepConfig parse_sweep_config(std::string_view json_text);
std::string sweep_config_to_json(const SweepConfig& config);

/// Seed of network `index` at grid point `point`.
std::uint64_t network_seed(std::uint64_t base, std::size_t point, std::size_t index);

struct SweepRow {
  std::uint64_t seed = 0;
  double sigma_w = 0.0;
  int order = 0;
  double log_z_exact = 0.0;
  double log_bound = 0.0;
  double rel_error = 0.0;
  double corr_exact_12 = 0.0;
  double corr_approx_12 = 0.0;
  MeanFieldStart mf_start = MeanFieldStart::Standard;
  bool converged = false;
  EvaluatorPath path = EvaluatorPath::Graph;
  /// Empty on success; otherwise the failure that voided this row.
  std::string error;
};

struct AggregateRow {
  double sigma_w = 0.0;
  int order = 0;
  MeanFieldStart mf_start = MeanFieldStart::Standard;
  int networks = 0;
  int failures = 0;
  double mean_rel_error = 0.0;
  double sem_rel_error = 0.0;
  double mean_corr_mse = 0.0;
  double sem_corr_mse = 0.0;
};

struct SweepResult {
  /// Ordered by (sigma_w, network, mf_start, order) following the config.
  std::vector<SweepRow> rows;
  std::vector<AggregateRow> aggregates;
};

SweepResult run_sweep(const SweepConfig& config, const CatalogSet* catalogs);

/// Group means of `values` in consecutive blocks of `group_size`, then the
/// mean and standard deviation of those means. NaN entries are skipped.
std::pair<double, double> grouped_mean_and_spread(const std::vector<double>& values, int group_size);

std::string rows_to_csv(const SweepResult& result, const SweepConfig& config);
std::string aggregates_to_csv(const SweepResult& result, const SweepConfig& config);

}  // namespace polybound
