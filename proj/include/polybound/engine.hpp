#pragma once

// log Z >= log Z~ + log sum_n A_{K;n} <dH^n>, with the variational
// parameters optimized analytically for the moments at hand.

#include <span>
#include <string>
#include <vector>

#include "polybound/catalog_io.hpp"
#include "polybound/model.hpp"
#include "polybound/moments.hpp"

namespace polybound {

enum class EvaluatorPath { Graph, BruteForce };

const char* to_string(EvaluatorPath path);
EvaluatorPath parse_evaluator_path(const std::string& name);

/// Highest bound order the graph path can serve (moments up to 9).
inline constexpr int kMaxGraphBoundOrder = kMaxCatalogOrder + 1;

struct BoundOptions {
  EvaluatorPath path = EvaluatorPath::Graph;
  MeanFieldStart mf_start = MeanFieldStart::Standard;
  MeanFieldOptions mean_field{};
  /// Required for the graph path; must outlive the call.
  const CatalogSet* catalogs = nullptr;
};

struct BoundResult {
  int order = 0;
  /// -inf when the inner sum is not positive (see `valid`).
  double log_bound = 0.0;
  bool valid = true;
  double log_z_tilde = 0.0;
  /// sum_n A_{K;n} <dH^n>
  double inner_sum = 0.0;
  /// max_n |A_{K;n} <dH^n>| / |inner_sum|; large values mean the bound is
  /// dominated by cancelling terms.
  double dominance = 0.0;
  std::vector<double> mus;
  MomentVector moments_used;
  EvaluatorPath evaluator_path = EvaluatorPath::Graph;
  MeanFieldState mean_field;
};

/// Moments up to n_max along `path`. A graph-path request on a state that
/// does not solve the mean-field equations is served by enumeration, and
/// `used` reports which path ran.
MomentVector compute_moments(const BoltzmannMachine& bm, const MeanFieldState& state, int n_max,
                             EvaluatorPath path, const CatalogSet* catalogs,
                             EvaluatorPath* used = nullptr);

/// Optimized bound of order K from precomputed moments.
BoundResult bound_from_moments(const MeanFieldState& state, double log_z_tilde,
                               const MomentVector& moments, int order);

BoundResult lower_bound_log_z(const BoltzmannMachine& bm, int order, const BoundOptions& opts);

/// One mean-field solve and one moment evaluation shared by all orders.
std::vector<BoundResult> lower_bounds_log_z(const BoltzmannMachine& bm, std::span<const int> orders,
                                            const BoundOptions& opts);

/// 1 - log_bound / log_z. Throws UndefinedMetric for log_z == 0.
double relative_error(double log_bound, double log_z);

/// Step used for d log B / d w_ij.
double correlation_step(double w_ij);

/// Central difference of log B_K in w_ij with the mean field re-solved at
/// each perturbation. NaN entries mark orders whose perturbed bound was
/// invalid.
std::vector<double> approx_correlations(const BoltzmannMachine& bm, int i, int j,
                                        std::span<const int> orders, const BoundOptions& opts,
                                        bool* converged = nullptr);

double approx_correlation(const BoltzmannMachine& bm, int i, int j, int order,
                          const BoundOptions& opts);

}  // namespace polybound
