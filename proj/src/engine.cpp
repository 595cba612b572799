#include "polybound/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polybound/error.hpp"
#include "polybound/evaluator.hpp"
#include "polybound/poly_bounds.hpp"

namespace polybound {

const char* to_string(EvaluatorPath path) {
  return path == EvaluatorPath::Graph ? "graph" : "brute";
}

EvaluatorPath parse_evaluator_path(const std::string& name) {
  if (name == "graph") return EvaluatorPath::Graph;
  if (name == "brute" || name == "brute-force") return EvaluatorPath::BruteForce;
  throw Error(ErrorCode::Configuration, "unknown evaluator path '" + name + "' (graph|brute)");
}

namespace {

void check_orders(std::span<const int> orders, EvaluatorPath path) {
  if (orders.empty()) throw Error(ErrorCode::Configuration, "no bound orders requested");
  for (int k : orders) {
    if (k < 2 || k % 2 != 0) {
      throw Error(ErrorCode::InvalidOrder, "bound order must be even and >= 2, got " + std::to_string(k));
    }
    if (path == EvaluatorPath::Graph && k > kMaxGraphBoundOrder) {
      throw Error(ErrorCode::Configuration,
                  "order " + std::to_string(k) + " needs moments beyond the graph catalogs (max order " +
                      std::to_string(kMaxGraphBoundOrder) + "); use the brute-force path");
    }
  }
}

}  // namespace

MomentVector compute_moments(const BoltzmannMachine& bm, const MeanFieldState& state, int n_max,
                             EvaluatorPath path, const CatalogSet* catalogs, EvaluatorPath* used) {
  EvaluatorPath ran = path;
  if (path == EvaluatorPath::Graph && !(state.residual <= kGraphPathResidualTol) &&
      bm.size() <= kMaxEnumerationUnits) {
    ran = EvaluatorPath::BruteForce;
  }
  if (used) *used = ran;
  if (ran == EvaluatorPath::BruteForce) return brute_force_delta_h_moments(bm, state, n_max);
  if (!catalogs) {
    throw Error(ErrorCode::MissingCatalog, "graph path selected but no partition catalogs were loaded");
  }
  return delta_h_moments_graph(bm, state, *catalogs, n_max);
}

BoundResult bound_from_moments(const MeanFieldState& state, double log_z_tilde,
                               const MomentVector& moments, int order) {
  BoundResult r;
  r.order = order;
  r.log_z_tilde = log_z_tilde;
  r.mean_field = state;
  r.moments_used.values.assign(moments.values.begin(),
                               moments.values.begin() + std::min<std::ptrdiff_t>(order, static_cast<std::ptrdiff_t>(moments.size())));
  r.mus = optimal_mus(moments, order);
  const BoundPolynomial poly =
      build_coefficients(r.mus, order, 0, std::max(order, kDefaultMaxOrder));
  r.inner_sum = expect_poly(poly.coeffs, moments);

  double largest = 0.0;
  for (std::size_t n = 0; n < poly.coeffs.size(); ++n) {
    largest = std::max(largest, std::abs(poly.coeffs[n] * moments[n]));
  }
  r.dominance = r.inner_sum != 0.0 ? largest / std::abs(r.inner_sum) : std::numeric_limits<double>::infinity();

  if (r.inner_sum > 0.0 && std::isfinite(r.inner_sum)) {
    r.log_bound = log_z_tilde + std::log(r.inner_sum);
    r.valid = true;
  } else {
    r.log_bound = -std::numeric_limits<double>::infinity();
    r.valid = false;
  }
  return r;
}

std::vector<BoundResult> lower_bounds_log_z(const BoltzmannMachine& bm, std::span<const int> orders,
                                            const BoundOptions& opts) {
  check_orders(orders, opts.path);
  const int top = *std::max_element(orders.begin(), orders.end());
  const MeanFieldState state = solve_mean_field(bm, opts.mf_start, opts.mean_field);
  EvaluatorPath used = opts.path;
  const MomentVector moments = compute_moments(bm, state, top - 1, opts.path, opts.catalogs, &used);
  const double lzt = log_z_tilde(state, bm);
  std::vector<BoundResult> out;
  out.reserve(orders.size());
  for (int k : orders) {
    BoundResult r = bound_from_moments(state, lzt, moments, k);
    r.evaluator_path = used;
    out.push_back(std::move(r));
  }
  return out;
}

BoundResult lower_bound_log_z(const BoltzmannMachine& bm, int order, const BoundOptions& opts) {
  const int orders[] = {order};
  return std::move(lower_bounds_log_z(bm, orders, opts).front());
}

double relative_error(double log_bound, double log_z) {
  if (log_z == 0.0) throw Error(ErrorCode::UndefinedMetric, "relative error undefined for log Z = 0");
  return 1.0 - log_bound / log_z;
}

double correlation_step(double w_ij) { return 1e-5 * std::max(1.0, std::abs(w_ij)); }

std::vector<double> approx_correlations(const BoltzmannMachine& bm, int i, int j,
                                        std::span<const int> orders, const BoundOptions& opts,
                                        bool* converged) {
  if (i == j) throw Error(ErrorCode::InvalidIndex, "approx_correlation needs two distinct units");
  if (i < 0 || j < 0 || i >= bm.size() || j >= bm.size()) {
    throw Error(ErrorCode::InvalidIndex, "unit index out of range");
  }
  const double w = bm.weights()(i, j);
  const double eps = correlation_step(w);
  const auto plus = lower_bounds_log_z(bm.with_weight(i, j, w + eps), orders, opts);
  const auto minus = lower_bounds_log_z(bm.with_weight(i, j, w - eps), orders, opts);
  if (converged) {
    *converged = plus.front().mean_field.converged && minus.front().mean_field.converged;
  }
  std::vector<double> out(orders.size());
  for (std::size_t k = 0; k < orders.size(); ++k) {
    if (!plus[k].valid || !minus[k].valid) {
      out[k] = std::numeric_limits<double>::quiet_NaN();
    } else {
      out[k] = (plus[k].log_bound - minus[k].log_bound) / (2.0 * eps);
    }
  }
  return out;
}

double approx_correlation(const BoltzmannMachine& bm, int i, int j, int order,
                          const BoundOptions& opts) {
  const int orders[] = {order};
  return approx_correlations(bm, i, j, orders, opts).front();
}

}  // namespace polybound
