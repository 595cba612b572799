#pragma once

// <dH^n> in polynomial time: every partition graph is evaluated by variable
// elimination with free index sums, corrected moments on the nodes and
// elementwise weight powers on the edges.

#include <memory>
#include <span>
#include <vector>

#include "polybound/catalog_io.hpp"
#include "polybound/graphs.hpp"
#include "polybound/model.hpp"
#include "polybound/moments.hpp"

namespace polybound {

/// Largest mean-field residual for which the graph path is accepted.
inline constexpr double kGraphPathResidualTol = 1e-9;

/// Per-instance evaluation context; caches weight powers and per-degree node
/// vectors so a whole catalog can be evaluated without recomputation.
class GraphEvaluator {
 public:
  /// node_moments[i][c] = M'_c of unit i.
  GraphEvaluator(const Eigen::MatrixXd& weights, std::vector<std::vector<double>> node_moments);
  GraphEvaluator(const BoltzmannMachine& bm, const MeanFieldState& state);

  int size() const { return n_; }

  /// Sum over all index assignments (coincidences allowed) of
  /// prod_edges w^mult * prod_nodes M'_degree, eliminating nodes in `order`.
  double free_index_sum(const Multigraph& g, std::span<const int> order) const;

  /// S(g): the free index sum divided by the automorphism count.
  double contribution(const PartitionGraph& g) const;

  /// sum_g coefficient(g) * S(g) with compensated accumulation.
  double catalog_moment(const GraphCatalog& catalog) const;

  struct Workspace;

 private:
  using Table = std::shared_ptr<const std::vector<double>>;

  Table weight_power(int k) const;
  Table node_vector(int degree) const;
  bool node_vector_is_zero(int degree) const;

  int n_ = 0;
  Eigen::MatrixXd weights_;
  std::vector<std::vector<double>> node_moments_;
  mutable std::vector<Table> weight_powers_;
  mutable std::vector<Table> node_vectors_;
  mutable std::shared_ptr<Workspace> workspace_;
};

double graph_contribution(const BoltzmannMachine& bm, const MeanFieldState& state,
                          const PartitionGraph& graph);

/// <(1/2 sum_ij w_ij (s_i - m_i)(s_j - m_j))^n> for n = 0..n_max using the
/// state's magnetizations, whether or not they solve the mean-field
/// equations.
MomentVector coupling_moments_graph(const BoltzmannMachine& bm, const MeanFieldState& state,
                                    const CatalogSet& catalogs, int n_max);

/// <dH^n> through the catalogs. Requires the state to satisfy the mean-field
/// equations (residual <= kGraphPathResidualTol); other states must use the
/// enumeration path. Throws MissingCatalog naming the absent order.
MomentVector delta_h_moments_graph(const BoltzmannMachine& bm, const MeanFieldState& state,
                                   const CatalogSet& catalogs, int n_max);

}  // namespace polybound
