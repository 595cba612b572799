#pragma once

// Partition multigraphs of the expansion of <dH^n>.
//
// Every term of (1/2 sum_ij w_ij x_i x_j)^n is a product of n weights. Which
// weights share an index is recorded as a multigraph: one node per distinct
// index, one edge per weight. Nodes of degree one have a vanishing corrected
// moment, so only multigraphs with minimum degree two contribute.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace polybound {

inline constexpr int kMinCatalogOrder = 2;
inline constexpr int kMaxCatalogOrder = 9;

struct Edge {
  int a = 0;
  int b = 0;
  int multiplicity = 1;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Loop-free undirected multigraph on nodes 0 .. num_nodes()-1, stored as a
/// dense symmetric multiplicity matrix.
class Multigraph {
 public:
  Multigraph() = default;
  explicit Multigraph(int num_nodes);
  Multigraph(int num_nodes, std::span<const Edge> edges);

  int num_nodes() const { return n_; }
  int multiplicity(int a, int b) const { return mult_[index(a, b)]; }
  /// Sum of incident edge multiplicities.
  int degree(int v) const;
  /// Number of distinct neighbours.
  int simple_degree(int v) const;
  int total_multiplicity() const;

  /// Throws on self-loops or out-of-range nodes.
  void add_edge(int a, int b, int multiplicity = 1);
  int add_node();

  /// Edges with a < b in lexicographic order.
  std::vector<Edge> edges() const;

  /// Node v of *this becomes node new_label[v] of the result.
  Multigraph relabeled(std::span<const int> new_label) const;

  friend bool operator==(const Multigraph&, const Multigraph&) = default;

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(b);
  }

  int n_ = 0;
  std::vector<int> mult_;
};

struct CanonicalForm {
  /// Byte string: node count followed by the upper-triangle multiplicities
  /// under the canonical labeling.
  std::string key;
  /// labeling[v] is the canonical label of node v.
  std::vector<int> labeling;
  std::uint64_t automorphisms = 1;
};

/// Individualization/refinement search over all leaves of the refinement
/// tree. Exhaustive, so only meant for the small graphs of the catalog.
CanonicalForm canonical_form(const Multigraph& g);

struct EliminationOrder {
  std::vector<int> order;
  /// Largest number of remaining neighbours of a node at its elimination.
  int width = 0;
};

/// Greedy min-fill ordering on the underlying simple graph, ties broken by
/// remaining degree, remaining multiplicity degree, then node index. Falls
/// back to an exact ordering when the greedy width exceeds the treewidth.
EliminationOrder elimination_order(const Multigraph& g);

/// Greedy min-fill ordering without the exact fallback.
EliminationOrder greedy_elimination_order(const Multigraph& g);

/// Exact treewidth of the underlying simple graph (subset dynamic program,
/// fine up to ~20 nodes) together with an order achieving it.
EliminationOrder exact_elimination_order(const Multigraph& g);

/// Induced width of a given elimination order.
int induced_width(const Multigraph& g, std::span<const int> order);

/// Largest clique of the underlying simple graph.
int simple_clique_number(const Multigraph& g);

struct PartitionGraph {
  Multigraph graph;
  /// n! / prod(multiplicity!) : number of ordered weight sequences that
  /// produce one labeled copy of the graph.
  std::uint64_t coefficient = 0;
  std::string canonical_key;
  std::uint64_t automorphisms = 1;
  std::vector<int> elim_order;
  int width = 0;
  /// Largest clique of a triangulation along elim_order (width + 1); this is
  /// the exponent of the O(N^p) evaluation cost.
  int max_clique = 0;

  int order() const { return graph.total_multiplicity(); }
  /// Number of set partitions of the 2n weight endpoints that produce this
  /// graph: coefficient * 2^n / automorphisms.
  std::uint64_t endpoint_partitions() const;
};

struct GraphCatalog {
  int order = 0;
  std::string convention_tag;
  std::vector<PartitionGraph> graphs;
};

/// Tag identifying how coefficients and per-graph sums fit together:
///   <dH^n> = sum_g coefficient(g) * S(g),
///   S(g)   = (sum over free node indices of prod_edges w^mult *
///             prod_nodes M'_degree) / automorphisms(g).
inline constexpr const char* kConventionTag = "free-index-sum/automorphisms;coef=n!/prod(mult!)";

/// n! / prod over edges of multiplicity!.
std::uint64_t multinomial_coefficient(const Multigraph& g);

/// Fills coefficient, key, automorphisms, elimination order, width and
/// max_clique for `g`, relabeling it canonically.
PartitionGraph make_partition_graph(const Multigraph& g);

/// All isomorphism classes of loop-free multigraphs with n edges and minimum
/// degree two, sorted by canonical key.
GraphCatalog enumerate_partitions(int order);

struct CatalogSummary {
  int order = 0;
  std::size_t count = 0;
  /// histogram[c] = number of graphs with max_clique == c.
  std::vector<std::size_t> clique_histogram;
  int max_clique = 0;
};

CatalogSummary summarize(const GraphCatalog& catalog);

/// "897 (91+744+62)" style rendering of a summary.
std::string format_summary(const CatalogSummary& summary);

}  // namespace polybound
