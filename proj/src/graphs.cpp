#include "polybound/graphs.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>

#include "polybound/error.hpp"

namespace polybound {

Multigraph::Multigraph(int num_nodes)
    : n_(num_nodes),
      mult_(static_cast<std::size_t>(num_nodes) * static_cast<std::size_t>(num_nodes), 0) {
  if (num_nodes < 0) throw Error(ErrorCode::InvalidParameter, "negative node count");
}

Multigraph::Multigraph(int num_nodes, std::span<const Edge> edges) : Multigraph(num_nodes) {
  for (const auto& e : edges) add_edge(e.a, e.b, e.multiplicity);
}

int Multigraph::degree(int v) const {
  int d = 0;
  for (int u = 0; u < n_; ++u) d += multiplicity(v, u);
  return d;
}

int Multigraph::simple_degree(int v) const {
  int d = 0;
  for (int u = 0; u < n_; ++u) d += multiplicity(v, u) > 0 ? 1 : 0;
  return d;
}

int Multigraph::total_multiplicity() const {
  int total = 0;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b) total += multiplicity(a, b);
  return total;
}

void Multigraph::add_edge(int a, int b, int multiplicity) {
  if (a < 0 || b < 0 || a >= n_ || b >= n_) {
    throw Error(ErrorCode::InvalidParameter,
                "edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") outside a graph with " + std::to_string(n_) + " nodes");
  }
  if (a == b) {
    throw Error(ErrorCode::InvalidParameter,
                "self-loop on node " + std::to_string(a) + " (w_ii = 0)");
  }
  if (multiplicity < 1) {
    throw Error(ErrorCode::InvalidParameter, "edge multiplicity must be positive");
  }
  mult_[index(a, b)] += multiplicity;
  mult_[index(b, a)] += multiplicity;
}

int Multigraph::add_node() {
  Multigraph bigger(n_ + 1);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) bigger.mult_[bigger.index(a, b)] = multiplicity(a, b);
  *this = std::move(bigger);
  return n_ - 1;
}

std::vector<Edge> Multigraph::edges() const {
  std::vector<Edge> out;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b)
      if (const int m = multiplicity(a, b); m > 0) out.push_back({a, b, m});
  return out;
}

Multigraph Multigraph::relabeled(std::span<const int> new_label) const {
  Multigraph out(n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      out.mult_[out.index(new_label[a], new_label[b])] = multiplicity(a, b);
  return out;
}

// ---------------------------------------------------------------------------
// Canonical labeling

namespace {

using Coloring = std::vector<int>;

int count_colors(const Coloring& c) {
  return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
}

// Equitable refinement. New colors are ranks of (old color, sorted neighbour
// color/multiplicity multiset), so cell order is preserved and the result
// does not depend on node labels.
void refine(const Multigraph& g, Coloring& colors) {
  const int n = g.num_nodes();
  int classes = count_colors(colors);
  using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
  std::vector<Signature> sig(static_cast<std::size_t>(n));
  while (true) {
    for (int u = 0; u < n; ++u) {
      auto& s = sig[static_cast<std::size_t>(u)];
      s.first = colors[static_cast<std::size_t>(u)];
      s.second.clear();
      for (int w = 0; w < n; ++w)
        if (const int m = g.multiplicity(u, w); m > 0)
          s.second.emplace_back(colors[static_cast<std::size_t>(w)], m);
      std::sort(s.second.begin(), s.second.end());
    }
    std::vector<Signature> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const int next_classes = static_cast<int>(sorted.size());
    for (int u = 0; u < n; ++u) {
      colors[static_cast<std::size_t>(u)] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), sig[static_cast<std::size_t>(u)]) -
          sorted.begin());
    }
    if (next_classes == classes) return;
    classes = next_classes;
  }
}

std::string leaf_key(const Multigraph& g, const Coloring& labels) {
  const int n = g.num_nodes();
  std::vector<int> node_at(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) node_at[static_cast<std::size_t>(labels[static_cast<std::size_t>(u)])] = u;
  std::string key;
  key.reserve(static_cast<std::size_t>(1 + n * (n - 1) / 2));
  key.push_back(static_cast<char>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      key.push_back(static_cast<char>(
          g.multiplicity(node_at[static_cast<std::size_t>(a)], node_at[static_cast<std::size_t>(b)])));
  return key;
}

struct SearchState {
  const Multigraph& g;
  std::string best_key;
  Coloring best_labels;
  std::uint64_t best_count = 0;
};

void search(SearchState& st, Coloring colors) {
  refine(st.g, colors);
  const int n = st.g.num_nodes();
  if (count_colors(colors) == n) {
    std::string key = leaf_key(st.g, colors);
    if (st.best_count == 0 || key < st.best_key) {
      st.best_key = std::move(key);
      st.best_labels = colors;
      st.best_count = 1;
    } else if (key == st.best_key) {
      ++st.best_count;
    }
    return;
  }
  // First non-singleton cell.
  std::vector<int> cell_size(static_cast<std::size_t>(n), 0);
  for (int c : colors) ++cell_size[static_cast<std::size_t>(c)];
  int target = 0;
  while (cell_size[static_cast<std::size_t>(target)] < 2) ++target;
  for (int v = 0; v < n; ++v) {
    if (colors[static_cast<std::size_t>(v)] != target) continue;
    Coloring child(colors.size());
    for (int u = 0; u < n; ++u) {
      const int c = colors[static_cast<std::size_t>(u)];
      child[static_cast<std::size_t>(u)] = 2 * c + (c == target && u != v ? 1 : 0);
    }
    search(st, std::move(child));
  }
}

}  // namespace

CanonicalForm canonical_form(const Multigraph& g) {
  const int n = g.num_nodes();
  CanonicalForm out;
  if (n == 0) {
    out.key = std::string(1, '\0');
    return out;
  }
  Coloring colors(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) colors[static_cast<std::size_t>(u)] = g.degree(u);
  // Compress degrees to ranks.
  Coloring sorted = colors;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (auto& c : colors)
    c = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());

  SearchState st{g, {}, {}, 0};
  search(st, colors);
  out.key = std::move(st.best_key);
  out.labeling = std::move(st.best_labels);
  out.automorphisms = st.best_count;
  return out;
}

// ---------------------------------------------------------------------------
// Elimination orders

namespace {

using Adjacency = std::vector<std::uint32_t>;  // bitsets, <= 32 nodes

Adjacency simple_adjacency(const Multigraph& g) {
  if (g.num_nodes() > 32) {
    throw Error(ErrorCode::InvalidParameter, "elimination supports at most 32 nodes");
  }
  Adjacency adj(static_cast<std::size_t>(g.num_nodes()), 0);
  for (const auto& e : g.edges()) {
    adj[static_cast<std::size_t>(e.a)] |= 1u << e.b;
    adj[static_cast<std::size_t>(e.b)] |= 1u << e.a;
  }
  return adj;
}

int popcount(std::uint32_t x) { return __builtin_popcount(x); }

void eliminate(Adjacency& adj, int v) {
  const std::uint32_t nb = adj[static_cast<std::size_t>(v)];
  for (std::size_t u = 0; u < adj.size(); ++u) {
    if (nb & (1u << u)) adj[u] = (adj[u] | nb) & ~(1u << u) & ~(1u << v);
  }
  adj[static_cast<std::size_t>(v)] = 0;
}

}  // namespace

int induced_width(const Multigraph& g, std::span<const int> order) {
  Adjacency adj = simple_adjacency(g);
  int width = 0;
  for (int v : order) {
    width = std::max(width, popcount(adj[static_cast<std::size_t>(v)]));
    eliminate(adj, v);
  }
  return width;
}

EliminationOrder greedy_elimination_order(const Multigraph& g) {
  const int n = g.num_nodes();
  Adjacency adj = simple_adjacency(g);
  std::vector<int> mult_degree(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) mult_degree[static_cast<std::size_t>(v)] = g.degree(v);
  std::uint32_t remaining = n == 32 ? ~0u : (1u << n) - 1u;

  EliminationOrder out;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    std::tuple<int, int, int> best_score{};
    for (int v = 0; v < n; ++v) {
      if (!(remaining & (1u << v))) continue;
      const std::uint32_t nb = adj[static_cast<std::size_t>(v)];
      int fill = 0;
      for (int a = 0; a < n; ++a) {
        if (!(nb & (1u << a))) continue;
        fill += popcount(nb & ~adj[static_cast<std::size_t>(a)] & ~(1u << a));
      }
      const std::tuple<int, int, int> score{fill / 2, popcount(nb),
                                            mult_degree[static_cast<std::size_t>(v)]};
      if (best < 0 || score < best_score) {
        best = v;
        best_score = score;
      }
    }
    out.width = std::max(out.width, std::get<1>(best_score));
    out.order.push_back(best);
    for (int u = 0; u < n; ++u)
      mult_degree[static_cast<std::size_t>(u)] -= g.multiplicity(best, u);
    eliminate(adj, best);
    remaining &= ~(1u << best);
  }
  return out;
}

EliminationOrder exact_elimination_order(const Multigraph& g) {
  const int n = g.num_nodes();
  if (n > 20) throw Error(ErrorCode::InvalidParameter, "exact treewidth limited to 20 nodes");
  const Adjacency adj = simple_adjacency(g);
  const std::uint32_t full = (1u << n) - 1u;

  // q(S, v): vertices outside S + {v} reachable from v through S.
  auto q = [&](std::uint32_t s, int v) {
    std::uint32_t seen = 1u << v;
    std::uint32_t frontier = 1u << v;
    std::uint32_t reach = 0;
    while (frontier) {
      std::uint32_t next = 0;
      for (int u = 0; u < n; ++u) {
        if (!(frontier & (1u << u))) continue;
        const std::uint32_t nb = adj[static_cast<std::size_t>(u)] & ~seen;
        reach |= nb & ~s;
        next |= nb & s;
        seen |= nb;
      }
      frontier = next;
    }
    return popcount(reach);
  };

  // tw[S]: best width when S is eliminated first.
  std::vector<int> tw(static_cast<std::size_t>(full) + 1, std::numeric_limits<int>::max());
  std::vector<int> last(static_cast<std::size_t>(full) + 1, -1);
  tw[0] = 0;
  for (std::uint32_t s = 1; s <= full; ++s) {
    for (int v = 0; v < n; ++v) {
      if (!(s & (1u << v))) continue;
      const std::uint32_t rest = s & ~(1u << v);
      const int w = std::max(tw[rest], q(rest, v));
      if (w < tw[s]) {
        tw[s] = w;
        last[s] = v;
      }
    }
  }
  EliminationOrder out;
  out.width = n == 0 ? 0 : tw[full];
  std::uint32_t s = full;
  while (s) {
    out.order.push_back(last[s]);
    s &= ~(1u << last[s]);
  }
  std::reverse(out.order.begin(), out.order.end());
  return out;
}

EliminationOrder elimination_order(const Multigraph& g) {
  EliminationOrder greedy = greedy_elimination_order(g);
  if (g.num_nodes() <= 20) {
    EliminationOrder exact = exact_elimination_order(g);
    if (exact.width < greedy.width) return exact;
  }
  return greedy;
}

int simple_clique_number(const Multigraph& g) {
  const int n = g.num_nodes();
  const Adjacency adj = simple_adjacency(g);
  int best = n > 0 ? 1 : 0;
  // Bron-Kerbosch without pivoting; graphs here are tiny.
  auto expand = [&](auto&& self, std::uint32_t r, std::uint32_t p) -> void {
    best = std::max(best, popcount(r));
    while (p) {
      const int v = __builtin_ctz(p);
      self(self, r | (1u << v), p & adj[static_cast<std::size_t>(v)]);
      p &= ~(1u << v);
    }
  };
  expand(expand, 0u, n == 32 ? ~0u : (1u << n) - 1u);
  return best;
}

// ---------------------------------------------------------------------------
// Catalog construction

std::uint64_t multinomial_coefficient(const Multigraph& g) {
  // Built incrementally as a product of binomials to stay exact.
  std::uint64_t result = 1;
  int placed = 0;
  for (const auto& e : g.edges()) {
    for (int k = 1; k <= e.multiplicity; ++k) {
      result = result * static_cast<std::uint64_t>(placed + k) / static_cast<std::uint64_t>(k);
    }
    placed += e.multiplicity;
  }
  return result;
}

std::uint64_t PartitionGraph::endpoint_partitions() const {
  const int n = order();
  return (coefficient << n) / automorphisms;
}

PartitionGraph make_partition_graph(const Multigraph& g) {
  const CanonicalForm form = canonical_form(g);
  PartitionGraph pg;
  pg.graph = g.relabeled(form.labeling);
  pg.canonical_key = form.key;
  pg.automorphisms = form.automorphisms;
  pg.coefficient = multinomial_coefficient(g);
  const EliminationOrder elim = elimination_order(pg.graph);
  pg.elim_order = elim.order;
  pg.width = elim.width;
  pg.max_clique = pg.graph.num_nodes() == 0 ? 0 : elim.width + 1;
  return pg;
}

namespace {

// Endpoints still missing before every node reaches degree two.
int degree_deficit(const Multigraph& g) {
  int deficit = 0;
  for (int v = 0; v < g.num_nodes(); ++v) deficit += std::max(0, 2 - g.degree(v));
  return deficit;
}

}  // namespace

GraphCatalog enumerate_partitions(int order) {
  if (order < kMinCatalogOrder || order > kMaxCatalogOrder) {
    throw Error(ErrorCode::UnsupportedOrder,
                "partition catalogs are supported for orders " +
                    std::to_string(kMinCatalogOrder) + ".." +
                    std::to_string(kMaxCatalogOrder) + ", got " +
                    std::to_string(order));
  }

  // Grow graphs one edge at a time, deduplicating isomorphic copies at every
  // level. A k-edge subgraph of a valid n-edge graph lacks at most 2(n-k)
  // endpoints, which bounds the search.
  std::map<std::string, Multigraph> level;
  level.emplace(canonical_form(Multigraph(0)).key, Multigraph(0));
  for (int k = 0; k < order; ++k) {
    const int endpoints_left = 2 * (order - k - 1);
    std::map<std::string, Multigraph> next;
    auto offer = [&](Multigraph candidate) {
      if (candidate.num_nodes() > order) return;
      if (degree_deficit(candidate) > endpoints_left) return;
      CanonicalForm form = canonical_form(candidate);
      if (next.count(form.key)) return;
      next.emplace(std::move(form.key), candidate.relabeled(form.labeling));
    };
    for (const auto& [key, g] : level) {
      const int n = g.num_nodes();
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          Multigraph c = g;
          c.add_edge(a, b);
          offer(std::move(c));
        }
        Multigraph c = g;
        const int fresh = c.add_node();
        c.add_edge(a, fresh);
        offer(std::move(c));
      }
      Multigraph c = g;
      const int u = c.add_node();
      const int v = c.add_node();
      c.add_edge(u, v);
      offer(std::move(c));
    }
    level = std::move(next);
  }

  GraphCatalog catalog;
  catalog.order = order;
  catalog.convention_tag = kConventionTag;
  for (const auto& [key, g] : level) {
    if (degree_deficit(g) != 0) continue;
    catalog.graphs.push_back(make_partition_graph(g));
  }
  std::sort(catalog.graphs.begin(), catalog.graphs.end(),
            [](const PartitionGraph& x, const PartitionGraph& y) {
              return x.canonical_key < y.canonical_key;
            });
  return catalog;
}

CatalogSummary summarize(const GraphCatalog& catalog) {
  CatalogSummary s;
  s.order = catalog.order;
  s.count = catalog.graphs.size();
  for (const auto& g : catalog.graphs) s.max_clique = std::max(s.max_clique, g.max_clique);
  s.clique_histogram.assign(static_cast<std::size_t>(s.max_clique) + 1, 0);
  for (const auto& g : catalog.graphs) ++s.clique_histogram[static_cast<std::size_t>(g.max_clique)];
  return s;
}

std::string format_summary(const CatalogSummary& summary) {
  std::ostringstream os;
  os << summary.count << " (";
  bool first = true;
  for (std::size_t c = 2; c < summary.clique_histogram.size(); ++c) {
    if (!first) os << '+';
    os << summary.clique_histogram[c];
    first = false;
  }
  os << ')';
  return os.str();
}

}  // namespace polybound
