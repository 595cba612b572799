#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "polybound/catalog_io.hpp"
#include "polybound/error.hpp"
#include "polybound/graphs.hpp"

using namespace polybound;

namespace {

// Permutations p with multiplicity(p[a], p[b]) == multiplicity(a, b).
std::uint64_t brute_automorphisms(const Multigraph& g) {
  std::vector<int> p(static_cast<std::size_t>(g.num_nodes()));
  std::iota(p.begin(), p.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (int a = 0; a < g.num_nodes() && ok; ++a)
      for (int b = 0; b < g.num_nodes() && ok; ++b)
        ok = g.multiplicity(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)]) == g.multiplicity(a, b);
    count += ok ? 1 : 0;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

bool brute_isomorphic(const Multigraph& g, const Multigraph& h) {
  if (g.num_nodes() != h.num_nodes()) return false;
  std::vector<int> p(static_cast<std::size_t>(g.num_nodes()));
  std::iota(p.begin(), p.end(), 0);
  do {
    if (g.relabeled(p) == h) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

Multigraph random_multigraph(std::mt19937_64& rng, int nodes, int edges) {
  std::uniform_int_distribution<int> node(0, nodes - 1);
  Multigraph g(nodes);
  for (int e = 0; e < edges; ++e) {
    int a = node(rng), b = node(rng);
    while (b == a) b = node(rng);
    g.add_edge(a, b);
  }
  return g;
}

std::multiset<std::uint64_t> occurrences(const GraphCatalog& c) {
  std::multiset<std::uint64_t> out;
  for (const auto& g : c.graphs) out.insert(g.endpoint_partitions());
  return out;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "polybound_test_graphs";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("multigraph basics") {
  Multigraph g(3);
  g.add_edge(0, 1, 2);
  g.add_edge(1, 2);
  CHECK(g.multiplicity(1, 0) == 2);
  CHECK(g.degree(1) == 3);
  CHECK(g.simple_degree(1) == 2);
  CHECK(g.total_multiplicity() == 3);
  CHECK(g.edges().size() == 2);
  CHECK_THROWS_AS(g.add_edge(1, 1), Error);
  CHECK_THROWS_AS(g.add_edge(0, 5), Error);
}

TEST_CASE("catalog counts, clique histograms and pi") {
  const std::map<int, std::pair<std::size_t, std::vector<std::size_t>>> expected = {
      {2, {1, {1}}},          {3, {2, {1, 1}}},          {4, {5, {3, 2}}},
      {5, {11, {4, 7}}},      {6, {34, {11, 22, 1}}},    {7, {87, {18, 67, 2}}},
      {8, {279, {45, 221, 13}}}, {9, {897, {91, 744, 62}}},
  };
  const int pi[] = {2, 3, 3, 3, 4, 4, 4, 4};
  for (const auto& [n, want] : expected) {
    const auto s = summarize(enumerate_partitions(n));
    CHECK(s.count == want.first);
    std::vector<std::size_t> hist(s.clique_histogram.begin() + 2, s.clique_histogram.end());
    CHECK(hist == want.second);
    CHECK(s.max_clique == pi[n - 2]);
  }
  CHECK(format_summary(summarize(enumerate_partitions(6))) == "34 (11+22+1)");
}

TEST_CASE("occurrence numbers of the low orders") {
  CHECK(occurrences(enumerate_partitions(2)) == std::multiset<std::uint64_t>{2});
  CHECK(occurrences(enumerate_partitions(3)) == std::multiset<std::uint64_t>{4, 8});
  CHECK(occurrences(enumerate_partitions(4)) == std::multiset<std::uint64_t>{8, 96, 48, 12, 48});
  CHECK(occurrences(enumerate_partitions(5)) ==
        std::multiset<std::uint64_t>{16, 320, 480, 320, 80, 480, 960, 960, 960, 160, 384});
}

TEST_CASE("catalog graphs are distinct, degree >= 2 and carry consistent data") {
  for (int n = 2; n <= 7; ++n) {
    const auto c = enumerate_partitions(n);
    std::set<std::string> keys;
    for (const auto& g : c.graphs) {
      CHECK(keys.insert(g.canonical_key).second);
      CHECK(g.order() == n);
      for (int v = 0; v < g.graph.num_nodes(); ++v) CHECK(g.graph.degree(v) >= 2);
      CHECK(g.coefficient == multinomial_coefficient(g.graph));
      CHECK(g.automorphisms == brute_automorphisms(g.graph));
      CHECK(induced_width(g.graph, g.elim_order) == g.width);
      CHECK(g.width == exact_elimination_order(g.graph).width);
      CHECK(g.max_clique == g.width + 1);
    }
    for (std::size_t i = 0; i < c.graphs.size(); ++i)
      for (std::size_t j = i + 1; j < c.graphs.size(); ++j)
        CHECK_FALSE(brute_isomorphic(c.graphs[i].graph, c.graphs[j].graph));
  }
}

TEST_CASE("canonical form agrees with brute-force isomorphism") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 200; ++t) {
    const int nodes = 3 + t % 4;
    const auto g = random_multigraph(rng, nodes, nodes + 2);
    std::vector<int> perm(static_cast<std::size_t>(nodes));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto h = g.relabeled(perm);
    const auto fg = canonical_form(g), fh = canonical_form(h);
    CHECK(fg.key == fh.key);
    CHECK(fg.automorphisms == brute_automorphisms(g));
    // Applying the labeling yields the same graph for both.
    CHECK(g.relabeled(fg.labeling) == h.relabeled(fh.labeling));

    const auto other = random_multigraph(rng, nodes, nodes + 2);
    CHECK((canonical_form(other).key == fg.key) == brute_isomorphic(other, g));
  }
}

TEST_CASE("elimination of the six-weight example graph") {
  // w_ij w_ij w_ik w_il w_jl w_kl with i, j, k, l = 0, 1, 2, 3.
  Multigraph g(4);
  g.add_edge(0, 1, 2);
  g.add_edge(0, 2);
  g.add_edge(0, 3);
  g.add_edge(1, 3);
  g.add_edge(2, 3);
  const int hand[] = {2, 3, 0, 1};  // k, l, i, j
  CHECK(induced_width(g, hand) == 2);
  const auto best = elimination_order(g);
  CHECK(best.width == 2);
  CHECK(best.order.front() == 2);  // k has the fewest neighbours and no fill
  CHECK(make_partition_graph(g).max_clique == 3);
  CHECK(multinomial_coefficient(g) == 360);  // 6! / 2!
}

TEST_CASE("clique measures") {
  Multigraph k4(4);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) k4.add_edge(a, b);
  CHECK(elimination_order(k4).width == 3);
  CHECK(simple_clique_number(k4) == 4);

  // The 4-cycle has no triangle but needs width 2.
  Multigraph c4(4);
  c4.add_edge(0, 1);
  c4.add_edge(1, 2);
  c4.add_edge(2, 3);
  c4.add_edge(3, 0);
  CHECK(simple_clique_number(c4) == 2);
  CHECK(make_partition_graph(c4).max_clique == 3);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto g = random_multigraph(rng, 7, 12);
    CHECK(greedy_elimination_order(g).width >= exact_elimination_order(g).width);
    CHECK(elimination_order(g).width == exact_elimination_order(g).width);
  }
}

TEST_CASE("unsupported orders") {
  try {
    enumerate_partitions(10);
    FAIL("order 10 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedOrder);
  }
  CHECK_THROWS_AS(enumerate_partitions(1), Error);
}

TEST_CASE("catalog round trip") {
  for (int n = 2; n <= 6; ++n) {
    const auto c = enumerate_partitions(n);
    const auto back = parse_catalog(serialize_catalog(c), n);
    REQUIRE(back.graphs.size() == c.graphs.size());
    for (std::size_t i = 0; i < c.graphs.size(); ++i) {
      CHECK(back.graphs[i].graph == c.graphs[i].graph);
      CHECK(back.graphs[i].coefficient == c.graphs[i].coefficient);
      CHECK(back.graphs[i].canonical_key == c.graphs[i].canonical_key);
      CHECK(back.graphs[i].elim_order == c.graphs[i].elim_order);
    }
  }
  const auto path = temp_dir() / "order_5.json";
  save_catalog(enumerate_partitions(5), path);
  CHECK(load_catalog(path, 5).graphs.size() == 11);
  CHECK(catalog_file(temp_dir(), 7).filename() == "order_7.json");
}

TEST_CASE("checked-in catalogs match fresh enumeration") {
  const auto set = load_catalogs(default_catalog_dir(), 9);
  for (int n = 2; n <= 9; ++n) {
    const auto fresh = enumerate_partitions(n);
    const auto& stored = set.at(n);
    REQUIRE(stored.graphs.size() == fresh.graphs.size());
    std::set<std::string> a, b;
    for (const auto& g : stored.graphs) a.insert(g.canonical_key);
    for (const auto& g : fresh.graphs) b.insert(g.canonical_key);
    CHECK(a == b);
  }
}

TEST_CASE("hand-written order 2 catalog") {
  const char* text = R"json({
    "format_version": 1,
    "order": 2,
    "convention_tag": "free-index-sum/automorphisms;coef=n!/prod(mult!)",
    "graphs": [
      {"nodes": 2, "edges": [[0, 1, 2]], "coefficient": 1, "automorphisms": 2,
       "elim_order": [1, 0], "width": 1, "max_clique": 2}
    ]
  })json";
  const auto c = parse_catalog(text, 2);
  REQUIRE(c.graphs.size() == 1);
  CHECK(c.graphs[0].endpoint_partitions() == 2);
}

TEST_CASE("malformed catalogs are rejected") {
  const std::string good = serialize_catalog(enumerate_partitions(4));
  auto code_of = [](const std::string& text, std::optional<int> order = std::nullopt) {
    try {
      parse_catalog(text, order);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;  // sentinel: nothing thrown
  };
  CHECK(code_of(good.substr(0, good.size() / 2)) == ErrorCode::Parse);
  try {
    parse_catalog(good.substr(0, good.size() / 2));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  std::string v2 = good;
  v2.replace(v2.find("\"format_version\": 1"), 19, "\"format_version\": 2");
  CHECK(code_of(v2) == ErrorCode::Version);
  CHECK(code_of(good, 5) == ErrorCode::Version);

  std::string tag = good;
  tag.replace(tag.find("coef="), 5, "cofe=");
  CHECK(code_of(tag) == ErrorCode::Version);

  const char* degree_one = R"json({"format_version": 1, "order": 2,
    "convention_tag": "free-index-sum/automorphisms;coef=n!/prod(mult!)",
    "graphs": [{"nodes": 3, "edges": [[0, 1, 1], [1, 2, 1]], "coefficient": 2,
                "automorphisms": 2, "elim_order": [0, 1, 2], "width": 1, "max_clique": 2}]})json";
  CHECK(code_of(degree_one) == ErrorCode::Parse);

  const char* bad_aut = R"json({"format_version": 1, "order": 2,
    "convention_tag": "free-index-sum/automorphisms;coef=n!/prod(mult!)",
    "graphs": [{"nodes": 2, "edges": [[0, 1, 2]], "coefficient": 1, "automorphisms": 1,
                "elim_order": [0, 1], "width": 1, "max_clique": 2}]})json";
  CHECK(code_of(bad_aut) == ErrorCode::Parse);

  const char* duplicate = R"json({"format_version": 1, "order": 2,
    "convention_tag": "free-index-sum/automorphisms;coef=n!/prod(mult!)",
    "graphs": [{"nodes": 2, "edges": [[0, 1, 2]], "coefficient": 1, "automorphisms": 2,
                "elim_order": [0, 1], "width": 1, "max_clique": 2},
               {"nodes": 2, "edges": [[1, 0, 2]], "coefficient": 1, "automorphisms": 2,
                "elim_order": [1, 0], "width": 1, "max_clique": 2}]})json";
  CHECK(code_of(duplicate) == ErrorCode::Parse);

  try {
    load_catalog(temp_dir() / "does_not_exist.json");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingCatalog);
  }
}
