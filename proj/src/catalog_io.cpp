#include "polybound/catalog_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polybound/error.hpp"

namespace polybound {

using nlohmann::json;

namespace {

json graph_to_json(const PartitionGraph& g) {
  json edges = json::array();
  for (const auto& e : g.graph.edges()) edges.push_back({e.a, e.b, e.multiplicity});
  json j;
  j["nodes"] = g.graph.num_nodes();
  j["edges"] = std::move(edges);
  j["coefficient"] = g.coefficient;
  j["automorphisms"] = g.automorphisms;
  j["elim_order"] = g.elim_order;
  j["width"] = g.width;
  j["max_clique"] = g.max_clique;
  return j;
}

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Parse, "catalog: " + msg); }

template <typename T>
T field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name)) fail(where + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    fail(where + ": field '" + name + "' has the wrong type");
  }
}

PartitionGraph graph_from_json(const json& j, int order, const std::string& where) {
  if (!j.is_object()) fail(where + ": expected an object");
  const int nodes = field<int>(j, "nodes", where);
  if (nodes < 2 || nodes > 2 * kMaxCatalogOrder) fail(where + ": bad node count");
  Multigraph g(nodes);
  for (const auto& e : field<json>(j, "edges", where)) {
    if (!e.is_array() || e.size() != 3) fail(where + ": edges must be [a, b, multiplicity]");
    try {
      g.add_edge(e[0].get<int>(), e[1].get<int>(), e[2].get<int>());
    } catch (const Error& err) {
      fail(where + ": " + err.what());
    } catch (const json::exception&) {
      fail(where + ": edge entries must be integers");
    }
  }
  if (g.total_multiplicity() != order) fail(where + ": edge multiplicities do not add up to the order");
  for (int v = 0; v < nodes; ++v)
    if (g.degree(v) < 2) fail(where + ": node " + std::to_string(v) + " has degree < 2");

  PartitionGraph pg;
  pg.graph = g;
  pg.coefficient = field<std::uint64_t>(j, "coefficient", where);
  pg.automorphisms = field<std::uint64_t>(j, "automorphisms", where);
  pg.elim_order = field<std::vector<int>>(j, "elim_order", where);
  pg.width = field<int>(j, "width", where);
  pg.max_clique = field<int>(j, "max_clique", where);
  if (pg.coefficient == 0 || pg.automorphisms == 0) fail(where + ": coefficients must be positive");
  if (pg.coefficient != multinomial_coefficient(g)) fail(where + ": coefficient does not match the edge multiplicities");

  std::vector<int> sorted = pg.elim_order;
  std::sort(sorted.begin(), sorted.end());
  for (int v = 0; v < nodes; ++v)
    if (static_cast<int>(sorted.size()) != nodes || sorted[static_cast<std::size_t>(v)] != v)
      fail(where + ": elim_order is not a permutation of the nodes");
  if (induced_width(g, pg.elim_order) != pg.width) fail(where + ": width does not match elim_order");

  const CanonicalForm form = canonical_form(g);
  pg.canonical_key = form.key;
  if (form.automorphisms != pg.automorphisms) fail(where + ": automorphism count mismatch");
  return pg;
}

}  // namespace

std::string serialize_catalog(const GraphCatalog& catalog) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"format_version\": " << kCatalogFormatVersion << ",\n";
  os << "  \"order\": " << catalog.order << ",\n";
  os << "  \"convention_tag\": " << json(catalog.convention_tag).dump() << ",\n";
  os << "  \"graphs\": [";
  for (std::size_t i = 0; i < catalog.graphs.size(); ++i) {
    os << (i == 0 ? "\n    " : ",\n    ") << graph_to_json(catalog.graphs[i]).dump();
  }
  os << "\n  ]\n}\n";
  return os.str();
}

GraphCatalog parse_catalog(std::string_view text, std::optional<int> expected_order) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "catalog: malformed JSON at line " +
                                      std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");

  const int version = field<int>(doc, "format_version", "header");
  if (version != kCatalogFormatVersion) {
    throw Error(ErrorCode::Version, "catalog: format version " + std::to_string(version) +
                                        ", expected " + std::to_string(kCatalogFormatVersion));
  }
  GraphCatalog catalog;
  catalog.order = field<int>(doc, "order", "header");
  catalog.convention_tag = field<std::string>(doc, "convention_tag", "header");
  if (expected_order && *expected_order != catalog.order) {
    throw Error(ErrorCode::Version, "catalog: file holds order " + std::to_string(catalog.order) +
                                        ", expected " + std::to_string(*expected_order));
  }
  if (catalog.convention_tag != kConventionTag) {
    throw Error(ErrorCode::Version, "catalog: unknown convention '" + catalog.convention_tag + "'");
  }
  if (catalog.order < kMinCatalogOrder || catalog.order > kMaxCatalogOrder) {
    throw Error(ErrorCode::UnsupportedOrder, "catalog: unsupported order " + std::to_string(catalog.order));
  }
  const json& graphs = field<json>(doc, "graphs", "header");
  if (!graphs.is_array()) fail("'graphs' must be an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    catalog.graphs.push_back(graph_from_json(graphs[i], catalog.order, "graph " + std::to_string(i)));
    if (!seen.insert(catalog.graphs.back().canonical_key).second) {
      fail("graph " + std::to_string(i) + " duplicates an earlier graph");
    }
  }
  return catalog;
}

void save_catalog(const GraphCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize_catalog(catalog);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

GraphCatalog load_catalog(const std::filesystem::path& path, std::optional<int> expected_order) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MissingCatalog, "cannot open catalog " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_catalog(buf.str(), expected_order);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::filesystem::path catalog_file(const std::filesystem::path& dir, int order) {
  return dir / ("order_" + std::to_string(order) + ".json");
}

CatalogSet load_catalogs(const std::filesystem::path& dir, int max_order) {
  CatalogSet set;
  for (int n = kMinCatalogOrder; n <= max_order; ++n) {
    const auto path = catalog_file(dir, n);
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::MissingCatalog,
                  "no partition catalog for order " + std::to_string(n) + " (expected " +
                      path.string() + "; generate it with `polybound catalog`)");
    }
    set.emplace(n, load_catalog(path, n));
  }
  return set;
}

std::filesystem::path default_catalog_dir() {
#ifdef POLYBOUND_CATALOG_DIR
  return POLYBOUND_CATALOG_DIR;
#else
  return "data/catalog";
#endif
}

}  // namespace polybound
