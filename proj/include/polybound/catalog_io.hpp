#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "polybound/graphs.hpp"

namespace polybound {

inline constexpr int kCatalogFormatVersion = 1;

/// JSON text with one graph per line so diffs stay readable.
std::string serialize_catalog(const GraphCatalog& catalog);

/// Throws Parse (with line number) on malformed text and Version when the
/// format version or the expected order does not match.
GraphCatalog parse_catalog(std::string_view text,
                           std::optional<int> expected_order = std::nullopt);

void save_catalog(const GraphCatalog& catalog, const std::filesystem::path& path);
GraphCatalog load_catalog(const std::filesystem::path& path,
                          std::optional<int> expected_order = std::nullopt);

/// File name used for an order inside a catalog directory: order_<n>.json.
std::filesystem::path catalog_file(const std::filesystem::path& dir, int order);

/// Catalogs keyed by order.
using CatalogSet = std::map<int, GraphCatalog>;

/// Loads orders 2..max_order from `dir`; throws MissingCatalog naming the
/// first absent order.
CatalogSet load_catalogs(const std::filesystem::path& dir, int max_order);

/// Directory of the catalogs shipped with the sources.
std::filesystem::path default_catalog_dir();

}  // namespace polybound
