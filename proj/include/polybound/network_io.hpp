#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "polybound/model.hpp"

namespace polybound {

/// {"N": n, "theta": [...], "weights_upper_triangle": [w_01, w_02, ..., w_{n-2,n-1}]}
std::string serialize_network(const BoltzmannMachine& bm);
BoltzmannMachine parse_network(std::string_view text);

void save_network(const BoltzmannMachine& bm, const std::filesystem::path& path);
BoltzmannMachine load_network(const std::filesystem::path& path);

}  // namespace polybound
