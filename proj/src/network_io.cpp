#include "polybound/network_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polybound/error.hpp"

namespace polybound {

using nlohmann::json;

std::string serialize_network(const BoltzmannMachine& bm) {
  const int n = bm.size();
  json j;
  j["N"] = n;
  std::vector<double> theta(bm.thresholds().data(), bm.thresholds().data() + n);
  j["theta"] = theta;
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) upper.push_back(bm.weights()(i, k));
  j["weights_upper_triangle"] = upper;
  // nlohmann prints doubles with round-trip precision.
  return j.dump(2) + "\n";
}

BoltzmannMachine parse_network(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("network: malformed JSON: ") + e.what());
  }
  try {
    const int n = j.at("N").get<int>();
    if (n < 1) throw Error(ErrorCode::Parse, "network: N must be positive");
    const auto theta = j.at("theta").get<std::vector<double>>();
    const auto upper = j.at("weights_upper_triangle").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != n) throw Error(ErrorCode::Parse, "network: theta must have N entries");
    if (upper.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2) {
      throw Error(ErrorCode::Parse, "network: weights_upper_triangle must have N(N-1)/2 entries");
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        w(a, b) = upper[idx++];
        w(b, a) = w(a, b);
      }
    }
    return BoltzmannMachine(std::move(w), Eigen::Map<const Eigen::VectorXd>(theta.data(), n));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("network: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    throw Error(ErrorCode::Parse, std::string("network: ") + e.what());
  }
}

void save_network(const BoltzmannMachine& bm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << serialize_network(bm);
}

BoltzmannMachine load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open network file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

}  // namespace polybound
