#include "polybound/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "polybound/error.hpp"

namespace polybound {

using nlohmann::json;

void SweepConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::Configuration, "sweep config: " + msg); };
  if (n < 2) bad("N must be at least 2 (correlation of units 0 and 1)");
  if (n > kMaxEnumerationUnits) bad("N above " + std::to_string(kMaxEnumerationUnits) + " cannot be checked exactly");
  if (!(sigma_theta >= 0.0)) bad("sigma_theta must be >= 0");
  if (sigma_w_grid.empty()) bad("sigma_w_grid is empty");
  for (double s : sigma_w_grid)
    if (!(s >= 0.0)) bad("sigma_w_grid values must be >= 0");
  if (orders.empty()) bad("orders is empty");
  for (int k : orders) {
    if (k < 2 || k % 2 != 0) bad("orders must be even and >= 2");
    if (path == EvaluatorPath::Graph && k > kMaxGraphBoundOrder) {
      bad("order " + std::to_string(k) + " requires path \"brute\"");
    }
  }
  if (networks_per_point < 1) bad("networks_per_point must be positive");
  if (group_size < 1) bad("group_size must be positive");
  if (mf_starts.empty()) bad("mf_start is empty");
  if (threads < 0) bad("threads must be >= 0");
}

SweepConfig parse_sweep_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, std::string("sweep config: malformed JSON: ") + e.what());
  }
  SweepConfig c;
  try {
    if (j.contains("N")) c.n = j.at("N").get<int>();
    if (j.contains("sigma_theta")) c.sigma_theta = j.at("sigma_theta").get<double>();
    if (j.contains("sigma_w_grid")) c.sigma_w_grid = j.at("sigma_w_grid").get<std::vector<double>>();
    if (j.contains("orders")) c.orders = j.at("orders").get<std::vector<int>>();
    if (j.contains("networks_per_point")) c.networks_per_point = j.at("networks_per_point").get<int>();
    if (j.contains("group_size")) c.group_size = j.at("group_size").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mf_start")) {
      const auto& s = j.at("mf_start");
      c.mf_starts.clear();
      if (s.is_array()) {
        for (const auto& e : s) c.mf_starts.push_back(parse_mean_field_start(e.get<std::string>()));
      } else {
        c.mf_starts.push_back(parse_mean_field_start(s.get<std::string>()));
      }
    }
    if (j.contains("evaluator_path")) c.path = parse_evaluator_path(j.at("evaluator_path").get<std::string>());
    if (j.contains("correlations")) c.correlations = j.at("correlations").get<bool>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string sweep_config_to_json(const SweepConfig& c) {
  json j;
  j["N"] = c.n;
  j["sigma_theta"] = c.sigma_theta;
  j["sigma_w_grid"] = c.sigma_w_grid;
  j["orders"] = c.orders;
  j["networks_per_point"] = c.networks_per_point;
  j["group_size"] = c.group_size;
  j["seed"] = c.seed;
  json starts = json::array();
  for (auto s : c.mf_starts) starts.push_back(to_string(s));
  j["mf_start"] = starts;
  j["evaluator_path"] = to_string(c.path);
  j["correlations"] = c.correlations;
  return j.dump();
}

std::uint64_t network_seed(std::uint64_t base, std::size_t point, std::size_t index) {
  // splitmix64 over a mix of the three inputs.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(point) * 0x100000001B3ull +
                                                    static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rows of one network: |mf_starts| x |orders|.
std::vector<SweepRow> run_network(const SweepConfig& c, const CatalogSet* catalogs, double sigma_w,
                                  std::uint64_t seed) {
  std::vector<SweepRow> rows;
  const BoltzmannMachine bm = sk_random(c.n, sigma_w, c.sigma_theta, seed);
  double log_z = kNaN;
  double corr_exact = kNaN;
  std::string shared_error;
  try {
    log_z = exact_log_partition(bm);
    corr_exact = exact_correlation(bm, 0, 1);
  } catch (const Error& e) {
    shared_error = e.what();
  }

  for (MeanFieldStart start : c.mf_starts) {
    BoundOptions opts;
    opts.path = c.path;
    opts.mf_start = start;
    opts.catalogs = catalogs;

    std::vector<SweepRow> block(c.orders.size());
    for (std::size_t k = 0; k < c.orders.size(); ++k) {
      auto& r = block[k];
      r.seed = seed;
      r.sigma_w = sigma_w;
      r.order = c.orders[k];
      r.log_z_exact = log_z;
      r.corr_exact_12 = corr_exact;
      r.mf_start = start;
      r.path = c.path;
      r.log_bound = kNaN;
      r.rel_error = kNaN;
      r.corr_approx_12 = kNaN;
      r.error = shared_error;
    }
    try {
      const auto bounds = lower_bounds_log_z(bm, c.orders, opts);
      std::vector<double> corr(c.orders.size(), kNaN);
      bool corr_converged = true;
      if (c.correlations) corr = approx_correlations(bm, 0, 1, c.orders, opts, &corr_converged);
      for (std::size_t k = 0; k < c.orders.size(); ++k) {
        auto& r = block[k];
        const auto& b = bounds[k];
        r.log_bound = b.log_bound;
        r.converged = b.mean_field.converged && corr_converged;
        r.path = b.evaluator_path;
        r.corr_approx_12 = corr[k];
        if (!b.valid) {
          r.error = "inner sum not positive";
        } else if (std::isfinite(log_z)) {
          r.rel_error = relative_error(b.log_bound, log_z);
        }
      }
    } catch (const Error& e) {
      for (auto& r : block) r.error = e.what();
    }
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string metadata(const SweepConfig& c) {
  std::ostringstream os;
  os << "# config=" << sweep_config_to_json(c) << "\n";
  os << "# rng=" << kRngName << "\n";
  os << "# mean_field: tol=1e-12 max_iter=10000 damping=0.5\n";
  return os.str();
}

}  // namespace

std::pair<double, double> grouped_mean_and_spread(const std::vector<double>& values, int group_size) {
  std::vector<double> means;
  for (std::size_t start = 0; start < values.size(); start += static_cast<std::size_t>(group_size)) {
    const std::size_t end = std::min(values.size(), start + static_cast<std::size_t>(group_size));
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = start; i < end; ++i) {
      if (std::isnan(values[i])) continue;
      sum += values[i];
      ++count;
    }
    if (count > 0) means.push_back(sum / count);
  }
  if (means.empty()) return {kNaN, kNaN};
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  if (means.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(means.size() - 1);
  return {mean, std::sqrt(var)};
}

SweepResult run_sweep(const SweepConfig& c, const CatalogSet* catalogs) {
  c.validate();
  const std::size_t points = c.sigma_w_grid.size();
  const auto per_point = static_cast<std::size_t>(c.networks_per_point);
  const std::size_t jobs = points * per_point;

  std::vector<std::vector<SweepRow>> slots(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t point = job / per_point;
      const std::size_t index = job % per_point;
      slots[job] = run_network(c, catalogs, c.sigma_w_grid[point], network_seed(c.seed, point, index));
    }
  };
  unsigned threads = c.threads > 0 ? static_cast<unsigned>(c.threads) : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(jobs, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  SweepResult result;
  for (auto& s : slots) result.rows.insert(result.rows.end(), s.begin(), s.end());

  // Aggregates per (sigma_w, mf_start, order), networks in seed order.
  for (std::size_t point = 0; point < points; ++point) {
    for (std::size_t si = 0; si < c.mf_starts.size(); ++si) {
      for (std::size_t k = 0; k < c.orders.size(); ++k) {
        AggregateRow a;
        a.sigma_w = c.sigma_w_grid[point];
        a.order = c.orders[k];
        a.mf_start = c.mf_starts[si];
        std::vector<double> errs, sq;
        for (std::size_t net = 0; net < per_point; ++net) {
          const auto& r = slots[point * per_point + net][si * c.orders.size() + k];
          ++a.networks;
          if (!r.error.empty()) ++a.failures;
          errs.push_back(r.error.empty() ? r.rel_error : kNaN);
          const double d = r.corr_approx_12 - r.corr_exact_12;
          sq.push_back(r.error.empty() ? d * d : kNaN);
        }
        std::tie(a.mean_rel_error, a.sem_rel_error) = grouped_mean_and_spread(errs, c.group_size);
        std::tie(a.mean_corr_mse, a.sem_corr_mse) = grouped_mean_and_spread(sq, c.group_size);
        result.aggregates.push_back(a);
      }
    }
  }
  return result;
}

std::string rows_to_csv(const SweepResult& result, const SweepConfig& config) {
  std::ostringstream os;
  os << metadata(config);
  os << "seed,sigma_w,K,log_z_exact,log_bound,rel_error,corr_exact_12,corr_approx_12,mf_start,converged,path,error\n";
  for (const auto& r : result.rows) {
    os << r.seed << ',' << fmt(r.sigma_w) << ',' << r.order << ',' << fmt(r.log_z_exact) << ','
       << fmt(r.log_bound) << ',' << fmt(r.rel_error) << ',' << fmt(r.corr_exact_12) << ','
       << fmt(r.corr_approx_12) << ',' << to_string(r.mf_start) << ',' << (r.converged ? 1 : 0) << ','
       << to_string(r.path) << ',' << csv_quote(r.error) << '\n';
  }
  return os.str();
}

std::string aggregates_to_csv(const SweepResult& result, const SweepConfig& config) {
  std::ostringstream os;
  os << metadata(config);
  os << "sigma_w,K,mf_start,networks,failures,mean_rel_error,sd_of_group_means_rel_error,"
        "mean_corr_mse,sd_of_group_means_corr_mse\n";
  for (const auto& a : result.aggregates) {
    os << fmt(a.sigma_w) << ',' << a.order << ',' << to_string(a.mf_start) << ',' << a.networks << ','
       << a.failures << ',' << fmt(a.mean_rel_error) << ',' << fmt(a.sem_rel_error) << ','
       << fmt(a.mean_corr_mse) << ',' << fmt(a.sem_corr_mse) << '\n';
  }
  return os.str();
}

}  // namespace polybound
