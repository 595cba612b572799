#pragma once

// Boltzmann machines on +-1 units, the factorized mean-field reference
// distribution, and exact enumeration oracles.
//
// Energy convention: H(s) = 1/2 sum_ij w_ij s_i s_j + sum_i theta_i s_i with
// p(s) proportional to exp(H(s)).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polybound/moments.hpp"

namespace polybound {

inline constexpr int kMaxEnumerationUnits = 24;
inline constexpr int kDefaultMomentDegree = 9;

/// Generator identity written into output metadata.
inline constexpr const char* kRngName = "std::mt19937_64/std::normal_distribution(libstdc++)";

class BoltzmannMachine {
 public:
  BoltzmannMachine() = default;
  /// Validates symmetry, zero diagonal and finiteness.
  BoltzmannMachine(Eigen::MatrixXd weights, Eigen::VectorXd thresholds);

  int size() const { return static_cast<int>(thresholds_.size()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& thresholds() const { return thresholds_; }

  /// Copy with w_ij = w_ji = value.
  BoltzmannMachine with_weight(int i, int j, double value) const;
  /// Copy with every weight multiplied by `factor`.
  BoltzmannMachine scaled_weights(double factor) const;
  /// Copy with units renumbered: unit i becomes unit perm[i].
  BoltzmannMachine permuted(std::span<const int> perm) const;

  double energy(std::span<const int> spins) const;

 private:
  Eigen::MatrixXd weights_;
  Eigen::VectorXd thresholds_;
};

/// SK ensemble: theta_i ~ N(0, sigma_theta^2), w_ij ~ N(0, sigma_w^2 / N) for
/// i < j, mirrored. Thresholds are drawn first, then the upper triangle row
/// by row.
BoltzmannMachine sk_random(int n, double sigma_w, double sigma_theta, std::uint64_t seed);

enum class MeanFieldStart { Standard, Zero };

const char* to_string(MeanFieldStart start);
MeanFieldStart parse_mean_field_start(const std::string& name);

struct MeanFieldOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  /// Weight of the previous iterate: h <- d*h + (1-d)*(theta + W tanh h).
  double damping = 0.5;
  /// Corrected moments are tabulated for degrees 1..moment_degree.
  int moment_degree = kDefaultMomentDegree;
};

struct MeanFieldState {
  Eigen::VectorXd h;
  Eigen::VectorXd m;
  /// max_i |h_i - theta_i - sum_j w_ij m_j|
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
  /// moments_table[i][c] = M'_c(m_i), c = 0 .. moment_degree (entry 0 unused).
  std::vector<std::vector<double>> moments_table;

  int moment_degree() const {
    return moments_table.empty() ? 0 : static_cast<int>(moments_table.front().size()) - 1;
  }
};

/// Builds a state from given fields without iterating (residual is filled in,
/// converged reports residual <= tol).
MeanFieldState make_mean_field_state(const BoltzmannMachine& bm, const Eigen::VectorXd& h,
                                     const MeanFieldOptions& opts = {});

/// Damped fixed-point iteration of h = theta + W tanh(h). Non-convergence is
/// reported through the `converged` flag.
MeanFieldState solve_mean_field(const BoltzmannMachine& bm, const Eigen::VectorXd& init,
                                const MeanFieldOptions& opts = {});
/// Standard starts from h = theta, Zero from h = 0.
MeanFieldState solve_mean_field(const BoltzmannMachine& bm, MeanFieldStart start,
                                const MeanFieldOptions& opts = {});

/// Raw central moments M_c = <(s - m)^c> for c = 0..c_max.
std::vector<double> raw_moments(double m, int c_max);

/// Corrected (connected) moments M'_c for c = 0..c_max; entry 0 is unused
/// and set to zero. Throws InvalidMagnetization unless |m| < 1.
std::vector<double> corrected_moments(double m, int c_max);

/// log sum_s exp(H(s)) by Gray-code enumeration with a streaming
/// log-sum-exp. Throws TooLarge for N > 24.
double exact_log_partition(const BoltzmannMachine& bm);

/// <s_i s_j> under the exact Boltzmann distribution.
double exact_correlation(const BoltzmannMachine& bm, int i, int j);

/// <dH^n>, n = 0..n_max, for dH = H - H~ with H~ = sum_i h_i s_i + C and C
/// fixed by <dH> = 0. Valid for any fields h; when h solves the mean-field
/// equations the linear term vanishes.
MomentVector brute_force_delta_h_moments(const BoltzmannMachine& bm, const MeanFieldState& state,
                                         int n_max);

/// <(1/2 sum_ij w_ij (s_i - m_i)(s_j - m_j))^n> under the product
/// distribution with means m, for arbitrary m.
MomentVector brute_force_coupling_moments(const BoltzmannMachine& bm, std::span<const double> m,
                                          int n_max);

/// The centering constant C = 1/2 m'Wm + (theta - h).m
double centering_constant(const MeanFieldState& state, const BoltzmannMachine& bm);

/// log Z~ = sum_i log(2 cosh h_i) + C
double log_z_tilde(const MeanFieldState& state, const BoltzmannMachine& bm);

}  // namespace polybound
