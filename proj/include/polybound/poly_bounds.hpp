#pragma once

// Odd-degree polynomial lower bounds on exp(x).
//
// A bound of order K (K even) is a polynomial B_K of degree K-1 built by
// integrating the trivial bound exp(x) >= 0 twice per level, K/2 times. Level
// k contributes one touching point mu_k. Every choice of the mu_k gives a
// valid lower bound; optimal_mus() picks the ones maximizing <B_K(dH)> for a
// given moment sequence in a single backward pass.

#include <span>
#include <vector>

#include "polybound/moments.hpp"

namespace polybound {

inline constexpr int kDefaultMaxOrder = 18;

struct BoundPolynomial {
  int order = 0;
  /// mus[l] is the touching point of level 2*l.
  std::vector<double> mus;
  /// The first `absent_levels` levels carry exp(mu) = 0 (mu -> -inf limit).
  /// Their entries in `mus` are ignored.
  int absent_levels = 0;
  /// coeffs[n] multiplies x^n, n = 0 .. order-1.
  std::vector<double> coeffs;
};

struct DerivativeStructure {
  int wrt_index = 0;
  /// Coefficients of dB_K/dmu_i.
  std::vector<double> coeffs_prime;
  /// exp(mu_i) - B_i(mu_i); zero for an absent level.
  double gap = 0.0;
  std::vector<double> x_poly;
  std::vector<double> y_poly;
};

/// Runs the coefficient recursion from the all-zero start through level
/// order-2. Throws InvalidOrder for odd/too small/too large orders and
/// InvalidParameter for non-finite touching points.
BoundPolynomial build_coefficients(std::span<const double> mus, int order,
                                   int max_order = kDefaultMaxOrder);

/// Same as above but with the first `absent_levels` levels contributing no
/// exponential terms.
BoundPolynomial build_coefficients(std::span<const double> mus, int order,
                                   int absent_levels, int max_order);

/// Horner evaluation of a dense coefficient list.
double eval_poly(std::span<const double> coeffs, double x);

double eval_bound(const BoundPolynomial& poly, double x);

/// sum_n coeffs[n] * moments[n]; moments must be at least as long as coeffs.
double expect_poly(std::span<const double> coeffs, const MomentVector& moments);

DerivativeStructure build_derivative(std::span<const double> mus, int order,
                                     int index);
DerivativeStructure build_derivative(const BoundPolynomial& poly, int index);

/// Backward pass mu_{K-2}, mu_{K-4}, ..., mu_0, each from
/// mu_i = -<X_i(dH)> / <Y_i(dH)>.
std::vector<double> optimal_mus(const MomentVector& moments, int order);

/// Order-(K+2) bound identical to `poly`: level 0 becomes absent and every
/// old touching point moves up one level.
BoundPolynomial embed_next_order(const BoundPolynomial& poly);

}  // namespace polybound
