#include "polybound/poly_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polybound/error.hpp"

namespace polybound {

namespace {

void check_order(int order, int max_order) {
  if (order < 2 || order % 2 != 0 || order > max_order) {
    throw Error(ErrorCode::InvalidOrder,
                "bound order must be even and in [2, " +
                    std::to_string(max_order) + "], got " +
                    std::to_string(order));
  }
}

// One level of the double-integration recursion:
//   next[n+2] = prev[n] / ((n+2)(n+1))
//   next[1]   = c1 - sum_n prev[n] mu^(n+1) / (n+1)
//   next[0]   = c0 + sum_n prev[n] mu^(n+2) / (n+2)
// `prev` and `next` have the same length; entries beyond the top degree of
// `prev` are zero so the shift never overflows.
void step_level(const std::vector<double>& prev, double mu, double c1,
                double c0, std::vector<double>& next) {
  const std::size_t len = prev.size();
  std::fill(next.begin(), next.end(), 0.0);
  double s1 = 0.0;
  double s0 = 0.0;
  double mu_pow = mu;  // mu^(n+1)
  for (std::size_t n = 0; n < len; ++n) {
    const double a = prev[n];
    if (a != 0.0) {
      if (n + 2 < len) {
        next[n + 2] = a / (static_cast<double>(n + 2) * static_cast<double>(n + 1));
      }
      s1 += a * mu_pow / static_cast<double>(n + 1);
      s0 += a * mu_pow * mu / static_cast<double>(n + 2);
    }
    mu_pow *= mu;
  }
  next[1] = c1 - s1;
  next[0] = c0 + s0;
}

void check_mus(std::span<const double> mus, int order, int absent_levels) {
  const auto levels = static_cast<std::size_t>(order / 2);
  if (mus.size() != levels) {
    throw Error(ErrorCode::InvalidParameter,
                "expected " + std::to_string(levels) +
                    " variational parameters, got " +
                    std::to_string(mus.size()));
  }
  for (std::size_t l = static_cast<std::size_t>(absent_levels); l < levels; ++l) {
    if (!std::isfinite(mus[l])) {
      throw Error(ErrorCode::InvalidParameter,
                  "variational parameter mu_" + std::to_string(2 * l) +
                      " is not finite");
    }
  }
}

// Runs levels [first_level, order/2) starting from `coeffs`. Levels below
// `absent_levels` contribute no exponential terms.
void run_levels(std::vector<double>& coeffs, std::span<const double> mus,
                int first_level, int order, int absent_levels) {
  std::vector<double> next(coeffs.size());
  for (int l = first_level; l < order / 2; ++l) {
    const double mu = l < absent_levels ? 0.0 : mus[static_cast<std::size_t>(l)];
    const double e = l < absent_levels ? 0.0 : std::exp(mu);
    step_level(coeffs, mu, e, e * (1.0 - mu), next);
    coeffs.swap(next);
  }
}

}  // namespace

BoundPolynomial build_coefficients(std::span<const double> mus, int order,
                                   int max_order) {
  return build_coefficients(mus, order, 0, max_order);
}

BoundPolynomial build_coefficients(std::span<const double> mus, int order,
                                   int absent_levels, int max_order) {
  check_order(order, max_order);
  if (absent_levels < 0 || absent_levels > order / 2) {
    throw Error(ErrorCode::InvalidParameter, "absent level count out of range");
  }
  check_mus(mus, order, absent_levels);

  BoundPolynomial poly;
  poly.order = order;
  poly.mus.assign(mus.begin(), mus.end());
  poly.absent_levels = absent_levels;
  poly.coeffs.assign(static_cast<std::size_t>(order), 0.0);
  run_levels(poly.coeffs, mus, 0, order, absent_levels);
  return poly;
}

double eval_poly(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double eval_bound(const BoundPolynomial& poly, double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::InvalidParameter, "bound evaluated at non-finite x");
  }
  return eval_poly(poly.coeffs, x);
}

double expect_poly(std::span<const double> coeffs, const MomentVector& moments) {
  if (moments.size() < coeffs.size()) {
    throw Error(ErrorCode::Configuration,
                "moment vector has " + std::to_string(moments.size()) +
                    " entries, need " + std::to_string(coeffs.size()));
  }
  // Sum from the highest degree down; high-order terms are usually the
  // smallest for the moment sequences seen here.
  double acc = 0.0;
  for (std::size_t n = coeffs.size(); n-- > 0;) acc += coeffs[n] * moments[n];
  return acc;
}

DerivativeStructure build_derivative(std::span<const double> mus, int order,
                                     int index) {
  return build_derivative(build_coefficients(mus, order), index);
}

DerivativeStructure build_derivative(const BoundPolynomial& poly, int index) {
  const int order = poly.order;
  if (index < 0 || index % 2 != 0 || index > order - 2) {
    throw Error(ErrorCode::InvalidIndex,
                "derivative index must be even and in [0, " +
                    std::to_string(order - 2) + "], got " +
                    std::to_string(index));
  }
  const int level = index / 2;
  const auto len = static_cast<std::size_t>(order);

  DerivativeStructure d;
  d.wrt_index = index;

  if (level < poly.absent_levels) {
    d.gap = 0.0;
  } else {
    // Coefficients A_{index;n}: the bound built from the levels below.
    std::vector<double> lower(len, 0.0);
    run_levels(lower, poly.mus, 0, index, poly.absent_levels);
    const double mu = poly.mus[static_cast<std::size_t>(level)];
    d.gap = std::exp(mu) - eval_poly(lower, mu);
  }

  const double mu_i = poly.mus[static_cast<std::size_t>(level)];
  auto propagate = [&](double seed1, double seed0) {
    std::vector<double> c(len, 0.0);
    c[1] = seed1;
    c[0] = seed0;
    std::vector<double> next(len);
    for (int l = level + 1; l < order / 2; ++l) {
      step_level(c, poly.mus[static_cast<std::size_t>(l)], 0.0, 0.0, next);
      c.swap(next);
    }
    return c;
  };

  d.x_poly = propagate(1.0, 0.0);
  d.y_poly = propagate(0.0, -1.0);
  d.coeffs_prime = propagate(d.gap, -(level < poly.absent_levels ? 0.0 : mu_i) * d.gap);
  return d;
}

std::vector<double> optimal_mus(const MomentVector& moments, int order) {
  check_order(order, std::max(order, kDefaultMaxOrder));
  const auto len = static_cast<std::size_t>(order);
  if (moments.size() < len) {
    throw Error(ErrorCode::Configuration,
                "order " + std::to_string(order) + " needs moments up to " +
                    std::to_string(order - 1));
  }
  for (std::size_t n = 0; n < len; ++n) {
    if (!std::isfinite(moments[n])) {
      throw Error(ErrorCode::InvalidParameter, "non-finite moment <dH^" +
                                                   std::to_string(n) + ">");
    }
  }

  std::vector<double> mus(len / 2, 0.0);
  if (len > 2 && moments[2] == 0.0) {
    // dH vanishes almost surely; the Taylor polynomial at zero is exact.
    return mus;
  }

  // X_i and Y_i only depend on mu_j with j > i, so the parameters can be
  // fixed from the top level down.
  std::vector<double> next(len);
  for (int level = static_cast<int>(len / 2) - 1; level >= 0; --level) {
    std::vector<double> x(len, 0.0), y(len, 0.0);
    x[1] = 1.0;
    y[0] = -1.0;
    for (int l = level + 1; l < order / 2; ++l) {
      const double mu = mus[static_cast<std::size_t>(l)];
      step_level(x, mu, 0.0, 0.0, next);
      x.swap(next);
      step_level(y, mu, 0.0, 0.0, next);
      y.swap(next);
    }
    const double ex = expect_poly(x, moments);
    const double ey = expect_poly(y, moments);
    if (ey == 0.0 || !std::isfinite(ey)) {
      throw Error(ErrorCode::DegenerateDenominator,
                  "<Y_" + std::to_string(2 * level) +
                      "(dH)> vanished; moments are not those of a distribution");
    }
    mus[static_cast<std::size_t>(level)] = -ex / ey;
  }
  return mus;
}

BoundPolynomial embed_next_order(const BoundPolynomial& poly) {
  std::vector<double> mus;
  mus.reserve(poly.mus.size() + 1);
  mus.push_back(0.0);
  mus.insert(mus.end(), poly.mus.begin(), poly.mus.end());
  return build_coefficients(mus, poly.order + 2, poly.absent_levels + 1,
                            std::max(kDefaultMaxOrder, poly.order + 2));
}

}  // namespace polybound
