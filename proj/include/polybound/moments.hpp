#pragma once

#include <cstddef>
#include <vector>

namespace polybound {

/// Averages <dH^n> for n = 0 .. size()-1 under the factorized reference
/// distribution. values[0] is always 1.
struct MomentVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t n) const { return values[n]; }
};

}  // namespace polybound
