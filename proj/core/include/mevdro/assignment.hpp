#pragma once

#include <cstddef>
#include <vector>

#include "mevdro/matrix.hpp"

namespace mevdro {

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square matrix of finite costs,
/// O(n^3) shortest augmenting paths with dual potentials (Kuhn-Munkres).
Assignment solve_assignment(const RowMatrix& cost);

}  // namespace mevdro
