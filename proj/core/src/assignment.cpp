#include "mevdro/assignment.hpp"

#include <cmath>
#include <limits>

#include "mevdro/error.hpp"

namespace mevdro {

Assignment solve_assignment(const RowMatrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw ValidationError("solve_assignment: cost matrix must be square");
  for (double c : cost.data()) {
    if (!std::isfinite(c)) throw ValidationError("solve_assignment: costs must be finite");
  }
  Assignment result;
  if (n == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based rows/columns; column 0 is the virtual source of each augmentation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.row_to_col[match[j] - 1] = j - 1;
  // Sum the chosen entries directly rather than trusting -v[0].
  for (std::size_t i = 0; i < n; ++i) result.cost += cost(i, result.row_to_col[i]);
  return result;
}

}  // namespace mevdro
