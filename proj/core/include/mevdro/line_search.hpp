#pragma once

#include <cstddef>
#include <functional>

namespace mevdro {

struct LineSearchOptions {
  double tolerance = 1e-8;  // on lambda; relative once lambda exceeds 1
  std::size_t max_iterations = 200;
  std::size_t max_expansions = 200;
  double bracket_epsilon = 1e-12;
};

struct LineSearchResult {
  double lambda = 0.0;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes a convex function of lambda >= 0 by golden-section search. The
/// upper end starts at 1/(delta + eps) and doubles while the objective keeps
/// decreasing. When it never stops decreasing the last upper end is returned
/// with converged = false. The best point seen, including lambda = 0, is
/// reported.
LineSearchResult minimize_lambda(const std::function<double(double)>& objective, double delta,
                                 const LineSearchOptions& options = {});

}  // namespace mevdro
