#include "mevdro/line_search.hpp"

#include <algorithm>
#include <cmath>

#include "mevdro/error.hpp"

namespace mevdro {

LineSearchResult minimize_lambda(const std::function<double(double)>& objective, double delta,
                                 const LineSearchOptions& options) {
  if (!(delta >= 0.0)) throw ValidationError("minimize_lambda: delta must be >= 0");
  LineSearchResult best;
  auto consider = [&](double lambda, double value) {
    if (value < best.value) {
      best.value = value;
      best.lambda = lambda;
    }
  };
  best.value = objective(0.0);

  double hi = 1.0 / (delta + options.bracket_epsilon);
  double f_hi = objective(hi);
  consider(hi, f_hi);
  double f_next = objective(2.0 * hi);
  std::size_t expansions = 0;
  while (f_next < f_hi && expansions < options.max_expansions) {
    hi *= 2.0;
    f_hi = f_next;
    consider(hi, f_hi);
    f_next = objective(2.0 * hi);
    ++expansions;
  }
  if (f_next < f_hi) {
    consider(2.0 * hi, f_next);
    best.lo = hi;
    best.hi = 2.0 * hi;
    best.converged = false;
    return best;
  }

  // A convex function with f(2 hi) >= f(hi) attains its minimum on [0, 2 hi].
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0;
  double b = 2.0 * hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  consider(c, fc);
  consider(d, fd);
  // Relative above 1 so that wide brackets terminate in floating point.
  auto tol = [&] { return options.tolerance * std::max(1.0, std::abs(0.5 * (a + b))); };
  std::size_t it = 0;
  while (b - a > tol() && it < options.max_iterations) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
      consider(d, fd);
    }
    ++it;
  }
  // The best evaluated point can sit just outside the final bracket when the
  // objective is flat there.
  best.lo = std::min(a, best.lambda);
  best.hi = std::max(b, best.lambda);
  best.iterations = it;
  best.converged = (b - a) <= tol();
  return best;
}

}  // namespace mevdro
