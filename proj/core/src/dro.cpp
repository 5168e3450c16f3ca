#include "mevdro/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mevdro/error.hpp"
#include "mevdro/line_search.hpp"

namespace mevdro::dro {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_nonempty(std::span<const pp::PointConfiguration> cfgs, const char* who) {
  if (cfgs.empty()) throw ValidationError(std::string(who) + ": no configurations");
  const std::size_t d = cfgs.front().dim();
  for (const auto& c : cfgs) {
    if (c.dim() != d) throw ValidationError(std::string(who) + ": configurations differ in dimension");
  }
}

void check_delta(double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ValidationError("delta must be finite and >= 0");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha level must lie in (0, 1)");
}

double hinge_term(double lambda, double dist) {
  if (dist == kInf) return lambda > 0.0 ? 0.0 : 1.0;
  return std::max(0.0, 1.0 - lambda * dist);
}

}  // namespace

void RobustificationConfig::validate() const {
  check_delta(delta);
  check_alpha(alpha_level);
  if (truncation == 0) throw ValidationError("truncation must be >= 1");
  if (mc_replications == 0) throw ValidationError("mc_replications must be >= 1");
}

nlohmann::json DualSolveResult::to_json() const {
  return {{"lambda_star", lambda_star},     {"objective", objective},
          {"robust_value", robust_value},   {"converged", converged},
          {"iterations", iterations},       {"bracket", {bracket_lo, bracket_hi}}};
}

double hinge_dual_objective(double lambda, std::span<const double> distances, double weight,
                            double delta) {
  if (!(lambda >= 0.0)) throw ValidationError("hinge dual: lambda must be >= 0");
  double sum = 0.0;
  for (double d : distances) sum += hinge_term(lambda, d);
  return lambda * delta + weight * sum;
}

DualSolveResult solve_hinge_dual(std::span<const double> distances, double weight, double delta) {
  check_delta(delta);
  if (distances.empty()) throw ValidationError("hinge dual: no distances");
  std::vector<double> breakpoints;
  std::size_t zeros = 0;
  for (double d : distances) {
    if (!(d >= 0.0)) throw ValidationError("hinge dual: distances must be >= 0");
    if (d == 0.0) {
      ++zeros;
    } else if (d < kInf) {
      breakpoints.push_back(1.0 / d);
    }
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

  DualSolveResult r;
  if (delta == 0.0) {
    // Past the largest breakpoint every positive-distance hinge is zero.
    if (!breakpoints.empty()) {
      r.lambda_star = breakpoints.back();
    } else if (zeros < distances.size()) {
      r.lambda_star = 1.0;  // only infinite distances: any positive lambda
    }
    r.objective = weight * static_cast<double>(zeros);
    r.robust_value = r.objective;
    r.bracket_lo = r.bracket_hi = r.lambda_star;
    return r;
  }

  auto f = [&](double lambda) { return hinge_dual_objective(lambda, distances, weight, delta); };
  const LineSearchResult ls = minimize_lambda(f, delta);
  r.lambda_star = ls.lambda;
  r.objective = ls.value;
  r.bracket_lo = ls.lo;
  r.bracket_hi = ls.hi;
  r.iterations = ls.iterations;
  r.converged = ls.converged;
  auto try_lambda = [&](double lambda) {
    const double v = f(lambda);
    if (v < r.objective) {
      r.objective = v;
      r.lambda_star = lambda;
    }
  };
  try_lambda(0.0);
  const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), ls.lambda);
  if (it != breakpoints.end()) try_lambda(*it);
  if (it != breakpoints.begin()) try_lambda(*std::prev(it));
  r.robust_value = r.objective;
  return r;
}

std::vector<double> cdf_gaps(std::span<const pp::PointConfiguration> cfgs,
                             std::span<const double> x) {
  check_nonempty(cfgs, "cdf");
  std::vector<double> gaps;
  gaps.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    const auto v = pp::v_statistic(cfg, x);
    double g = kInf;
    for (std::size_t n = 0; n < v.size(); ++n) g = std::min(g, std::max(0.0, cfg.arrival(n) - v[n]));
    gaps.push_back(g);
  }
  return gaps;
}

double baseline_cdf(std::span<const pp::PointConfiguration> cfgs, std::span<const double> x) {
  const auto gaps = cdf_gaps(cfgs, x);
  const auto hits = std::count_if(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; });
  return static_cast<double>(hits) / static_cast<double>(gaps.size());
}

double cdf_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                          std::span<const double> x, double delta) {
  const auto gaps = cdf_gaps(cfgs, x);
  return hinge_dual_objective(lambda, gaps, 1.0 / static_cast<double>(gaps.size()), delta);
}

DualSolveResult robust_cdf(std::span<const pp::PointConfiguration> cfgs,
                           std::span<const double> x, double delta) {
  const auto gaps = cdf_gaps(cfgs, x);
  DualSolveResult r = solve_hinge_dual(gaps, 1.0 / static_cast<double>(gaps.size()), delta);
  r.robust_value = 1.0 - r.objective;
  return r;
}

double cdf_minimizer_value(std::span<const pp::PointConfiguration> cfgs,
                           std::span<const double> x, double lambda_star) {
  check_nonempty(cfgs, "cdf_minimizer_value");
  if (!(lambda_star >= 0.0)) throw ValidationError("cdf_minimizer_value: lambda must be >= 0");
  if (lambda_star == 0.0) return 0.0;
  const double shift = 1.0 / lambda_star;
  std::size_t count = 0;
  for (const auto& cfg : cfgs) {
    const auto v = pp::v_statistic(cfg, x);
    for (std::size_t n = 0; n < v.size(); ++n) count += v[n] > cfg.arrival(n) - shift;
  }
  return std::exp(-static_cast<double>(count) / static_cast<double>(cfgs.size()));
}

RowMatrix atoms(const pp::PointConfiguration& cfg) {
  RowMatrix out(cfg.size(), cfg.dim());
  for (std::size_t n = 0; n < cfg.size(); ++n) {
    const auto y = cfg.mark(n);
    for (std::size_t k = 0; k < cfg.dim(); ++k) out(n, k) = y[k] / cfg.arrival(n);
  }
  return out;
}

std::vector<double> rare_set_distances(std::span<const pp::PointConfiguration> cfgs,
                                       const RareSet& set, Norm norm) {
  check_nonempty(cfgs, "rare set");
  std::vector<double> out;
  out.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    const RowMatrix x = atoms(cfg);
    double best = kInf;
    for (std::size_t n = 0; n < x.rows() && best > 0.0; ++n) {
      best = std::min(best, set.distance(x.row(n), norm));
    }
    out.push_back(best);
  }
  return out;
}

double baseline_rare_set_probability(std::span<const pp::PointConfiguration> cfgs,
                                     const RareSet& set, Norm norm) {
  const auto d = rare_set_distances(cfgs, set, norm);
  const auto hits = std::count(d.begin(), d.end(), 0.0);
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

double rare_set_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                               const RareSet& set, Norm norm, double delta) {
  const auto d = rare_set_distances(cfgs, set, norm);
  return hinge_dual_objective(lambda, d, 1.0 / static_cast<double>(d.size()), delta);
}

DualSolveResult robust_rare_set_probability(std::span<const pp::PointConfiguration> cfgs,
                                            const RareSet& set, double delta, Norm norm) {
  const auto d = rare_set_distances(cfgs, set, norm);
  return solve_hinge_dual(d, 1.0 / static_cast<double>(d.size()), delta);
}

std::vector<double> atom_distances(std::span<const pp::PointConfiguration> cfgs,
                                   const RareSet& set, Norm norm) {
  check_nonempty(cfgs, "expected count");
  std::vector<double> out;
  for (const auto& cfg : cfgs) {
    const RowMatrix x = atoms(cfg);
    for (std::size_t n = 0; n < x.rows(); ++n) out.push_back(set.distance(x.row(n), norm));
  }
  return out;
}

double baseline_expected_count(std::span<const pp::PointConfiguration> cfgs,
                               const RareSet& set, Norm norm) {
  const auto d = atom_distances(cfgs, set, norm);
  const auto hits = std::count(d.begin(), d.end(), 0.0);
  return static_cast<double>(hits) / static_cast<double>(cfgs.size());
}

double count_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                            const RareSet& set, Norm norm, double delta) {
  const auto d = atom_distances(cfgs, set, norm);
  return hinge_dual_objective(lambda, d, 1.0 / static_cast<double>(cfgs.size()), delta);
}

DualSolveResult robust_expected_count(std::span<const pp::PointConfiguration> cfgs,
                                      const RareSet& set, double delta, Norm norm) {
  const auto d = atom_distances(cfgs, set, norm);
  return solve_hinge_dual(d, 1.0 / static_cast<double>(cfgs.size()), delta);
}

std::vector<double> cvar_statistics(std::span<const pp::PointConfiguration> cfgs) {
  check_nonempty(cfgs, "cvar");
  std::vector<double> out;
  out.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    double s = 0.0;
    for (std::size_t n = 0; n < cfg.size(); ++n) {
      s += norm(cfg.mark(n), Norm::Linf) / cfg.arrival(n);
    }
    out.push_back(s);
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double alpha_level) {
  check_alpha(alpha_level);
  if (values.empty()) throw ValidationError("empirical_quantile: no values");
  const double r = static_cast<double>(values.size());
  // The small slack keeps alpha * R = integer from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(alpha_level * r - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

double empirical_cvar(std::span<const double> values, double alpha_level) {
  const double q = empirical_quantile({values.begin(), values.end()}, alpha_level);
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (v > q) {
      sum += v;
      ++count;
    }
  }
  return count == 0 ? q : sum / static_cast<double>(count);
}

DualSolveResult robust_cvar_from_statistics(std::span<const double> stats, double delta,
                                            double alpha_level) {
  check_delta(delta);
  check_alpha(alpha_level);
  if (stats.empty()) throw ValidationError("robust_cvar: no statistics");
  DualSolveResult r;
  r.lambda_star = 1.0;
  r.bracket_lo = r.bracket_hi = 1.0;
  r.objective = delta / (1.0 - alpha_level) + empirical_cvar(stats, alpha_level);
  r.robust_value = r.objective;
  r.converged = static_cast<double>(stats.size()) * (1.0 - alpha_level) >= 1.0 - 1e-9;
  return r;
}

DualSolveResult robust_cvar(std::span<const pp::PointConfiguration> cfgs, double delta,
                            double alpha_level) {
  const auto stats = cvar_statistics(cfgs);
  return robust_cvar_from_statistics(stats, delta, alpha_level);
}

double cvar_inner_objective(const RowMatrix& x, const RowMatrix& y, double z, double lambda) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ValidationError("cvar_inner_objective: shape mismatch");
  }
  double total = 0.0;
  double moved = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    total += norm(y.row(n), Norm::Linf);
    moved += distance(y.row(n), x.row(n), Norm::Linf);
  }
  return std::max(0.0, total - z) - lambda * moved;
}

double cvar_inner_supremum(const RowMatrix& x, double z, double lambda) {
  if (!(lambda >= 0.0)) throw ValidationError("cvar_inner_supremum: lambda must be >= 0");
  if (lambda < 1.0) return kInf;
  double total = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) total += norm(x.row(n), Norm::Linf);
  return std::max(0.0, total - z);
}

}  // namespace mevdro::dro
