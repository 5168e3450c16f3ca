#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mevdro/matrix.hpp"
#include "mevdro/norms.hpp"
#include "mevdro/point_process.hpp"
#include "mevdro/rare_set.hpp"

namespace mevdro::dro {

struct RobustificationConfig {
  double delta = 0.0;
  double alpha_level = 0.95;
  Norm norm = Norm::L1;
  std::size_t truncation = pp::kDefaultTruncation;
  std::size_t mc_replications = 10000;
  std::uint64_t seed = 0;

  /// Throws ValidationError on delta < 0, alpha outside (0,1), zero counts.
  void validate() const;
};

struct DualSolveResult {
  double lambda_star = 0.0;
  double objective = 0.0;
  double robust_value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t iterations = 0;
  bool converged = true;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// lambda * delta + weight * sum_i (1 - lambda * dist_i)^+. Every hinge dual
/// (CDF, rare-set probability, expected count) is an instance of this.
double hinge_dual_objective(double lambda, std::span<const double> distances, double weight,
                            double delta);

/// Minimizes hinge_dual_objective over lambda >= 0. The golden-section result
/// is snapped to the neighbouring breakpoints 1/dist_i, where a piecewise
/// linear convex function attains its minimum. delta = 0 is solved
/// analytically: the value is weight * #{dist_i = 0}. robust_value is left
/// equal to the objective.
DualSolveResult solve_hinge_dual(std::span<const double> distances, double weight, double delta);

/// g_r = min_n (a_n - V_x^(n))^+ per configuration.
std::vector<double> cdf_gaps(std::span<const pp::PointConfiguration> cfgs,
                             std::span<const double> x);

/// Fraction of configurations with every atom strictly below the diagonal,
/// the sample estimate of P(M <= 1/x).
double baseline_cdf(std::span<const pp::PointConfiguration> cfgs, std::span<const double> x);

double cdf_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                          std::span<const double> x, double delta);

/// Worst-case P(M <= 1/x) over the transport ball: 1 - min_lambda of the
/// CDF dual.
DualSolveResult robust_cdf(std::span<const pp::PointConfiguration> cfgs,
                           std::span<const double> x, double delta);

/// exp(-mean #{n : V_x^(n) > a_n - 1/lambda}); 0 when lambda_star = 0.
double cdf_minimizer_value(std::span<const pp::PointConfiguration> cfgs,
                           std::span<const double> x, double lambda_star);

/// Atoms X^(n) = y^(n) / a_n of a configuration, one per row.
RowMatrix atoms(const pp::PointConfiguration& cfg);

/// d_r = min_n dist_A(X^(n)) per configuration.
std::vector<double> rare_set_distances(std::span<const pp::PointConfiguration> cfgs,
                                       const RareSet& set, Norm norm);

/// Fraction of configurations with an atom in the closure of A.
double baseline_rare_set_probability(std::span<const pp::PointConfiguration> cfgs,
                                     const RareSet& set, Norm norm);

double rare_set_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                               const RareSet& set, Norm norm, double delta);

DualSolveResult robust_rare_set_probability(std::span<const pp::PointConfiguration> cfgs,
                                            const RareSet& set, double delta,
                                            Norm norm = Norm::L1);

/// dist_A(X^(n)) for every atom of every configuration, concatenated.
std::vector<double> atom_distances(std::span<const pp::PointConfiguration> cfgs,
                                   const RareSet& set, Norm norm);

/// Mean number of atoms in the closure of A.
double baseline_expected_count(std::span<const pp::PointConfiguration> cfgs,
                               const RareSet& set, Norm norm);

double count_dual_objective(double lambda, std::span<const pp::PointConfiguration> cfgs,
                            const RareSet& set, Norm norm, double delta);

DualSolveResult robust_expected_count(std::span<const pp::PointConfiguration> cfgs,
                                      const RareSet& set, double delta, Norm norm = Norm::L1);

/// S_r = sum_n |X^(n)|_inf per configuration.
std::vector<double> cvar_statistics(std::span<const pp::PointConfiguration> cfgs);

/// Lower empirical alpha-quantile: the order statistic at ceil(alpha R).
double empirical_quantile(std::vector<double> values, double alpha_level);

/// Mean of the values strictly above the lower alpha-quantile (the quantile
/// itself when nothing lies above it).
double empirical_cvar(std::span<const double> values, double alpha_level);

/// delta / (1 - alpha) + empirical_cvar(S). lambda_star is 1, the threshold
/// below which the inner supremum diverges. converged is false when
/// R < 1 / (1 - alpha), where the tail holds no sample.
DualSolveResult robust_cvar_from_statistics(std::span<const double> stats, double delta,
                                            double alpha_level);
DualSolveResult robust_cvar(std::span<const pp::PointConfiguration> cfgs, double delta,
                            double alpha_level);

/// (sum_n |y_n|_inf - z)^+ - lambda * sum_n |y_n - x_n|_inf, rows are atoms.
double cvar_inner_objective(const RowMatrix& x, const RowMatrix& y, double z, double lambda);

/// Supremum of cvar_inner_objective over y >= 0: infinite for lambda < 1,
/// otherwise (sum_n |x_n|_inf - z)^+, attained at y = x.
double cvar_inner_supremum(const RowMatrix& x, double z, double lambda);

}  // namespace mevdro::dro
