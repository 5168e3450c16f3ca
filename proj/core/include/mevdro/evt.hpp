#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mevdro/dependence.hpp"
#include "mevdro/matrix.hpp"
#include "mevdro/random.hpp"

namespace mevdro::evt {

/// Inverse transform for F(x) = exp(-1/x).
inline double unit_frechet_from_uniform(double u) { return -1.0 / std::log(u); }

std::vector<double> sample_unit_frechet(Rng& rng, std::size_t n);

/// Exponent function of the symmetric logistic model. Throws DomainError on a
/// non-positive coordinate.
double sl_exponent(std::span<const double> x, double alpha);

double asl_exponent(std::span<const double> x, const AsymmetricLogistic& model);

/// Exponent function of the model. For a Mixture this is sum_c p_c V_c, the
/// exponent of the point process whose spectral measure is the mixture.
double exponent(std::span<const double> x, const DependenceModel& model);

/// P(M <= z) for samples produced by sample_max_stable. For a Mixture this is
/// the mixture of component CDFs.
double cdf(std::span<const double> z, const DependenceModel& model);

/// n independent max-stable vectors (rows) with unit Frechet margins, drawn by
/// positive-stable mixing. Mixtures pick one component per row.
RowMatrix sample_max_stable(Rng& rng, const DependenceModel& model, std::size_t n,
                            std::size_t d);

/// As sample_max_stable, also returning the mixture component of every row
/// (always 0 for non-mixture models).
RowMatrix sample_max_stable(Rng& rng, const DependenceModel& model, std::size_t n,
                            std::size_t d, std::vector<std::size_t>& labels);

/// n draws (rows) from the normalized spectral measure H on the unit simplex;
/// each coordinate has mean 1/d.
RowMatrix sample_spectral(Rng& rng, const DependenceModel& model, std::size_t n,
                          std::size_t d);

/// One spectral draw written into out (size d).
void sample_spectral_into(Rng& rng, const DependenceModel& model, std::span<double> out);

bool on_simplex(std::span<const double> w, double tol = 1e-12);

/// Kolmogorov-Smirnov statistic of a sample against the unit Frechet law.
double ks_statistic_unit_frechet(std::vector<double> sample);

}  // namespace mevdro::evt
