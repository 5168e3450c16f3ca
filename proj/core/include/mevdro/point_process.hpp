#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mevdro/dependence.hpp"
#include "mevdro/matrix.hpp"
#include "mevdro/norms.hpp"
#include "mevdro/random.hpp"

namespace mevdro::pp {

/// Default truncation of the point process.
inline constexpr std::size_t kDefaultTruncation = 200;
/// Sampling stops once (max mark)/a_n < ratio * |M|_inf.
inline constexpr double kDefaultEarlyStopRatio = 1e-6;

/// A finite truncation of one realization of the radial-spectral point
/// process: strictly increasing arrivals a_1 < ... < a_N with marks y^(n).
class PointConfiguration {
 public:
  PointConfiguration(std::vector<double> arrivals, RowMatrix marks);

  [[nodiscard]] std::size_t size() const { return arrivals_.size(); }
  [[nodiscard]] std::size_t dim() const { return marks_.cols(); }
  [[nodiscard]] std::span<const double> arrivals() const { return arrivals_; }
  [[nodiscard]] double arrival(std::size_t n) const { return arrivals_[n]; }
  [[nodiscard]] std::span<const double> mark(std::size_t n) const { return marks_.row(n); }
  [[nodiscard]] const RowMatrix& marks() const { return marks_; }

  /// Same configuration with one more atom; its arrival must exceed the last.
  [[nodiscard]] PointConfiguration with_atom(double arrival, std::span<const double> mark) const;

  friend bool operator==(const PointConfiguration&, const PointConfiguration&) = default;

 private:
  std::vector<double> arrivals_;
  RowMatrix marks_;
};

enum class ArrivalPolicy {
  Fixed,  // moving an arrival costs infinity
  Free,   // arrivals move at cost |a - a'|
};

/// Per-atom transport cost. The scaling functional kappa is identically 1.
struct TransportCostSpec {
  ArrivalPolicy arrival_policy = ArrivalPolicy::Fixed;
  Norm mark_norm = Norm::L1;
};

/// Marks are d * w with w on the simplex, so E[y_k] = 1.
inline double mark_scale(std::size_t d) { return static_cast<double>(d); }

/// Arrivals are cumulative sums of unit exponentials; marks are d times
/// spectral draws from the model. Stops after `truncation` atoms or earlier,
/// when the remaining atoms can no longer move M (see kDefaultEarlyStopRatio).
PointConfiguration sample_configuration(Rng& rng, const evt::DependenceModel& model,
                                        std::size_t truncation, std::size_t d,
                                        double early_stop_ratio = kDefaultEarlyStopRatio);

/// Fresh marks on a given arrival sequence.
PointConfiguration sample_marks_on_arrivals(Rng& rng, const evt::DependenceModel& model,
                                            std::span<const double> arrivals, std::size_t d);

/// R independent configurations; replication r uses its own derived stream.
std::vector<PointConfiguration> sample_configurations(std::uint64_t seed,
                                                      const evt::DependenceModel& model,
                                                      std::size_t replications,
                                                      std::size_t truncation, std::size_t d,
                                                      std::size_t threads = 1);

/// Componentwise max over atoms of y^(n) / a^(n).
std::vector<double> max_stable_from_configuration(const PointConfiguration& cfg);

struct RadialSpectral {
  double radius = 0.0;
  std::vector<double> angle;
};

/// x -> (1/|x|_1, x/|x|_1). Throws DomainError when |x|_1 = 0.
RadialSpectral radial_spectral_transform(std::span<const double> x);
std::vector<double> inverse_radial_spectral_transform(const RadialSpectral& rs);

/// V^(n) = max_k y_k^(n) x_k per atom.
std::vector<double> v_statistic(const PointConfiguration& cfg, std::span<const double> x);

/// Transport distance between counting measures: infinity when the atom
/// counts differ, otherwise the minimum over matchings of the summed per-atom
/// cost.
double configuration_distance(const PointConfiguration& a, const PointConfiguration& b,
                              const TransportCostSpec& cost);

/// Upper bound on the expected number of atoms beyond the truncation that
/// could raise some coordinate of M: sum_k (d / M_k - a_N)^+.
double truncation_tail_bound(const PointConfiguration& cfg);

/// CSV with header replication,n,a,y_1,...,y_d (n is 1-based).
void write_configurations_csv(std::ostream& out, std::span<const PointConfiguration> cfgs);
std::vector<PointConfiguration> read_configurations_csv(std::istream& in);

}  // namespace mevdro::pp
