#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mevdro/norms.hpp"

namespace mevdro::dro {

/// A region A of R^d_+ with an exact distance function
/// dist(x) = inf_{y in A} |y - x| under a chosen norm.
class RareSet {
 public:
  enum class Kind {
    Everything,     // all of R^d_+
    Box,            // lower <= x <= upper
    BoxComplement,  // x not <= upper, i.e. some x_k > upper_k
    UpperOrthant,   // x >= lower
    HalfSpace,      // normal . x >= offset
  };

  static RareSet everything(std::size_t dim);
  static RareSet box(std::vector<double> lower, std::vector<double> upper);
  static RareSet box_complement(std::vector<double> upper);
  static RareSet upper_orthant(std::vector<double> lower);
  static RareSet half_space(std::vector<double> normal, double offset);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }

  [[nodiscard]] bool contains(std::span<const double> x) const;
  /// Zero exactly on the closure of A; 1-Lipschitz under `norm`.
  [[nodiscard]] double distance(std::span<const double> x, Norm norm) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static RareSet from_json(const nlohmann::json& j);

 private:
  RareSet(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}
  void check(std::span<const double> x) const;

  Kind kind_;
  std::size_t dim_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> normal_;
  double offset_ = 0.0;
};

}  // namespace mevdro::dro
