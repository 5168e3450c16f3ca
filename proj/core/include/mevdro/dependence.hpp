#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace mevdro::evt {

/// Below this the logistic parameter is treated as the comonotone limit.
inline constexpr double kComonotoneAlpha = 1e-8;

/// Symmetric logistic: V(x) = (sum_k x_k^{-1/alpha})^alpha, 0 < alpha <= 1.
struct SymmetricLogistic {
  double alpha = 1.0;
};

/// One subset b of the asymmetric logistic model. members are zero-based,
/// strictly increasing coordinate indices; weights[j] is lambda_{members[j], b}.
struct AslSubset {
  std::vector<std::size_t> members;
  double alpha = 1.0;
  std::vector<double> weights;
};

/// Asymmetric logistic with per-coordinate weights summing to one across the
/// subsets that contain the coordinate.
struct AsymmetricLogistic {
  std::size_t dim = 0;
  std::vector<AslSubset> subsets;
};

class DependenceModel;

struct Mixture {
  std::vector<double> probabilities;
  std::vector<DependenceModel> components;
};

/// Parametric spectral dependence model. Construct through the factories,
/// which validate every invariant.
class DependenceModel {
 public:
  using Variant = std::variant<SymmetricLogistic, AsymmetricLogistic, Mixture>;

  static DependenceModel symmetric_logistic(double alpha);
  static DependenceModel asymmetric_logistic(std::size_t dim, std::vector<AslSubset> subsets);
  static DependenceModel mixture(std::vector<double> probabilities,
                                 std::vector<DependenceModel> components);

  [[nodiscard]] const Variant& variant() const { return model_; }

  /// Fixed dimension, if the model has one (SL works in any dimension).
  [[nodiscard]] std::optional<std::size_t> dimension() const;

  /// Throws ValidationError unless the model can be used in dimension d.
  void check_dimension(std::size_t d) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static DependenceModel from_json(const nlohmann::json& j);

 private:
  explicit DependenceModel(Variant v) : model_(std::move(v)) {}
  Variant model_;
};

/// ASL with every singleton {i} plus the full set {0..d-1}; coordinate i puts
/// weight dependent_share[i] on the full set and the rest on its singleton.
DependenceModel make_singleton_plus_full_asl(const std::vector<double>& dependent_share,
                                             double alpha);

}  // namespace mevdro::evt
