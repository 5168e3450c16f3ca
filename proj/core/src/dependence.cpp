#include "mevdro/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "mevdro/error.hpp"

namespace mevdro::evt {
namespace {

void check_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError(std::string(what) + ": alpha must lie in (0, 1], got " +
                          std::to_string(alpha));
  }
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ValidationError("model json: unknown key '" + key + "'");
    }
  }
}

}  // namespace

DependenceModel DependenceModel::symmetric_logistic(double alpha) {
  check_alpha(alpha, "symmetric logistic");
  return DependenceModel(SymmetricLogistic{alpha});
}

DependenceModel DependenceModel::asymmetric_logistic(std::size_t dim,
                                                     std::vector<AslSubset> subsets) {
  if (dim == 0) throw ValidationError("asymmetric logistic: dimension must be positive");
  if (subsets.empty()) throw ValidationError("asymmetric logistic: no subsets");
  std::vector<double> coverage(dim, 0.0);
  for (const auto& b : subsets) {
    if (b.members.empty()) throw ValidationError("asymmetric logistic: empty subset");
    if (b.members.size() != b.weights.size()) {
      throw ValidationError("asymmetric logistic: members and weights differ in length");
    }
    check_alpha(b.alpha, "asymmetric logistic subset");
    for (std::size_t j = 0; j < b.members.size(); ++j) {
      if (b.members[j] >= dim) throw ValidationError("asymmetric logistic: member out of range");
      if (j > 0 && b.members[j] <= b.members[j - 1]) {
        throw ValidationError("asymmetric logistic: members must be strictly increasing");
      }
      if (!(b.weights[j] >= 0.0) || !std::isfinite(b.weights[j])) {
        throw ValidationError("asymmetric logistic: weights must be finite and nonnegative");
      }
      coverage[b.members[j]] += b.weights[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::abs(coverage[i] - 1.0) > 1e-9) {
      throw ValidationError("asymmetric logistic: weights of coordinate " + std::to_string(i) +
                            " sum to " + std::to_string(coverage[i]) + ", expected 1");
    }
  }
  return DependenceModel(AsymmetricLogistic{dim, std::move(subsets)});
}

DependenceModel DependenceModel::mixture(std::vector<double> probabilities,
                                         std::vector<DependenceModel> components) {
  if (components.empty() || probabilities.size() != components.size()) {
    throw ValidationError("mixture: need one probability per component");
  }
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw ValidationError("mixture: probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("mixture: probabilities sum to " + std::to_string(total));
  }
  std::optional<std::size_t> dim;
  for (const auto& c : components) {
    if (auto cd = c.dimension()) {
      if (dim && *dim != *cd) throw ValidationError("mixture: components disagree on dimension");
      dim = cd;
    }
  }
  return DependenceModel(Mixture{std::move(probabilities), std::move(components)});
}

std::optional<std::size_t> DependenceModel::dimension() const {
  if (const auto* asl = std::get_if<AsymmetricLogistic>(&model_)) return asl->dim;
  if (const auto* mix = std::get_if<Mixture>(&model_)) {
    for (const auto& c : mix->components) {
      if (auto d = c.dimension()) return d;
    }
  }
  return std::nullopt;
}

void DependenceModel::check_dimension(std::size_t d) const {
  if (d == 0) throw ValidationError("dimension must be positive");
  if (auto own = dimension(); own && *own != d) {
    throw ValidationError("model has dimension " + std::to_string(*own) + ", requested " +
                          std::to_string(d));
  }
}

nlohmann::json DependenceModel::to_json() const {
  using nlohmann::json;
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SymmetricLogistic>) {
          return json{{"variant", "sl"}, {"alpha", m.alpha}};
        } else if constexpr (std::is_same_v<T, AsymmetricLogistic>) {
          json subsets = json::array();
          for (const auto& b : m.subsets) {
            subsets.push_back({{"members", b.members}, {"alpha", b.alpha}, {"weights", b.weights}});
          }
          return json{{"variant", "asl"}, {"dim", m.dim}, {"subsets", subsets}};
        } else {
          json comps = json::array();
          for (std::size_t c = 0; c < m.components.size(); ++c) {
            comps.push_back({{"probability", m.probabilities[c]},
                             {"model", m.components[c].to_json()}});
          }
          return json{{"variant", "mixture"}, {"components", comps}};
        }
      },
      model_);
}

DependenceModel DependenceModel::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ValidationError("model json: expected an object");
    const auto variant = j.at("variant").get<std::string>();
    if (variant == "sl") {
      reject_unknown_keys(j, {"variant", "alpha"});
      return symmetric_logistic(j.at("alpha").get<double>());
    }
    if (variant == "asl") {
      reject_unknown_keys(j, {"variant", "dim", "subsets"});
      std::vector<AslSubset> subsets;
      for (const auto& s : j.at("subsets")) {
        reject_unknown_keys(s, {"members", "alpha", "weights"});
        subsets.push_back({s.at("members").get<std::vector<std::size_t>>(),
                           s.at("alpha").get<double>(),
                           s.at("weights").get<std::vector<double>>()});
      }
      return asymmetric_logistic(j.at("dim").get<std::size_t>(), std::move(subsets));
    }
    if (variant == "mixture") {
      reject_unknown_keys(j, {"variant", "components"});
      std::vector<double> probs;
      std::vector<DependenceModel> comps;
      for (const auto& c : j.at("components")) {
        reject_unknown_keys(c, {"probability", "model"});
        probs.push_back(c.at("probability").get<double>());
        comps.push_back(from_json(c.at("model")));
      }
      return mixture(std::move(probs), std::move(comps));
    }
    throw ValidationError("model json: unknown variant '" + variant + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model json: ") + e.what());
  }
}

DependenceModel make_singleton_plus_full_asl(const std::vector<double>& dependent_share,
                                             double alpha) {
  const std::size_t d = dependent_share.size();
  std::vector<AslSubset> subsets;
  for (std::size_t i = 0; i < d; ++i) {
    subsets.push_back({{i}, 1.0, {1.0 - dependent_share[i]}});
  }
  AslSubset full;
  full.members.resize(d);
  std::iota(full.members.begin(), full.members.end(), std::size_t{0});
  full.alpha = alpha;
  full.weights = dependent_share;
  subsets.push_back(std::move(full));
  return DependenceModel::asymmetric_logistic(d, std::move(subsets));
}

}  // namespace mevdro::evt
