#include "mevdro/rare_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mevdro/error.hpp"

namespace mevdro::dro {
namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ValidationError(std::string("RareSet: empty ") + what);
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string("RareSet: non-finite ") + what);
  }
}

}  // namespace

RareSet RareSet::everything(std::size_t dim) {
  if (dim == 0) throw ValidationError("RareSet: dimension must be >= 1");
  return {Kind::Everything, dim};
}

RareSet RareSet::box(std::vector<double> lower, std::vector<double> upper) {
  check_finite(lower, "lower corner");
  check_finite(upper, "upper corner");
  if (lower.size() != upper.size()) throw ValidationError("RareSet::box: corner size mismatch");
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (lower[k] > upper[k]) throw ValidationError("RareSet::box: lower exceeds upper");
  }
  RareSet s(Kind::Box, lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

RareSet RareSet::box_complement(std::vector<double> upper) {
  check_finite(upper, "upper corner");
  RareSet s(Kind::BoxComplement, upper.size());
  s.upper_ = std::move(upper);
  return s;
}

RareSet RareSet::upper_orthant(std::vector<double> lower) {
  check_finite(lower, "lower corner");
  RareSet s(Kind::UpperOrthant, lower.size());
  s.lower_ = std::move(lower);
  return s;
}

RareSet RareSet::half_space(std::vector<double> normal, double offset) {
  check_finite(normal, "normal");
  if (!std::isfinite(offset)) throw ValidationError("RareSet::half_space: non-finite offset");
  if (norm(normal, Norm::Linf) == 0.0) throw ValidationError("RareSet::half_space: zero normal");
  RareSet s(Kind::HalfSpace, normal.size());
  s.normal_ = std::move(normal);
  s.offset_ = offset;
  return s;
}

void RareSet::check(std::span<const double> x) const {
  if (x.size() != dim_) throw ValidationError("RareSet: dimension mismatch");
}

bool RareSet::contains(std::span<const double> x) const {
  check(x);
  switch (kind_) {
    case Kind::Everything:
      return true;
    case Kind::Box:
      for (std::size_t k = 0; k < dim_; ++k) {
        if (x[k] < lower_[k] || x[k] > upper_[k]) return false;
      }
      return true;
    case Kind::BoxComplement:
      for (std::size_t k = 0; k < dim_; ++k) {
        if (x[k] > upper_[k]) return true;
      }
      return false;
    case Kind::UpperOrthant:
      for (std::size_t k = 0; k < dim_; ++k) {
        if (x[k] < lower_[k]) return false;
      }
      return true;
    case Kind::HalfSpace: {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) dot += normal_[k] * x[k];
      return dot >= offset_;
    }
  }
  return false;
}

double RareSet::distance(std::span<const double> x, Norm p) const {
  check(x);
  std::vector<double> gap(dim_, 0.0);
  switch (kind_) {
    case Kind::Everything:
      return 0.0;
    case Kind::Box:
      for (std::size_t k = 0; k < dim_; ++k) {
        gap[k] = std::max(0.0, lower_[k] - x[k]) + std::max(0.0, x[k] - upper_[k]);
      }
      return norm(gap, p);
    case Kind::BoxComplement: {
      // Raising a single coordinate to its bound is optimal in every norm.
      double best = std::max(0.0, upper_[0] - x[0]);
      for (std::size_t k = 1; k < dim_; ++k) best = std::min(best, std::max(0.0, upper_[k] - x[k]));
      return best;
    }
    case Kind::UpperOrthant:
      for (std::size_t k = 0; k < dim_; ++k) gap[k] = std::max(0.0, lower_[k] - x[k]);
      return norm(gap, p);
    case Kind::HalfSpace: {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) dot += normal_[k] * x[k];
      return std::max(0.0, offset_ - dot) / norm(normal_, dual_norm(p));
    }
  }
  return 0.0;
}

nlohmann::json RareSet::to_json() const {
  switch (kind_) {
    case Kind::Everything:
      return {{"kind", "everything"}, {"dim", dim_}};
    case Kind::Box:
      return {{"kind", "box"}, {"lower", lower_}, {"upper", upper_}};
    case Kind::BoxComplement:
      return {{"kind", "box_complement"}, {"upper", upper_}};
    case Kind::UpperOrthant:
      return {{"kind", "upper_orthant"}, {"lower", lower_}};
    case Kind::HalfSpace:
      return {{"kind", "half_space"}, {"normal", normal_}, {"offset", offset_}};
  }
  return {};
}

RareSet RareSet::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ValidationError("rare set: expected a JSON object");
    const std::string kind = j.at("kind").get<std::string>();
    auto allow = [&](std::initializer_list<const char*> keys) {
      for (const auto& [key, _] : j.items()) {
        if (key == "kind") continue;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
          throw ValidationError("rare set: unknown key '" + key + "' for kind " + kind);
        }
      }
    };
    auto vec = [&](const char* key) { return j.at(key).get<std::vector<double>>(); };
    if (kind == "everything") {
      allow({"dim"});
      return everything(j.at("dim").get<std::size_t>());
    }
    if (kind == "box") {
      allow({"lower", "upper"});
      return box(vec("lower"), vec("upper"));
    }
    if (kind == "box_complement") {
      allow({"upper"});
      return box_complement(vec("upper"));
    }
    if (kind == "upper_orthant") {
      allow({"lower"});
      return upper_orthant(vec("lower"));
    }
    if (kind == "half_space") {
      allow({"normal", "offset"});
      return half_space(vec("normal"), j.at("offset").get<double>());
    }
    throw ValidationError("rare set: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("rare set: ") + e.what());
  }
}

}  // namespace mevdro::dro
