#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "mevdro/error.hpp"

namespace mevdro {

enum class Norm { L1, L2, Linf };

inline double norm(std::span<const double> v, Norm p) {
  double acc = 0.0;
  switch (p) {
    case Norm::L1:
      for (double x : v) acc += std::abs(x);
      return acc;
    case Norm::L2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Norm::Linf:
      for (double x : v) acc = std::max(acc, std::abs(x));
      return acc;
  }
  return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b, Norm p) {
  if (a.size() != b.size()) throw ValidationError("distance: dimension mismatch");
  double acc = 0.0;
  switch (p) {
    case Norm::L1:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
      return acc;
    case Norm::L2:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(acc);
    case Norm::Linf:
      for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::abs(a[i] - b[i]));
      return acc;
  }
  return acc;
}

/// Hoelder dual: L1 <-> Linf, L2 <-> L2.
constexpr Norm dual_norm(Norm p) {
  switch (p) {
    case Norm::L1: return Norm::Linf;
    case Norm::Linf: return Norm::L1;
    case Norm::L2: return Norm::L2;
  }
  return p;
}

inline std::string to_string(Norm p) {
  switch (p) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
  }
  return "l1";
}

inline Norm parse_norm(std::string_view s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::Linf;
  throw ValidationError("unknown norm '" + std::string(s) + "' (expected l1, l2 or linf)");
}

}  // namespace mevdro
