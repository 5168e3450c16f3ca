#include "mevdro/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mevdro/error.hpp"

namespace mevdro::evt {
namespace {

void check_positive(std::span<const double> x, const char* what) {
  if (x.empty()) throw DomainError(std::string(what) + ": empty argument");
  for (double v : x) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + ": coordinates must be positive");
  }
}

// (sum_j t_j^{1/alpha})^alpha for t_j >= 0, scaled by the largest term so that
// small alpha does not overflow.
double logistic_norm(std::span<const double> terms, double alpha) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top <= 0.0) return 0.0;
  if (alpha < kComonotoneAlpha) return top;
  if (alpha >= 1.0) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  double s = 0.0;
  for (double t : terms) {
    if (t > 0.0) s += std::pow(t / top, 1.0 / alpha);
  }
  return top * std::pow(s, alpha);
}

std::size_t pick_index(Rng& rng, std::span<const double> probabilities) {
  const double u = uniform_open(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Rounding left u above the last partial sum; take the last positive entry.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

// Symmetric logistic draw with unit Frechet margins: X_i = (S / W_i)^alpha,
// S positive stable with Laplace transform exp(-t^alpha) (Kanter's
// representation), evaluated in log space so alpha -> 0 stays finite.
void sample_sl_into(Rng& rng, double alpha, std::span<double> out) {
  if (alpha >= 1.0) {
    for (double& v : out) v = 1.0 / standard_exponential(rng);
    return;
  }
  if (alpha < kComonotoneAlpha) {
    const double v = 1.0 / standard_exponential(rng);
    std::fill(out.begin(), out.end(), v);
    return;
  }
  const double u = std::numbers::pi * uniform_open(rng);
  const double e = standard_exponential(rng);
  const double alpha_log_s = alpha * std::log(std::sin(alpha * u)) - std::log(std::sin(u)) +
                             (1.0 - alpha) * (std::log(std::sin((1.0 - alpha) * u)) - std::log(e));
  for (double& v : out) {
    v = std::exp(alpha_log_s - alpha * std::log(standard_exponential(rng)));
  }
}

void sample_asl_into(Rng& rng, const AsymmetricLogistic& m, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> z;
  for (const auto& b : m.subsets) {
    z.resize(b.members.size());
    sample_sl_into(rng, b.alpha, z);
    for (std::size_t j = 0; j < b.members.size(); ++j) {
      if (b.weights[j] > 0.0) {
        auto& slot = out[b.members[j]];
        slot = std::max(slot, b.weights[j] * z[j]);
      }
    }
  }
}

void sample_max_stable_into(Rng& rng, const DependenceModel& model, std::span<double> out,
                            std::size_t* label) {
  const auto& v = model.variant();
  if (const auto* sl = std::get_if<SymmetricLogistic>(&v)) {
    sample_sl_into(rng, sl->alpha, out);
    if (label) *label = 0;
  } else if (const auto* asl = std::get_if<AsymmetricLogistic>(&v)) {
    sample_asl_into(rng, *asl, out);
    if (label) *label = 0;
  } else {
    const auto& mix = std::get<Mixture>(v);
    const std::size_t c = pick_index(rng, mix.probabilities);
    if (label) *label = c;
    sample_max_stable_into(rng, mix.components[c], out, nullptr);
  }
}

// Writes softmax(log_y) restricted to the listed coordinates; other entries 0.
void normalize_logs(std::span<const double> log_y, std::span<const std::size_t> members,
                    std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (double l : log_y) top = std::max(top, l);
  double total = 0.0;
  for (std::size_t j = 0; j < members.size(); ++j) {
    const double e = std::isinf(log_y[j]) ? 0.0 : std::exp(log_y[j] - top);
    out[members[j]] = e;
    total += e;
  }
  for (std::size_t j : members) out[j] /= total;
}

// Spectral draw of one logistic block with weights: size-biased de Haan
// representation. Coordinate `biased` carries a Gamma(1 - alpha) variable,
// the others Exp(1); Y_j = weight_j * G_j^{-alpha}.
void sample_logistic_block(Rng& rng, double alpha, std::span<const double> weights,
                           std::span<const std::size_t> members, std::size_t biased,
                           std::span<double> out) {
  if (members.size() == 1 || alpha >= 1.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[members[biased]] = 1.0;
    return;
  }
  std::vector<double> log_y(members.size());
  if (alpha < kComonotoneAlpha) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      log_y[j] = weights[j] > 0.0 ? std::log(weights[j]) : -std::numeric_limits<double>::infinity();
    }
  } else {
    for (std::size_t j = 0; j < members.size(); ++j) {
      const double log_g = j == biased ? log_gamma_variate(rng, 1.0 - alpha)
                                       : std::log(standard_exponential(rng));
      log_y[j] = weights[j] > 0.0 ? std::log(weights[j]) - alpha * log_g
                                  : -std::numeric_limits<double>::infinity();
    }
  }
  normalize_logs(log_y, members, out);
}

}  // namespace

std::vector<double> sample_unit_frechet(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = unit_frechet_from_uniform(uniform_open(rng));
  return out;
}

double sl_exponent(std::span<const double> x, double alpha) {
  check_positive(x, "sl_exponent");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("sl_exponent: alpha must lie in (0, 1]");
  std::vector<double> terms(x.size());
  std::transform(x.begin(), x.end(), terms.begin(), [](double v) { return 1.0 / v; });
  return logistic_norm(terms, alpha);
}

double asl_exponent(std::span<const double> x, const AsymmetricLogistic& model) {
  check_positive(x, "asl_exponent");
  if (x.size() != model.dim) throw DomainError("asl_exponent: dimension mismatch");
  double total = 0.0;
  std::vector<double> terms;
  for (const auto& b : model.subsets) {
    terms.resize(b.members.size());
    for (std::size_t j = 0; j < b.members.size(); ++j) {
      terms[j] = b.weights[j] / x[b.members[j]];
    }
    total += logistic_norm(terms, b.alpha);
  }
  return total;
}

double exponent(std::span<const double> x, const DependenceModel& model) {
  const auto& v = model.variant();
  if (const auto* sl = std::get_if<SymmetricLogistic>(&v)) return sl_exponent(x, sl->alpha);
  if (const auto* asl = std::get_if<AsymmetricLogistic>(&v)) return asl_exponent(x, *asl);
  const auto& mix = std::get<Mixture>(v);
  double total = 0.0;
  for (std::size_t c = 0; c < mix.components.size(); ++c) {
    total += mix.probabilities[c] * exponent(x, mix.components[c]);
  }
  return total;
}

double cdf(std::span<const double> z, const DependenceModel& model) {
  if (const auto* mix = std::get_if<Mixture>(&model.variant())) {
    double total = 0.0;
    for (std::size_t c = 0; c < mix->components.size(); ++c) {
      total += mix->probabilities[c] * cdf(z, mix->components[c]);
    }
    return total;
  }
  return std::exp(-exponent(z, model));
}

RowMatrix sample_max_stable(Rng& rng, const DependenceModel& model, std::size_t n,
                            std::size_t d, std::vector<std::size_t>& labels) {
  model.check_dimension(d);
  RowMatrix out(n, d);
  labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) sample_max_stable_into(rng, model, out.row(i), &labels[i]);
  return out;
}

RowMatrix sample_max_stable(Rng& rng, const DependenceModel& model, std::size_t n,
                            std::size_t d) {
  std::vector<std::size_t> labels;
  return sample_max_stable(rng, model, n, d, labels);
}

void sample_spectral_into(Rng& rng, const DependenceModel& model, std::span<double> out) {
  const std::size_t d = out.size();
  const auto& v = model.variant();
  if (const auto* sl = std::get_if<SymmetricLogistic>(&v)) {
    if (sl->alpha < kComonotoneAlpha) {
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(d));
      return;
    }
    std::vector<std::size_t> members(d);
    for (std::size_t i = 0; i < d; ++i) members[i] = i;
    const std::vector<double> ones(d, 1.0);
    const std::size_t k = std::min(d - 1, static_cast<std::size_t>(uniform_open(rng) * d));
    sample_logistic_block(rng, sl->alpha, ones, members, k, out);
    return;
  }
  if (const auto* asl = std::get_if<AsymmetricLogistic>(&v)) {
    // (b, j) with probability lambda_{j,b} / d.
    const double target = uniform_open(rng) * static_cast<double>(asl->dim);
    double acc = 0.0;
    const AslSubset* chosen = nullptr;
    std::size_t biased = 0;
    for (const auto& b : asl->subsets) {
      for (std::size_t j = 0; j < b.members.size(); ++j) {
        if (b.weights[j] <= 0.0) continue;
        chosen = &b;
        biased = j;
        acc += b.weights[j];
        if (target < acc) break;
      }
      if (target < acc) break;
    }
    sample_logistic_block(rng, chosen->alpha, chosen->weights, chosen->members, biased, out);
    return;
  }
  const auto& mix = std::get<Mixture>(v);
  const std::size_t c = pick_index(rng, mix.probabilities);
  sample_spectral_into(rng, mix.components[c], out);
}

RowMatrix sample_spectral(Rng& rng, const DependenceModel& model, std::size_t n, std::size_t d) {
  model.check_dimension(d);
  RowMatrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) sample_spectral_into(rng, model, out.row(i));
  return out;
}

bool on_simplex(std::span<const double> w, double tol) {
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) return false;
    total += v;
  }
  return std::abs(total - 1.0) <= tol;
}

double ks_statistic_unit_frechet(std::vector<double> sample) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = sample[i] > 0.0 ? std::exp(-1.0 / sample[i]) : 0.0;
    stat = std::max({stat, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return stat;
}

}  // namespace mevdro::evt
