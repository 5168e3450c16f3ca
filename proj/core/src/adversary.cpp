#include "mevdro/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mevdro/csv.hpp"
#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/line_search.hpp"
#include "mevdro/parallel.hpp"

namespace mevdro::adversary {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t draw_component(Rng& rng, std::size_t components) {
  const auto c = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(components));
  return static_cast<std::uint32_t>(std::min(c, components - 1));
}

/// Candidate losses and the candidate-by-base cost matrix.
struct LossCost {
  std::vector<double> loss;
  RowMatrix cost;
};

template <Norm P>
void fill_costs(const RowMatrix& adv, const RowMatrix& base, RowMatrix& cost) {
  const std::size_t d = adv.cols();
  const double* b0 = base.data().data();
  for (std::size_t i = 0; i < adv.rows(); ++i) {
    const double* a = adv.data().data() + i * d;
    double* out = &cost(i, 0);
    for (std::size_t j = 0; j < base.rows(); ++j) {
      const double* b = b0 + j * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        if constexpr (P == Norm::L1) acc += std::abs(diff);
        if constexpr (P == Norm::L2) acc += diff * diff;
        if constexpr (P == Norm::Linf) acc = std::max(acc, std::abs(diff));
      }
      if constexpr (P == Norm::L2) acc = std::sqrt(acc);
      out[j] = acc;
    }
  }
}

LossCost loss_cost(const RowMatrix& adv, const RowMatrix& base, const Loss& loss, Norm norm) {
  if (adv.cols() != base.cols()) throw ValidationError("loss matrix: dimension mismatch");
  LossCost lc;
  lc.loss.resize(adv.rows());
  for (std::size_t i = 0; i < adv.rows(); ++i) lc.loss[i] = loss(adv.row(i));
  lc.cost = RowMatrix(adv.rows(), base.rows());
  switch (norm) {
    case Norm::L1: fill_costs<Norm::L1>(adv, base, lc.cost); break;
    case Norm::L2: fill_costs<Norm::L2>(adv, base, lc.cost); break;
    case Norm::Linf: fill_costs<Norm::Linf>(adv, base, lc.cost); break;
  }
  return lc;
}

/// Candidate support of the adversary: its own samples followed by the base
/// samples (leaving a base point in place is always feasible).
LossCost support_loss_cost(const AdversaryFamily& family, const Batch& batch, Mode mode,
                           const Loss& loss, Norm norm, const LossCost& base_part) {
  LossCost lc = loss_cost(adversarial_samples(family, batch, mode), batch.base, loss, norm);
  lc.loss.insert(lc.loss.end(), base_part.loss.begin(), base_part.loss.end());
  for (std::size_t i = 0; i < base_part.cost.rows(); ++i) lc.cost.append_row(base_part.cost.row(i));
  return lc;
}

LossCost base_loss_cost(const Batch& batch, const Loss& loss, Norm norm) {
  return loss_cost(batch.base, batch.base, loss, norm);
}

/// Column maxima of loss_i - lambda * cost_ij; optionally the maximizing rows.
std::vector<double> column_max(const LossCost& lc, double lambda,
                               std::vector<std::size_t>* argmax = nullptr) {
  const std::size_t cols = lc.cost.cols();
  std::vector<double> best(cols, -kInf);
  if (argmax) argmax->assign(cols, 0);
  for (std::size_t i = 0; i < lc.cost.rows(); ++i) {
    const auto row = lc.cost.row(i);
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = lc.loss[i] - lambda * row[j];
      if (v > best[j]) {
        best[j] = v;
        if (argmax) (*argmax)[j] = i;
      }
    }
  }
  return best;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double inner_value(const LossCost& lc, double lambda) { return mean(column_max(lc, lambda)); }

RowMatrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                           const char* key) {
  const auto v = j.at(key).get<std::vector<std::vector<double>>>();
  if (v.size() != rows) throw ValidationError(std::string("adversary family: bad row count in ") + key);
  RowMatrix m(0, cols);
  for (const auto& r : v) {
    if (r.size() != cols) throw ValidationError(std::string("adversary family: bad row width in ") + key);
    m.append_row(r);
  }
  return m;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Unconstrained: return "unconstrained";
    case Mode::EvtConstrained: return "evt";
    case Mode::EvtConstrainedUnitMargins: return "evt-unit-margins";
  }
  return "unconstrained";
}

Mode parse_mode(std::string_view name) {
  if (name == "unconstrained") return Mode::Unconstrained;
  if (name == "evt") return Mode::EvtConstrained;
  if (name == "evt-unit-margins") return Mode::EvtConstrainedUnitMargins;
  throw ValidationError("unknown mode '" + std::string(name) +
                        "' (expected unconstrained, evt or evt-unit-margins)");
}

AdversaryFamily::AdversaryFamily(std::size_t dim, std::size_t components)
    : dim_(dim), components_(components), params_(3 * components * dim + components, 0.0) {
  if (dim == 0) throw ValidationError("AdversaryFamily: dimension must be >= 1");
  if (components == 0) throw ValidationError("AdversaryFamily: needs at least one component");
}

void AdversaryFamily::set_parameters(std::span<const double> theta) {
  if (theta.size() != params_.size()) throw ValidationError("AdversaryFamily: parameter size mismatch");
  for (double t : theta) {
    if (!std::isfinite(t)) throw ValidationError("AdversaryFamily: non-finite parameter");
  }
  params_.assign(theta.begin(), theta.end());
}

std::vector<std::size_t> AdversaryFamily::active_parameters(Mode mode) const {
  const std::size_t n = mode == Mode::Unconstrained ? params_.size() : 2 * components_ * dim_;
  std::vector<std::size_t> idx(n);
  for (std::size_t p = 0; p < n; ++p) idx[p] = p;
  return idx;
}

bool AdversaryFamily::admissible(Mode mode) const {
  if (mode == Mode::Unconstrained) return true;
  return std::all_of(params_.begin() + static_cast<std::ptrdiff_t>(2 * components_ * dim_),
                     params_.end(), [](double t) { return t == 0.0; });
}

bool AdversaryFamily::spectral_identity(std::size_t c) const {
  for (std::size_t k = 0; k < dim_; ++k) {
    if (params_[c * dim_ + k] != 0.0 || params_[(components_ + c) * dim_ + k] != 0.0) return false;
  }
  return true;
}

bool AdversaryFamily::radial_identity(std::size_t c) const {
  for (std::size_t k = 0; k < dim_; ++k) {
    if (params_[(2 * components_ + c) * dim_ + k] != 0.0) return false;
  }
  return params_[3 * components_ * dim_ + c] == 0.0;
}

void AdversaryFamily::transform_mark(std::size_t c, std::span<const double> mark,
                                     std::span<double> out) const {
  if (spectral_identity(c)) {
    std::copy(mark.begin(), mark.end(), out.begin());
    return;
  }
  const double d = static_cast<double>(dim_);
  double top = -kInf;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double shift = params_[c * dim_ + k];
    const double power = std::exp(params_[(components_ + c) * dim_ + k]);
    out[k] = mark[k] > 0.0 ? shift + power * std::log(mark[k] / d) : -kInf;
    top = std::max(top, out[k]);
  }
  if (top == -kInf) {
    std::copy(mark.begin(), mark.end(), out.begin());
    return;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    out[k] = std::exp(out[k] - top);
    sum += out[k];
  }
  for (std::size_t k = 0; k < dim_; ++k) out[k] = d * out[k] / sum;
}

void AdversaryFamily::transform_radial(std::size_t c, std::span<double> x) const {
  if (radial_identity(c)) return;
  const double power = std::exp(params_[3 * components_ * dim_ + c]);
  for (std::size_t k = 0; k < dim_; ++k) {
    x[k] = std::exp(params_[(2 * components_ + c) * dim_ + k]) * std::pow(x[k], power);
  }
}

RowMatrix AdversaryFamily::sample_spectral(Rng& rng, const evt::DependenceModel& base,
                                           std::size_t n) const {
  base.check_dimension(dim_);
  RowMatrix out(n, dim_);
  std::vector<double> w(dim_);
  std::vector<double> mapped(dim_);
  const double d = static_cast<double>(dim_);
  for (std::size_t i = 0; i < n; ++i) {
    evt::sample_spectral_into(rng, base, w);
    for (double& v : w) v *= d;
    transform_mark(draw_component(rng, components_), w, mapped);
    for (std::size_t k = 0; k < dim_; ++k) out(i, k) = mapped[k] / d;
  }
  return out;
}

nlohmann::json AdversaryFamily::to_json() const {
  auto block = [&](std::size_t offset) {
    std::vector<std::vector<double>> rows(components_, std::vector<double>(dim_));
    for (std::size_t c = 0; c < components_; ++c) {
      for (std::size_t k = 0; k < dim_; ++k) rows[c][k] = params_[(offset + c) * dim_ + k];
    }
    return rows;
  };
  std::vector<double> radial_power(params_.end() - static_cast<std::ptrdiff_t>(components_),
                                   params_.end());
  return {{"dim", dim_},
          {"components", components_},
          {"shift", block(0)},
          {"log_power", block(components_)},
          {"radial_shift", block(2 * components_)},
          {"radial_log_power", radial_power}};
}

AdversaryFamily AdversaryFamily::from_json(const nlohmann::json& j) {
  try {
    for (const auto& [key, _] : j.items()) {
      if (key != "dim" && key != "components" && key != "shift" && key != "log_power" &&
          key != "radial_shift" && key != "radial_log_power") {
        throw ValidationError("adversary family: unknown key '" + key + "'");
      }
    }
    AdversaryFamily f(j.at("dim").get<std::size_t>(), j.at("components").get<std::size_t>());
    const std::size_t D = f.components_;
    const std::size_t d = f.dim_;
    std::vector<double> theta;
    for (const char* key : {"shift", "log_power", "radial_shift"}) {
      const RowMatrix m = matrix_from_json(j, D, d, key);
      theta.insert(theta.end(), m.data().begin(), m.data().end());
    }
    const auto radial_power = j.at("radial_log_power").get<std::vector<double>>();
    if (radial_power.size() != D) throw ValidationError("adversary family: bad radial_log_power size");
    theta.insert(theta.end(), radial_power.begin(), radial_power.end());
    f.set_parameters(theta);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("adversary family: ") + e.what());
  }
}

Batch make_batch(const evt::DependenceModel& model, std::size_t n, std::size_t truncation,
                 std::size_t d, std::size_t components, std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t index) {
  if (n == 0) throw ValidationError("make_batch: batch size must be >= 1");
  if (components == 0) throw ValidationError("make_batch: needs at least one component");
  model.check_dimension(d);
  const std::uint64_t batch_seed = derive_seed(seed, stream, index);
  Batch b;
  b.configs.reserve(n);
  b.base = RowMatrix(0, d);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(batch_seed, stream::kConfigurations, i);
    b.configs.push_back(pp::sample_configuration(rng, model, truncation, d));
    Rng crng = make_rng(batch_seed, stream::kComponents, i);
    std::vector<std::uint32_t> comps(b.configs.back().size());
    for (auto& c : comps) c = draw_component(crng, components);
    b.atom_components.push_back(std::move(comps));
    b.candidate_components.push_back(draw_component(crng, components));
    b.base.append_row(pp::max_stable_from_configuration(b.configs.back()));
  }
  return b;
}

RowMatrix adversarial_samples(const AdversaryFamily& family, const Batch& batch, Mode mode) {
  const std::size_t d = family.dim();
  if (batch.base.cols() != d) throw ValidationError("adversarial_samples: dimension mismatch");
  // Mapped marks never exceed d (times rounding slack), which bounds the
  // contribution of every later atom.
  const double mark_bound = static_cast<double>(d) * (1.0 + 1e-12);
  RowMatrix out(batch.configs.size(), d);
  std::vector<double> mark(d);
  for (std::size_t i = 0; i < batch.configs.size(); ++i) {
    const auto& cfg = batch.configs[i];
    auto cur = out.row(i);
    for (std::size_t n = 0; n < cfg.size(); ++n) {
      const double a = cfg.arrival(n);
      if (n > 0 && mark_bound / a < *std::min_element(cur.begin(), cur.end())) break;
      family.transform_mark(batch.atom_components[i][n], cfg.mark(n), mark);
      for (std::size_t k = 0; k < d; ++k) cur[k] = std::max(cur[k], mark[k] / a);
    }
    if (mode == Mode::Unconstrained) family.transform_radial(batch.candidate_components[i], cur);
  }
  return out;
}

RowMatrix build_loss_matrix(const RowMatrix& adv, const RowMatrix& base, const Loss& loss,
                            double lambda, Norm cost_norm) {
  if (adv.rows() != base.rows()) throw ValidationError("build_loss_matrix: sample counts differ");
  const LossCost lc = loss_cost(adv, base, loss, cost_norm);
  RowMatrix l(adv.rows(), base.rows());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    for (std::size_t j = 0; j < l.cols(); ++j) l(i, j) = lc.loss[i] - lambda * lc.cost(i, j);
  }
  return l;
}

double inner_objective(const RowMatrix& loss_matrix) {
  if (loss_matrix.rows() == 0 || loss_matrix.cols() == 0) {
    throw ValidationError("inner_objective: empty matrix");
  }
  std::vector<double> best(loss_matrix.cols(), -kInf);
  for (std::size_t i = 0; i < loss_matrix.rows(); ++i) {
    for (std::size_t j = 0; j < loss_matrix.cols(); ++j) best[j] = std::max(best[j], loss_matrix(i, j));
  }
  return mean(best);
}

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> theta,
    std::span<const std::size_t> coords, double h, std::size_t threads) {
  if (!(h > 0.0)) throw ValidationError("finite_difference_gradient: h must be > 0");
  std::vector<double> grad(theta.size(), 0.0);
  std::vector<double> partial(coords.size());
  parallel_for(coords.size(), threads, [&](std::size_t q) {
    const std::size_t p = coords[q];
    std::vector<double> probe(theta.begin(), theta.end());
    probe[p] = theta[p] + h;
    const double up = f(probe);
    probe[p] = theta[p] - h;
    const double down = f(probe);
    partial[q] = (up - down) / (2.0 * h);
  });
  for (std::size_t q = 0; q < coords.size(); ++q) grad[coords[q]] = partial[q];
  return grad;
}

bool gradient_ascent_step(const std::function<double(std::span<const double>)>& f,
                          std::vector<double>& theta, std::span<const std::size_t> coords,
                          double step_size, double h, double clip, std::size_t threads) {
  if (step_size == 0.0 || coords.empty()) return true;
  const auto grad = finite_difference_gradient(f, theta, coords, h, threads);
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  if (!std::isfinite(sq)) return false;
  const double gnorm = std::sqrt(sq);
  const double scale = gnorm > clip ? clip / gnorm : 1.0;
  std::vector<double> next = theta;
  for (std::size_t p : coords) next[p] += step_size * scale * grad[p];
  for (double t : next) {
    if (!std::isfinite(t)) return false;
  }
  theta = std::move(next);
  return true;
}

void TrainConfig::validate() const {
  if (dim == 0) throw ValidationError("train: dimension must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("train: delta must be >= 0");
  if (samples == 0 || eval_samples == 0) throw ValidationError("train: sample sizes must be >= 1");
  if (truncation == 0) throw ValidationError("train: truncation must be >= 1");
  if (components == 0) throw ValidationError("train: components must be >= 1");
  if (eval_every == 0) throw ValidationError("train: eval_every must be >= 1");
  if (projection_samples == 0) throw ValidationError("train: projection_samples must be >= 1");
  if (!(theta_step >= 0.0) || !(lambda_step >= 0.0)) throw ValidationError("train: step sizes must be >= 0");
  if (!(theta_decay > 0.0 && theta_decay <= 1.0)) throw ValidationError("train: theta_decay must be in (0, 1]");
  if (!(fd_step > 0.0)) throw ValidationError("train: fd_step must be > 0");
  if (!(gradient_clip > 0.0)) throw ValidationError("train: gradient_clip must be > 0");
  if (!(lambda_epsilon > 0.0)) throw ValidationError("train: lambda_epsilon must be > 0");
}

ProjectionBatch make_projection_batch(const evt::DependenceModel& model, std::size_t n,
                                      std::size_t d, std::size_t components,
                                      std::uint64_t seed) {
  model.check_dimension(d);
  Rng rng = make_rng(seed, stream::kProjection);
  ProjectionBatch pb;
  pb.marks = RowMatrix(n, d);
  pb.components.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = pb.marks.row(i);
    evt::sample_spectral_into(rng, model, row);
    for (double& v : row) v *= static_cast<double>(d);
    pb.components[i] = draw_component(rng, components);
  }
  return pb;
}

std::vector<double> spectral_means(const AdversaryFamily& family, const ProjectionBatch& batch) {
  const std::size_t d = family.dim();
  std::vector<double> means(d, 0.0);
  std::vector<double> mapped(d);
  for (std::size_t i = 0; i < batch.marks.rows(); ++i) {
    family.transform_mark(batch.components[i], batch.marks.row(i), mapped);
    for (std::size_t k = 0; k < d; ++k) means[k] += mapped[k];
  }
  const double scale = static_cast<double>(d) * static_cast<double>(batch.marks.rows());
  for (double& m : means) m /= scale;
  return means;
}

void project_unit_margins(AdversaryFamily& family, const ProjectionBatch& batch, double tolerance,
                          std::size_t max_iterations) {
  const std::size_t d = family.dim();
  const double target = 1.0 / static_cast<double>(d);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const auto means = spectral_means(family, batch);
    double err = 0.0;
    for (double m : means) err = std::max(err, std::abs(m - target));
    if (err < tolerance) return;
    for (std::size_t k = 0; k < d; ++k) {
      if (!(means[k] > 0.0)) throw DomainError("project_unit_margins: coordinate has no mass");
      const double s = std::log(target / means[k]);
      for (std::size_t c = 0; c < family.components(); ++c) family.shift(c, k) += s;
    }
  }
}

bool maximization_step(TrainState& state, const Batch& batch, const Loss& loss, Mode mode,
                       double step_size, const TrainConfig& config,
                       const ProjectionBatch* projection) {
  const double lambda = state.lambda;
  const AdversaryFamily& current = state.family;
  const std::vector<double> base_max =
      column_max(base_loss_cost(batch, loss, config.cost_norm), lambda);
  auto objective = [&](std::span<const double> theta) {
    AdversaryFamily probe = current;
    probe.set_parameters(theta);
    const LossCost lc = loss_cost(adversarial_samples(probe, batch, mode), batch.base, loss,
                                  config.cost_norm);
    std::vector<double> best = column_max(lc, lambda);
    for (std::size_t j = 0; j < best.size(); ++j) best[j] = std::max(best[j], base_max[j]);
    return mean(best);
  };
  std::vector<double> theta(current.parameters().begin(), current.parameters().end());
  const auto coords = current.active_parameters(mode);
  const bool applied = gradient_ascent_step(objective, theta, coords, step_size, config.fd_step,
                                            config.gradient_clip, config.threads);
  if (!applied) {
    ++state.skipped_steps;
    return false;
  }
  state.family.set_parameters(theta);
  if (mode == Mode::EvtConstrainedUnitMargins && projection != nullptr) {
    project_unit_margins(state.family, *projection);
  }
  return true;
}

void minimization_step(TrainState& state, const Batch& batch, const Loss& loss, Mode mode,
                       double delta, double step_size, Norm cost_norm) {
  const LossCost lc = support_loss_cost(state.family, batch, mode, loss, cost_norm,
                                        base_loss_cost(batch, loss, cost_norm));
  std::vector<std::size_t> argmax;
  column_max(lc, state.lambda, &argmax);
  double moved = 0.0;
  for (std::size_t j = 0; j < argmax.size(); ++j) moved += lc.cost(argmax[j], j);
  moved /= static_cast<double>(argmax.size());
  state.lambda = std::max(0.0, state.lambda - step_size * (delta - moved));
  state.running_risk = state.lambda * delta + inner_value(lc, state.lambda);
}

namespace {

AdversarialRisk risk_on_support(const AdversaryFamily& family, const Batch& batch,
                                const Loss& loss, Mode mode, double delta, Norm cost_norm,
                                const LossCost& base_part) {
  if (!(delta >= 0.0)) throw ValidationError("adversarial_risk: delta must be >= 0");
  const LossCost lc = support_loss_cost(family, batch, mode, loss, cost_norm, base_part);
  const std::size_t rows = lc.cost.rows();
  const std::size_t cols = lc.cost.cols();
  AdversarialRisk out;

  double mean_nearest = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double nearest = kInf;
    for (std::size_t i = 0; i < rows; ++i) nearest = std::min(nearest, lc.cost(i, j));
    mean_nearest += nearest;
  }
  mean_nearest /= static_cast<double>(cols);

  if (delta == 0.0) {
    // lambda -> infinity: each column keeps its zero-cost rows only.
    if (mean_nearest > 0.0) {
      out.value = -kInf;
      return out;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      double limit = -kInf;
      for (std::size_t i = 0; i < rows; ++i) {
        if (lc.cost(i, j) == 0.0) limit = std::max(limit, lc.loss[i]);
      }
      for (std::size_t i = 0; i < rows; ++i) {
        if (lc.cost(i, j) > 0.0) {
          out.lambda_star = std::max(out.lambda_star, (lc.loss[i] - limit) / lc.cost(i, j));
        }
      }
      total += limit;
    }
    out.value = total / static_cast<double>(cols);
    return out;
  }
  if (delta < mean_nearest) {
    out.value = -kInf;
    return out;
  }
  const auto ls = minimize_lambda(
      [&](double lambda) { return lambda * delta + inner_value(lc, lambda); }, delta);
  out.value = ls.value;
  out.lambda_star = ls.lambda;
  out.converged = ls.converged;
  return out;
}

}  // namespace

AdversarialRisk adversarial_risk(const AdversaryFamily& family, const Batch& batch,
                                 const Loss& loss, Mode mode, double delta, Norm cost_norm) {
  return risk_on_support(family, batch, loss, mode, delta, cost_norm,
                         base_loss_cost(batch, loss, cost_norm));
}

TrainResult run_dro_training(const evt::DependenceModel& base_model, const Loss& loss, Mode mode,
                             const TrainConfig& config,
                             std::span<const AdversaryFamily> warm_starts) {
  config.validate();
  base_model.check_dimension(config.dim);
  const std::size_t d = config.dim;
  const Batch eval = make_batch(base_model, config.eval_samples, config.truncation, d,
                                config.components, config.seed, stream::kAdversaryEval, 0);
  ProjectionBatch projection;
  if (mode == Mode::EvtConstrainedUnitMargins) {
    projection = make_projection_batch(base_model, config.projection_samples, d,
                                       config.components, config.seed);
  }

  const LossCost eval_base = base_loss_cost(eval, loss, config.cost_norm);
  auto score = [&](const AdversaryFamily& f) {
    return risk_on_support(f, eval, loss, mode, config.delta, config.cost_norm, eval_base);
  };

  TrainResult result{.family = AdversaryFamily(d, config.components), .trace = {}};
  AdversarialRisk best = score(result.family);
  for (const auto& w : warm_starts) {
    if (w.dim() != d || w.components() != config.components) {
      throw ValidationError("train: warm start has the wrong shape");
    }
    if (!w.admissible(mode)) throw ValidationError("train: warm start not admissible for mode");
    const AdversarialRisk s = score(w);
    if (s.value > best.value) {
      best = s;
      result.family = w;
    }
  }

  TrainState state{.family = result.family, .lambda = config.initial_lambda()};
  const double r0 = inner_value(
      support_loss_cost(state.family, eval, mode, loss, config.cost_norm, eval_base),
      state.lambda);
  state.running_risk = state.lambda * config.delta + r0;
  result.trace.push_back({0, state.lambda, r0, state.running_risk});
  if (config.iterations == 0) {
    result.risk = state.running_risk;
    result.lambda_star = state.lambda;
    return result;
  }

  double step = config.theta_step;
  for (std::size_t k = 1; k <= config.iterations; ++k) {
    const Batch batch = make_batch(base_model, config.samples, config.truncation, d,
                                   config.components, config.seed, stream::kAdversaryTrain, k);
    maximization_step(state, batch, loss, mode, step, config,
                      mode == Mode::EvtConstrainedUnitMargins ? &projection : nullptr);
    minimization_step(state, batch, loss, mode, config.delta, config.lambda_step,
                      config.cost_norm);
    state.k = k;
    result.trace.push_back({k, state.lambda, state.running_risk - state.lambda * config.delta,
                            state.running_risk});
    step *= config.theta_decay;
    if (k % config.eval_every == 0 || k == config.iterations) {
      const AdversarialRisk s = score(state.family);
      if (s.value > best.value) {
        best = s;
        result.family = state.family;
        result.best_iteration = k;
      }
    }
  }
  result.risk = best.value;
  result.lambda_star = best.lambda_star;
  result.converged = best.converged;
  result.skipped_steps = state.skipped_steps;
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "k,lambda,R,risk\n";
  for (const auto& row : trace) {
    out << row.k << ',' << csv::format_double(row.lambda) << ',' << csv::format_double(row.R)
        << ',' << csv::format_double(row.risk) << '\n';
  }
}

}  // namespace mevdro::adversary
