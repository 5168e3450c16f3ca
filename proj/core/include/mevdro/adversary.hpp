#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mevdro/dependence.hpp"
#include "mevdro/matrix.hpp"
#include "mevdro/norms.hpp"
#include "mevdro/point_process.hpp"
#include "mevdro/random.hpp"

namespace mevdro::adversary {

enum class Mode {
  Unconstrained,              // any positive vector
  EvtConstrained,             // max-stable, arrivals shared with the base draws
  EvtConstrainedUnitMargins,  // as above with spectral means held at 1/d
};

std::string to_string(Mode mode);
Mode parse_mode(std::string_view name);  // unconstrained | evt | evt-unit-margins

using Loss = std::function<double(std::span<const double>)>;

inline constexpr std::size_t kDefaultComponents = 8;

/// Parametric adversary acting on base draws through D transport maps. Every
/// spectral draw w is assigned one of D components c by a fixed uniform and
/// is mapped to
///   w'_k proportional to exp(shift[c][k]) * w_k^exp(log_power[c][k]).
/// In unconstrained mode each assembled sample X additionally passes through
///   X_k -> exp(radial_shift[c][k]) * X_k^exp(radial_log_power[c]).
/// All-zero parameters are the identity and are applied as an exact copy.
class AdversaryFamily {
 public:
  explicit AdversaryFamily(std::size_t dim, std::size_t components = kDefaultComponents);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t components() const { return components_; }

  [[nodiscard]] std::span<const double> parameters() const { return params_; }
  void set_parameters(std::span<const double> theta);

  double& shift(std::size_t c, std::size_t k) { return params_[c * dim_ + k]; }
  double& log_power(std::size_t c, std::size_t k) {
    return params_[(components_ + c) * dim_ + k];
  }
  double& radial_shift(std::size_t c, std::size_t k) {
    return params_[(2 * components_ + c) * dim_ + k];
  }
  double& radial_log_power(std::size_t c) { return params_[3 * components_ * dim_ + c]; }

  /// Indices of the parameters a mode may move.
  [[nodiscard]] std::vector<std::size_t> active_parameters(Mode mode) const;
  /// True when every parameter outside active_parameters(mode) is zero.
  [[nodiscard]] bool admissible(Mode mode) const;

  /// Maps a mark y = d * w to d * w'.
  void transform_mark(std::size_t c, std::span<const double> mark, std::span<double> out) const;
  void transform_radial(std::size_t c, std::span<double> x) const;

  /// Adversarial spectral draws on the simplex: base draw, uniform component,
  /// transport map.
  [[nodiscard]] RowMatrix sample_spectral(Rng& rng, const evt::DependenceModel& base,
                                          std::size_t n) const;

  [[nodiscard]] nlohmann::json to_json() const;
  static AdversaryFamily from_json(const nlohmann::json& j);

  friend bool operator==(const AdversaryFamily&, const AdversaryFamily&) = default;

 private:
  [[nodiscard]] bool spectral_identity(std::size_t c) const;
  [[nodiscard]] bool radial_identity(std::size_t c) const;

  std::size_t dim_;
  std::size_t components_;
  std::vector<double> params_;
};

/// Base configurations with their component assignments. base row j is the
/// max-stable vector of configuration j.
struct Batch {
  std::vector<pp::PointConfiguration> configs;
  std::vector<std::vector<std::uint32_t>> atom_components;
  std::vector<std::uint32_t> candidate_components;
  RowMatrix base;
};

Batch make_batch(const evt::DependenceModel& model, std::size_t n, std::size_t truncation,
                 std::size_t d, std::size_t components, std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t index);

/// Candidate X~^(i) for every configuration: marks mapped by the family,
/// arrivals kept, componentwise max of y~/a; in unconstrained mode the radial
/// map follows.
RowMatrix adversarial_samples(const AdversaryFamily& family, const Batch& batch, Mode mode);

/// L_ij = loss(adv_i) - lambda * |adv_i - base_j|.
RowMatrix build_loss_matrix(const RowMatrix& adv, const RowMatrix& base, const Loss& loss,
                            double lambda, Norm cost_norm);

/// R = (1/N) sum_j max_i L_ij.
double inner_objective(const RowMatrix& loss_matrix);

/// Central differences with common random numbers: f is evaluated at
/// theta +/- h e_p for every p in coords; other entries of the result are 0.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f, std::span<const double> theta,
    std::span<const std::size_t> coords, double h, std::size_t threads = 1);

/// theta += step * g, with g clipped to Euclidean norm `clip`. Returns false,
/// leaving theta untouched, when the gradient is not finite.
bool gradient_ascent_step(const std::function<double(std::span<const double>)>& f,
                          std::vector<double>& theta, std::span<const std::size_t> coords,
                          double step_size, double h, double clip, std::size_t threads = 1);

struct TrainConfig {
  std::size_t dim = 2;
  double delta = 0.0;
  Norm cost_norm = Norm::L1;
  std::size_t samples = 256;        // n, per training batch
  std::size_t eval_samples = 256;   // fixed batch used to score iterates
  std::size_t truncation = pp::kDefaultTruncation;
  std::size_t iterations = 2000;    // K
  std::size_t components = kDefaultComponents;
  std::size_t eval_every = 10;
  std::size_t projection_samples = 4096;
  double theta_step = 1e-2;
  double theta_decay = 0.999;
  double lambda_step = 1e-2;
  double fd_step = 1e-4;
  double gradient_clip = 10.0;
  double lambda_epsilon = 1e-3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  [[nodiscard]] double initial_lambda() const { return 1.0 / (delta + lambda_epsilon); }
};

struct TrainState {
  AdversaryFamily family;
  double lambda = 0.0;
  std::size_t k = 0;
  double running_risk = 0.0;
  std::size_t skipped_steps = 0;
};

/// Draws and component labels the unit-margin projection is computed on.
struct ProjectionBatch {
  RowMatrix marks;  // d * w, one spectral draw per row
  std::vector<std::uint32_t> components;
};

ProjectionBatch make_projection_batch(const evt::DependenceModel& model, std::size_t n,
                                      std::size_t d, std::size_t components,
                                      std::uint64_t seed);

/// Adds a common per-coordinate shift to every component until the mapped
/// draws have coordinate means 1/d (iterative proportional scaling).
void project_unit_margins(AdversaryFamily& family, const ProjectionBatch& batch,
                          double tolerance = 1e-10, std::size_t max_iterations = 500);

/// Mean of the mapped spectral draws per coordinate.
std::vector<double> spectral_means(const AdversaryFamily& family, const ProjectionBatch& batch);

/// One ascent step on R(theta) at the state's lambda (central differences,
/// common random numbers). Unit-margin mode re-projects afterwards.
bool maximization_step(TrainState& state, const Batch& batch, const Loss& loss, Mode mode,
                       double step_size, const TrainConfig& config,
                       const ProjectionBatch* projection = nullptr);

/// lambda <- max(0, lambda - step * (delta - mean_j c(adv_{i*(j)}, base_j))),
/// with i*(j) the maximizing row of column j.
void minimization_step(TrainState& state, const Batch& batch, const Loss& loss, Mode mode,
                       double delta, double step_size, Norm cost_norm);

struct AdversarialRisk {
  double value = 0.0;  // min over lambda of lambda delta + R; -inf when unbounded below
  double lambda_star = 0.0;
  bool converged = true;
};

/// min_{lambda >= 0} lambda * delta + R(theta, lambda) on a batch. The value
/// is -inf when delta is below the mean distance from a base point to its
/// nearest candidate; delta = 0 is handled exactly.
AdversarialRisk adversarial_risk(const AdversaryFamily& family, const Batch& batch,
                                 const Loss& loss, Mode mode, double delta, Norm cost_norm);

struct TraceRow {
  std::size_t k = 0;
  double lambda = 0.0;
  double R = 0.0;
  double risk = 0.0;
};

struct TrainResult {
  double risk = 0.0;
  double lambda_star = 0.0;
  AdversaryFamily family;
  std::vector<TraceRow> trace;
  std::size_t skipped_steps = 0;
  std::size_t best_iteration = 0;
  bool converged = true;
};

/// Alternating maximization over the family and projected descent in lambda.
/// Iterates are scored every eval_every steps by adversarial_risk on a fixed
/// evaluation batch; the best one is returned. Training starts from the
/// best-scoring member of {identity} + warm_starts (each admissible for the
/// mode). With K = 0 the risk is lambda_init * delta + R(start, lambda_init).
TrainResult run_dro_training(const evt::DependenceModel& base_model, const Loss& loss, Mode mode,
                             const TrainConfig& config,
                             std::span<const AdversaryFamily> warm_starts = {});

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace mevdro::adversary
