#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mevdro/adversary.hpp"
#include "mevdro/dependence.hpp"
#include "mevdro/matrix.hpp"
#include "mevdro/random.hpp"

namespace mevdro::experiments {

/// Two-component mixture: a rare, strongly dependent component and a common,
/// weakly dependent one.
struct MixtureSpec {
  evt::DependenceModel high = evt::DependenceModel::symmetric_logistic(0.1);
  evt::DependenceModel low = evt::DependenceModel::symmetric_logistic(0.9);
  double high_probability = 0.1;

  /// Mixture with component 0 = high, component 1 = low.
  [[nodiscard]] evt::DependenceModel model() const;
};

MixtureSpec sl_mixture_spec();

/// Per-coordinate share of the full-set subset, drawn uniformly on (0,1) from
/// the seed; shared by both components of the ASL mixture.
std::vector<double> asl_mixture_shares(std::uint64_t seed, std::size_t d);
MixtureSpec asl_mixture_spec(std::uint64_t seed, std::size_t d);

struct LabeledSamples {
  RowMatrix samples;
  std::vector<std::size_t> labels;
};

LabeledSamples gen_mixture_dataset(Rng& rng, const MixtureSpec& spec, std::size_t n,
                                   std::size_t d);

/// Rows are periods (sorted), columns are industries (sorted by label).
struct ReturnsTable {
  std::vector<std::string> periods;
  std::vector<std::string> columns;
  RowMatrix values;
  std::size_t dropped_rows = 0;          // periods missing some industry
  std::size_t dropped_observations = 0;  // records with an empty return
};

/// Reads `date,company,industry,return` records (columns located by header
/// name) and averages returns per industry and period. Throws
/// ValidationError listing every company without an industry label, or with
/// two different labels.
ReturnsTable industry_average(std::istream& in);

void write_returns_table(std::ostream& out, const ReturnsTable& table);

/// floor(rows / B) rows of componentwise maxima; a trailing partial block is
/// dropped.
RowMatrix block_maxima(const RowMatrix& values, std::size_t block);

inline constexpr std::size_t kWeeklyBlock = 5;
inline constexpr std::size_t kAnnualBlock = 252;
/// "weekly", "annual" or a positive integer.
std::size_t parse_block(std::string_view text);

/// Per column x -> -1 / ln(rank / (n + 1)), ties given their average rank.
RowMatrix frechet_rank_transform(const RowMatrix& values);

struct CvarTarget {
  double value = 0.0;
  double threshold = 0.0;  // x_alpha
  std::size_t count = 0;   // samples with |X|_1 <= x_alpha
  bool flagged = false;    // fewer than kMinTargetCount such samples
};

inline constexpr std::size_t kMinTargetCount = 10;

/// Mean of |X|_1 over samples with |X|_1 <= x_alpha, x_alpha the lower
/// empirical alpha-quantile of |X|_1 (order statistic ceil(alpha n)).
CvarTarget cvar_l1_target(const RowMatrix& samples, double alpha_level);

/// l(X) = |X|_1 * 1{|X|_1 <= threshold} / normalizer. Fitted to data, its
/// sample mean equals cvar_l1_target.
struct TruncatedL1Loss {
  double threshold = 0.0;
  double normalizer = 1.0;

  double operator()(std::span<const double> x) const;
  static TruncatedL1Loss from_samples(const RowMatrix& samples, double alpha_level);
};

/// theta = n / sum_i 1 / max_k X_ik; equals V(1,...,1) for max-stable data.
double extremal_coefficient(const RowMatrix& samples);

inline constexpr double kMinFittedAlpha = 0.01;

/// SL fit matching the extremal coefficient: alpha = ln(theta) / ln(d),
/// clamped to [kMinFittedAlpha, 1].
evt::DependenceModel fit_symmetric_logistic(const RowMatrix& samples);

/// Singleton-plus-full ASL with the given shares and a common alpha matching
/// the extremal coefficient.
evt::DependenceModel fit_asl_common_alpha(const RowMatrix& samples,
                                          const std::vector<double>& shares);

/// count points from lo to hi, equally spaced in log scale.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

enum class SweepTarget {
  CvarL1,  // general loss, robustified by the adversary in every mode
  Cdf,     // closed-form CDF dual (EVT-constrained only)
};

std::string to_string(SweepTarget target);
SweepTarget parse_sweep_target(std::string_view name);

struct SweepConfig {
  SweepTarget target = SweepTarget::CvarL1;
  std::vector<adversary::Mode> modes = {adversary::Mode::Unconstrained,
                                        adversary::Mode::EvtConstrained,
                                        adversary::Mode::EvtConstrainedUnitMargins};
  std::vector<double> deltas = geometric_grid(1e-3, 10.0, 12);
  double alpha_level = 0.95;
  std::vector<double> cdf_point = {};  // x of P(M <= 1/x); empty means all ones
  std::size_t replications = 10000;   // configurations for the CDF target
  adversary::TrainConfig train;       // delta and dim are set per row
  std::uint64_t seed = 0;
};

struct RiskSweepRecord {
  double delta = 0.0;
  std::string mode;
  double robust_risk = 0.0;
  double true_risk = 0.0;
  double error = 0.0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  bool converged = true;
};

/// Where the true risk comes from: a model sampled with a fixed seed, or
/// held-out samples.
struct TrueRiskSource {
  std::optional<evt::DependenceModel> model;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0;
  RowMatrix held_out;
};

/// Evaluates the sweep target for the source: cvar_l1_target on the truth
/// samples, or P(M <= 1/x) (closed form for a model, empirical otherwise).
double true_risk(const TrueRiskSource& source, const SweepConfig& config, std::size_t d);

/// One record per (delta, mode), sorted by (mode, delta). The CVaR target fits
/// its loss to `data` and trains against `base_model`; deltas are visited in
/// increasing order and, within a delta, from unit margins to unconstrained,
/// each run warm-started from the previous delta of its mode and from the
/// smaller mode at the same delta.
std::vector<RiskSweepRecord> error_vs_delta_sweep(const RowMatrix& data,
                                                  const evt::DependenceModel& base_model,
                                                  const TrueRiskSource& truth,
                                                  const SweepConfig& config);

void write_sweep_csv(std::ostream& out, std::span<const RiskSweepRecord> records);

}  // namespace mevdro::experiments
