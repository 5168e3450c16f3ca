#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "mevdro/adversary.hpp"
#include "mevdro/dependence.hpp"
#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/norms.hpp"
#include "mevdro/point_process.hpp"
#include "mevdro/random.hpp"

using namespace mevdro;
using namespace mevdro::adversary;
using evt::DependenceModel;

namespace {

const DependenceModel kSl = DependenceModel::symmetric_logistic(0.5);

double l1_loss(std::span<const double> x) { return norm(x, Norm::L1); }

/// Bounded loss so that Monte Carlo means settle quickly.
double capped_l1_loss(std::span<const double> x) { return std::min(norm(x, Norm::L1), 20.0); }

AdversaryFamily random_family(std::uint64_t seed, Mode mode, std::size_t d = 2, double scale = 0.5) {
  AdversaryFamily f(d);
  Rng rng = make_rng(seed, stream::kData);
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> theta(f.parameters().begin(), f.parameters().end());
  for (std::size_t p : f.active_parameters(mode)) theta[p] = z(rng);
  f.set_parameters(theta);
  return f;
}

/// Batch of one-atom configurations with base row i equal to marks[i] / a.
Batch manual_batch(const std::vector<std::vector<double>>& points) {
  Batch b;
  const std::size_t d = points.front().size();
  b.base = RowMatrix(0, d);
  for (const auto& p : points) {
    double total = 0.0;
    for (double v : p) total += v;
    // Marks sum to d, so the arrival is d / |p|_1.
    const double a = static_cast<double>(d) / total;
    RowMatrix mark(1, d);
    for (std::size_t k = 0; k < d; ++k) mark(0, k) = p[k] * a;
    b.configs.emplace_back(std::vector<double>{a}, mark);
    b.atom_components.push_back({0});
    b.candidate_components.push_back(0);
    b.base.append_row(pp::max_stable_from_configuration(b.configs.back()));
  }
  return b;
}

TrainConfig small_config(double delta, std::size_t k) {
  TrainConfig c;
  c.dim = 2;
  c.delta = delta;
  c.samples = 32;
  c.eval_samples = 64;
  c.iterations = k;
  c.eval_every = 5;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(Mode, RoundTrip) {
  for (Mode m : {Mode::Unconstrained, Mode::EvtConstrained, Mode::EvtConstrainedUnitMargins}) {
    EXPECT_EQ(parse_mode(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Mode::EvtConstrainedUnitMargins), "evt-unit-margins");
  EXPECT_THROW(parse_mode("free"), ValidationError);
}

TEST(AdversaryFamily, IdentityAndAdmissibility) {
  AdversaryFamily f(3);
  EXPECT_EQ(f.parameters().size(), 3u * 8u * 3u + 8u);
  for (Mode m : {Mode::Unconstrained, Mode::EvtConstrained, Mode::EvtConstrainedUnitMargins}) {
    EXPECT_TRUE(f.admissible(m));
  }
  const std::vector<double> mark{0.3, 2.1, 0.6};
  std::vector<double> out(3);
  f.transform_mark(4, mark, out);
  EXPECT_EQ(out, mark);
  f.radial_shift(2, 1) = 0.1;
  EXPECT_TRUE(f.admissible(Mode::Unconstrained));
  EXPECT_FALSE(f.admissible(Mode::EvtConstrained));
  EXPECT_EQ(f.active_parameters(Mode::EvtConstrained).size(), 2u * 8u * 3u);
  EXPECT_THROW(f.set_parameters(std::vector<double>(5, 0.0)), ValidationError);
}

TEST(AdversaryFamily, MapsStayOnScaledSimplex) {
  const auto f = random_family(1, Mode::EvtConstrained, 4, 1.0);
  Rng rng = make_rng(2, stream::kData);
  const auto w = evt::sample_spectral(rng, kSl, 200, 4);
  std::vector<double> mark(4), out(4);
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) mark[k] = 4.0 * w(i, k);
    f.transform_mark(i % 8, mark, out);
    double s = 0.0;
    for (double v : out) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 4.0, 1e-12);
  }
  const auto spectral = f.sample_spectral(rng, kSl, 100);
  for (std::size_t i = 0; i < spectral.rows(); ++i) EXPECT_TRUE(evt::on_simplex(spectral.row(i), 1e-12));
}

TEST(AdversaryFamily, JsonRoundTrip) {
  const auto f = random_family(3, Mode::Unconstrained);
  EXPECT_EQ(AdversaryFamily::from_json(f.to_json()), f);
  auto j = f.to_json();
  j["extra"] = 1;
  EXPECT_THROW(AdversaryFamily::from_json(j), ValidationError);
}

TEST(AdversarialSamples, IdentityCopiesBase) {
  const auto batch = make_batch(kSl, 50, 200, 2, 8, 4, stream::kAdversaryTrain, 1);
  const AdversaryFamily f(2);
  for (Mode m : {Mode::Unconstrained, Mode::EvtConstrained}) EXPECT_EQ(adversarial_samples(f, batch, m), batch.base);
}

TEST(AdversarialSamples, EvtModeSharesArrivals) {
  const auto batch = make_batch(kSl, 20, 200, 2, 8, 5, stream::kAdversaryTrain, 1);
  const auto f = random_family(6, Mode::EvtConstrained);
  const auto adv = adversarial_samples(f, batch, Mode::EvtConstrained);
  std::vector<double> mark(2);
  for (std::size_t i = 0; i < batch.configs.size(); ++i) {
    const auto& cfg = batch.configs[i];
    RowMatrix marks(cfg.size(), 2);
    for (std::size_t n = 0; n < cfg.size(); ++n) {
      f.transform_mark(batch.atom_components[i][n], cfg.mark(n), mark);
      marks(n, 0) = mark[0];
      marks(n, 1) = mark[1];
    }
    const std::vector<double> arrivals(cfg.arrivals().begin(), cfg.arrivals().end());
    const auto expected = pp::max_stable_from_configuration(pp::PointConfiguration(arrivals, marks));
    EXPECT_EQ(adv(i, 0), expected[0]);
    EXPECT_EQ(adv(i, 1), expected[1]);
  }
}

TEST(LossMatrix, Examples) {
  const RowMatrix adv(2, 2, {1.0, 2.0, 0.5, 0.5});
  const RowMatrix base(2, 2, {1.0, 1.0, 2.0, 0.0});
  const Loss loss = l1_loss;
  const auto free = build_loss_matrix(adv, base, loss, 0.0, Norm::L1);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(free(i, 0), free(i, 1));
  // Hand enumeration: l(adv) = (3, 1); costs |adv_i - base_j|_1.
  const auto l = build_loss_matrix(adv, base, loss, 1.0, Norm::L1);
  EXPECT_DOUBLE_EQ(l(0, 0), 3.0 - 1.0);
  EXPECT_DOUBLE_EQ(l(0, 1), 3.0 - 3.0);
  EXPECT_DOUBLE_EQ(l(1, 0), 1.0 - 1.0);
  EXPECT_DOUBLE_EQ(l(1, 1), 1.0 - 2.0);
  const auto self = build_loss_matrix(base, base, loss, 2.0, Norm::L2);
  EXPECT_DOUBLE_EQ(self(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(self(1, 1), 2.0);
  EXPECT_THROW(build_loss_matrix(adv, RowMatrix(3, 2), loss, 1.0, Norm::L1), ValidationError);
}

TEST(InnerObjective, Examples) {
  EXPECT_DOUBLE_EQ(inner_objective(RowMatrix(2, 2, {1.0, 0.0, 0.0, 1.0})), 1.0);
  EXPECT_DOUBLE_EQ(inner_objective(RowMatrix(3, 3, 2.5)), 2.5);
  Rng rng = make_rng(7, stream::kData);
  std::normal_distribution<double> z;
  RowMatrix m(5, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) m(i, j) = z(rng);
  }
  double expected = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    double best = m(0, j);
    for (std::size_t i = 1; i < 5; ++i) best = std::max(best, m(i, j));
    expected += best / 5.0;
  }
  EXPECT_NEAR(inner_objective(m), expected, 1e-15);
  EXPECT_THROW(inner_objective(RowMatrix()), ValidationError);
}

TEST(FiniteDifference, MatchesSecantGrid) {
  const auto f = [](std::span<const double> t) { return std::sin(t[0]) * std::exp(t[1]) + t[0] * t[0] * t[1]; };
  const std::vector<double> theta{0.4, -0.3};
  const std::vector<std::size_t> coords{0, 1};
  const auto g = finite_difference_gradient(f, theta, coords, 1e-4);
  for (std::size_t p = 0; p < 2; ++p) {
    // Secant slopes over a dense symmetric grid of widths, extrapolated to zero.
    double slope = 0.0;
    for (double h : {1e-3, 2e-3, 4e-3}) {
      std::vector<double> up = theta, down = theta;
      up[p] += h;
      down[p] -= h;
      slope += (f(up) - f(down)) / (2.0 * h) / 3.0;
    }
    EXPECT_NEAR(g[p], slope, 1e-3 * std::abs(slope));
  }
  const std::vector<std::size_t> only_first{0};
  EXPECT_EQ(finite_difference_gradient(f, theta, only_first, 1e-4)[1], 0.0);
}

TEST(GradientAscent, QuadraticSurrogate) {
  const auto r = [](std::span<const double> t) { return -(t[0] - 1.0) * (t[0] - 1.0); };
  std::vector<double> theta{-2.0};
  const std::vector<std::size_t> coords{0};
  for (int k = 0; k < 200; ++k) ASSERT_TRUE(gradient_ascent_step(r, theta, coords, 0.1, 1e-4, 10.0));
  EXPECT_NEAR(theta[0], 1.0, 1e-3);

  std::vector<double> fixed{-2.0};
  gradient_ascent_step(r, fixed, coords, 0.0, 1e-4, 10.0);
  EXPECT_EQ(fixed[0], -2.0);

  const auto bad = [](std::span<const double> t) { return t[0] > 0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
  std::vector<double> at{0.0};
  EXPECT_FALSE(gradient_ascent_step(bad, at, coords, 0.1, 1e-4, 10.0));
  EXPECT_EQ(at[0], 0.0);
}

TEST(GradientAscent, ClipsLargeGradients) {
  const auto r = [](std::span<const double> t) { return 1e6 * t[0]; };
  std::vector<double> theta{0.0};
  const std::vector<std::size_t> coords{0};
  gradient_ascent_step(r, theta, coords, 0.1, 1e-4, 10.0);
  EXPECT_NEAR(theta[0], 1.0, 1e-9);
}

TEST(MaximizationStep, ZeroStepKeepsTheta) {
  const auto batch = make_batch(kSl, 16, 200, 2, 8, 8, stream::kAdversaryTrain, 1);
  TrainConfig config = small_config(0.1, 1);
  TrainState state{.family = random_family(9, Mode::EvtConstrained), .lambda = 1.0};
  const std::vector<double> before(state.family.parameters().begin(), state.family.parameters().end());
  maximization_step(state, batch, capped_l1_loss, Mode::EvtConstrained, 0.0, config);
  EXPECT_EQ(std::vector<double>(state.family.parameters().begin(), state.family.parameters().end()), before);
}

TEST(MinimizationStep, SignOfUpdate) {
  const auto batch = make_batch(kSl, 32, 200, 2, 8, 11, stream::kAdversaryTrain, 1);
  TrainState big{.family = random_family(12, Mode::EvtConstrained), .lambda = 1.0};
  minimization_step(big, batch, capped_l1_loss, Mode::EvtConstrained, 100.0, 1e-2, Norm::L1);
  EXPECT_LT(big.lambda, 1.0);
  TrainState huge{.family = big.family, .lambda = 0.5};
  minimization_step(huge, batch, capped_l1_loss, Mode::EvtConstrained, 1e6, 1.0, Norm::L1);
  EXPECT_EQ(huge.lambda, 0.0);

  TrainState zero{.family = random_family(12, Mode::EvtConstrained), .lambda = 0.0};
  minimization_step(zero, batch, capped_l1_loss, Mode::EvtConstrained, 0.0, 1e-2, Norm::L1);
  EXPECT_GT(zero.lambda, 0.0);
}

TEST(MinimizationStep, FixedPointMatchesRareSetDual) {
  // Base points (2, 1) in A = {x >= (2, 1)} and (2, 0.5) at L1 distance 0.5,
  // whose projection onto A is the first point. With the loss 1{x in A} the
  // closed-form dual is min_l l delta + ((1) + (1 - 0.5 l)^+) / 2.
  const auto batch = manual_batch({{2.0, 1.0}, {2.0, 0.5}});
  const Loss indicator = [](std::span<const double> x) { return (x[0] >= 2.0 && x[1] >= 1.0) ? 1.0 : 0.0; };
  const double delta = 0.1;
  TrainState state{.family = AdversaryFamily(2), .lambda = 1.0 / (delta + 1e-3)};
  for (int k = 0; k < 3000; ++k) {
    minimization_step(state, batch, indicator, Mode::EvtConstrained, delta, 5e-2, Norm::L1);
  }
  const auto l = build_loss_matrix(batch.base, batch.base, indicator, state.lambda, Norm::L1);
  const double risk = state.lambda * delta + inner_objective(l);
  const double closed_form = std::min(1.0, 2.0 * delta + 0.5);
  EXPECT_NEAR(risk, closed_form, 5e-2);
}

TEST(AdversarialRisk, ZeroBudgetIsBaseline) {
  const auto batch = make_batch(kSl, 64, 200, 2, 8, 13, stream::kAdversaryEval, 0);
  double mean = 0.0;
  for (std::size_t j = 0; j < batch.base.rows(); ++j) mean += capped_l1_loss(batch.base.row(j)) / 64.0;
  for (Mode m : {Mode::Unconstrained, Mode::EvtConstrained}) {
    const auto f = random_family(14, m);
    const auto r = adversarial_risk(f, batch, capped_l1_loss, m, 0.0, Norm::L1);
    EXPECT_NEAR(r.value, mean, 1e-12);
    const auto identity = adversarial_risk(AdversaryFamily(2), batch, capped_l1_loss, m, 0.0, Norm::L1);
    EXPECT_NEAR(identity.value, mean, 1e-12);
  }
}

TEST(AdversarialRisk, NonDecreasingInBudget) {
  const auto batch = make_batch(kSl, 64, 200, 2, 8, 15, stream::kAdversaryEval, 0);
  const auto f = random_family(16, Mode::Unconstrained);
  double previous = -std::numeric_limits<double>::infinity();
  for (double delta : {0.0, 0.01, 0.1, 0.5, 1.0, 5.0}) {
    const double v = adversarial_risk(f, batch, capped_l1_loss, Mode::Unconstrained, delta, Norm::L1).value;
    EXPECT_GE(v, previous - 1e-12);
    previous = v;
  }
}

TEST(RunDroTraining, ZeroIterationsGivesInitialRisk) {
  for (double delta : {0.0, 0.05, 0.5}) {
    TrainConfig config = small_config(delta, 0);
    ASSERT_GE(config.initial_lambda(), 1.0);
    const auto eval = make_batch(kSl, config.eval_samples, config.truncation, 2, config.components, config.seed,
                                 stream::kAdversaryEval, 0);
    double mean = 0.0;
    for (std::size_t j = 0; j < eval.base.rows(); ++j) mean += l1_loss(eval.base.row(j));
    mean /= static_cast<double>(eval.base.rows());
    const auto r = run_dro_training(kSl, l1_loss, Mode::EvtConstrained, config);
    // With an l1 loss and lambda >= 1 no other candidate beats staying put.
    EXPECT_NEAR(r.risk, config.initial_lambda() * delta + mean, 1e-9 * (1.0 + r.risk));
    EXPECT_EQ(r.trace.size(), 1u);
    EXPECT_EQ(r.family, AdversaryFamily(2));
  }
}

TEST(RunDroTraining, ZeroBudgetNearBaselineRisk) {
  const Loss loss = [](std::span<const double> x) { return std::min(norm(x, Norm::L1), 5.0); };
  TrainConfig config = small_config(0.0, 5);
  config.eval_samples = 4000;
  const auto r = run_dro_training(kSl, loss, Mode::EvtConstrained, config);
  Rng rng = make_rng(99, stream::kTruth);
  const auto truth = evt::sample_max_stable(rng, kSl, 100000, 2);
  double mean = 0.0;
  for (std::size_t i = 0; i < truth.rows(); ++i) mean += loss(truth.row(i));
  mean /= static_cast<double>(truth.rows());
  EXPECT_NEAR(r.risk, mean, 0.03 * mean);
}

TEST(RunDroTraining, NestedModesWithWarmStarts) {
  for (double delta : {0.05, 0.5}) {
    const auto um = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrainedUnitMargins, small_config(delta, 20));
    const std::vector<AdversaryFamily> from_um{um.family};
    const auto evt = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrained, small_config(delta, 20), from_um);
    const std::vector<AdversaryFamily> from_evt{evt.family};
    const auto un = run_dro_training(kSl, capped_l1_loss, Mode::Unconstrained, small_config(delta, 20), from_evt);
    TrainConfig zero = small_config(0.0, 0);
    const double baseline = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrained, zero).risk;
    EXPECT_GE(un.risk, evt.risk);
    EXPECT_GE(evt.risk, um.risk);
    EXPECT_GE(um.risk, baseline - 1e-12);
  }
}

TEST(RunDroTraining, RejectsInadmissibleWarmStart) {
  const std::vector<AdversaryFamily> radial{random_family(18, Mode::Unconstrained)};
  EXPECT_THROW(run_dro_training(kSl, l1_loss, Mode::EvtConstrained, small_config(0.1, 1), radial), ValidationError);
}

TEST(RunDroTraining, DeterministicAcrossRunsAndThreads) {
  TrainConfig config = small_config(0.2, 15);
  const auto a = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrainedUnitMargins, config);
  config.threads = 3;
  const auto b = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrainedUnitMargins, config);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a.trace);
  write_trace_csv(sb, b.trace);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.family, b.family);
  EXPECT_EQ(sa.str().substr(0, 15), "k,lambda,R,risk");
  EXPECT_EQ(a.trace.size(), 16u);
}

TEST(UnitMargins, ProjectionRestoresMeans) {
  auto f = random_family(19, Mode::EvtConstrained, 3, 0.8);
  const auto fit = make_projection_batch(kSl, 4096, 3, 8, 20);
  project_unit_margins(f, fit);
  for (double m : spectral_means(f, fit)) EXPECT_NEAR(m, 1.0 / 3.0, 1e-8);
  const auto fresh = make_projection_batch(kSl, 10000, 3, 8, 21);
  for (double m : spectral_means(f, fresh)) EXPECT_NEAR(m, 1.0 / 3.0, 1e-2);
  EXPECT_TRUE(f.admissible(Mode::EvtConstrainedUnitMargins));
}

TEST(UnitMargins, TrainedFamilyKeepsMeans) {
  const auto r = run_dro_training(kSl, capped_l1_loss, Mode::EvtConstrainedUnitMargins, small_config(0.5, 20));
  const auto fresh = make_projection_batch(kSl, 10000, 2, 8, 22);
  for (double m : spectral_means(r.family, fresh)) EXPECT_NEAR(m, 0.5, 1e-2);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.delta = -0.1;
  EXPECT_THROW(c.validate(), ValidationError);
  c.delta = 0.1;
  c.samples = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.samples = 8;
  c.eval_every = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}
