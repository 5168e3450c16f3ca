#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mevdro/error.hpp"
#include "mevdro/evt.hpp"
#include "mevdro/experiments.hpp"
#include "mevdro/random.hpp"
#include "oracles.hpp"

using namespace mevdro;
using namespace mevdro::experiments;
using adversary::Mode;

namespace {

RowMatrix column(const std::vector<double>& v) { return RowMatrix(v.size(), 1, v); }

SweepConfig tiny_sweep() {
  SweepConfig c;
  c.deltas = {0.01, 0.1, 1.0};
  c.train.samples = 32;
  c.train.eval_samples = 64;
  c.train.iterations = 10;
  c.train.eval_every = 5;
  c.seed = 3;
  return c;
}

TrueRiskSource from_model(const evt::DependenceModel& model, std::size_t samples = 1000000) {
  TrueRiskSource s;
  s.model = model;
  s.samples = samples;
  return s;
}

}  // namespace

TEST(CvarTarget, HandFixtures) {
  std::vector<double> v(10);
  for (std::size_t i = 0; i < 10; ++i) v[i] = static_cast<double>(10 - i);
  const RowMatrix x = column(v);
  EXPECT_DOUBLE_EQ(cvar_l1_target(x, 1.0).value, 5.5);
  EXPECT_DOUBLE_EQ(cvar_l1_target(x, 0.95).value, 5.5);
  const auto half = cvar_l1_target(x, 0.5);
  EXPECT_DOUBLE_EQ(half.value, 3.0);
  EXPECT_DOUBLE_EQ(half.threshold, 5.0);
  EXPECT_EQ(half.count, 5u);
  EXPECT_TRUE(half.flagged);
  EXPECT_DOUBLE_EQ(cvar_l1_target(RowMatrix(40, 3, 0.5), 0.9).value, 1.5);
  EXPECT_FALSE(cvar_l1_target(RowMatrix(40, 3, 0.5), 0.9).flagged);
  EXPECT_THROW(cvar_l1_target(x, 0.0), ValidationError);
  EXPECT_THROW(cvar_l1_target(RowMatrix(0, 2), 0.5), ValidationError);
}

TEST(CvarTarget, MatchesSortAndSum) {
  Rng rng = make_rng(1, stream::kData);
  const auto x = evt::sample_max_stable(rng, evt::DependenceModel::symmetric_logistic(0.4), 2001, 3);
  std::vector<double> norms;
  for (std::size_t i = 0; i < x.rows(); ++i) norms.push_back(x(i, 0) + x(i, 1) + x(i, 2));
  std::sort(norms.begin(), norms.end());
  for (double alpha : {0.5, 0.9, 0.95, 0.99}) {
    const auto keep = static_cast<std::size_t>(std::ceil(alpha * 2001.0));
    double s = 0.0;
    for (std::size_t i = 0; i < keep; ++i) s += norms[i];
    EXPECT_NEAR(cvar_l1_target(x, alpha).value, s / static_cast<double>(keep), 1e-12 * s);
  }
}

TEST(TruncatedL1Loss, SampleMeanEqualsTarget) {
  Rng rng = make_rng(2, stream::kData);
  const auto x = evt::sample_max_stable(rng, evt::DependenceModel::symmetric_logistic(0.6), 1000, 2);
  const auto loss = TruncatedL1Loss::from_samples(x, 0.95);
  double mean = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) mean += loss(x.row(i)) / 1000.0;
  EXPECT_NEAR(mean, cvar_l1_target(x, 0.95).value, 1e-12);
  const std::vector<double> far{loss.threshold, 1.0};
  EXPECT_EQ(loss(far), 0.0);
}

TEST(Mixture, RareComponentShare) {
  Rng rng = make_rng(4, stream::kData);
  const std::size_t n = 20000;
  const auto data = gen_mixture_dataset(rng, sl_mixture_spec(), n, 2);
  ASSERT_EQ(data.labels.size(), n);
  const auto rare = static_cast<double>(std::count(data.labels.begin(), data.labels.end(), 0u));
  const double sd = std::sqrt(n * 0.1 * 0.9);
  EXPECT_NEAR(rare, 0.1 * n, 2.576 * sd);
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> margin(n);
    for (std::size_t i = 0; i < n; ++i) margin[i] = data.samples(i, k);
    EXPECT_LT(oracle::ks_statistic(margin, oracle::unit_frechet_cdf), 1.63 / std::sqrt(n));
  }
}

TEST(Mixture, DegenerateProbabilities) {
  auto spec = asl_mixture_spec(5, 3);
  spec.high_probability = 1.0;
  Rng rng = make_rng(5, stream::kData);
  const auto all_high = gen_mixture_dataset(rng, spec, 300, 3);
  EXPECT_TRUE(std::all_of(all_high.labels.begin(), all_high.labels.end(), [](auto l) { return l == 0; }));
  spec.high_probability = 0.0;
  const auto all_low = gen_mixture_dataset(rng, spec, 300, 3);
  EXPECT_TRUE(std::all_of(all_low.labels.begin(), all_low.labels.end(), [](auto l) { return l == 1; }));
  spec.high_probability = 1.5;
  EXPECT_THROW(spec.model(), ValidationError);
}

TEST(Mixture, AslSharesSeeded) {
  const auto a = asl_mixture_shares(7, 4);
  EXPECT_EQ(a, asl_mixture_shares(7, 4));
  EXPECT_NE(a, asl_mixture_shares(8, 4));
  for (double s : a) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(BlockMaxima, Examples) {
  const RowMatrix x(6, 2, {1, 6, 3, 5, 2, 4, 0, 1, 9, 2, 4, 3});
  const auto m = block_maxima(x, 3);
  ASSERT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(0, 0), 3.0);
  EXPECT_EQ(m(0, 1), 6.0);
  EXPECT_EQ(m(1, 0), 9.0);
  EXPECT_EQ(m(1, 1), 3.0);
  EXPECT_EQ(block_maxima(x, 1), x);
  EXPECT_EQ(block_maxima(x, 4).rows(), 1u);
  EXPECT_EQ(block_maxima(RowMatrix(23, 3, 1.0), 5).rows(), 4u);
  EXPECT_THROW(block_maxima(x, 7), ValidationError);
  EXPECT_THROW(block_maxima(x, 0), ValidationError);
}

TEST(ParseBlock, Values) {
  EXPECT_EQ(parse_block("weekly"), 5u);
  EXPECT_EQ(parse_block("annual"), 252u);
  EXPECT_EQ(parse_block("21"), 21u);
  for (const char* bad : {"0", "-3", "monthly", "", "5x"}) EXPECT_THROW(parse_block(bad), ValidationError) << bad;
}

TEST(IndustryAverage, AveragesPerIndustryAndPeriod) {
  std::istringstream in(
      "date,company,industry,return\n"
      "2001-01-02,A,Tech,0.01\n"
      "2001-01-02,B,Tech,0.03\n"
      "2001-01-02,C,Energy,-0.02\n"
      "2001-01-03,A,Tech,0.05\n"
      "2001-01-03,C,,0.04\n"
      "2001-01-03,B,Tech,\n"
      "2001-01-04,A,Tech,0.02\n");
  const auto t = industry_average(in);
  ASSERT_EQ(t.columns, (std::vector<std::string>{"Energy", "Tech"}));
  ASSERT_EQ(t.periods, (std::vector<std::string>{"2001-01-02", "2001-01-03"}));
  EXPECT_DOUBLE_EQ(t.values(0, 1), 0.02);
  EXPECT_DOUBLE_EQ(t.values(0, 0), -0.02);
  EXPECT_DOUBLE_EQ(t.values(1, 1), 0.05);
  EXPECT_DOUBLE_EQ(t.values(1, 0), 0.04);
  EXPECT_EQ(t.dropped_rows, 1u);
  EXPECT_EQ(t.dropped_observations, 1u);
}

TEST(IndustryAverage, ColumnOrderDoesNotMatter) {
  const std::string a =
      "date,company,industry,return\n2001-01-02,A,X,0.5\n2001-01-02,B,Y,0.25\n2001-01-03,A,X,1\n2001-01-03,B,Y,2\n";
  const std::string b =
      "return,industry,company,date\n0.5,X,A,2001-01-02\n0.25,Y,B,2001-01-02\n1,X,A,2001-01-03\n2,Y,B,2001-01-03\n";
  std::istringstream ia(a), ib(b);
  const auto ta = industry_average(ia);
  const auto tb = industry_average(ib);
  EXPECT_EQ(ta.values, tb.values);
  EXPECT_EQ(ta.columns, tb.columns);
  std::ostringstream out;
  write_returns_table(out, ta);
  EXPECT_EQ(out.str(), "date,X,Y\n2001-01-02,0.5,0.25\n2001-01-03,1,2\n");
}

TEST(IndustryAverage, ElevenIndustries) {
  std::ostringstream csv;
  csv << "date,company,industry,return\n";
  for (int day = 1; day <= 3; ++day) {
    for (int c = 0; c < 33; ++c) {
      csv << "d" << day << ",c" << c << ",ind" << (c % 11 < 10 ? "0" : "") << c % 11 << ',' << 0.001 * c << '\n';
    }
  }
  std::istringstream in(csv.str());
  const auto t = industry_average(in);
  EXPECT_EQ(t.columns.size(), 11u);
  EXPECT_EQ(t.values.rows(), 3u);
  // ind00 holds companies 0, 11, 22.
  EXPECT_NEAR(t.values(0, 0), 0.011, 1e-15);
}

TEST(IndustryAverage, RejectsUnlabeledAndAmbiguous) {
  std::istringstream unlabeled("date,company,industry,return\nd1,A,X,0.1\nd1,B,,0.2\nd1,C,,0.3\n");
  try {
    industry_average(unlabeled);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("B, C"), std::string::npos) << e.what();
  }
  std::istringstream ambiguous("date,company,industry,return\nd1,A,X,0.1\nd2,A,Y,0.2\n");
  EXPECT_THROW(industry_average(ambiguous), ValidationError);
  std::istringstream no_column("date,firm,industry,return\n");
  EXPECT_THROW(industry_average(no_column), ValidationError);
}

TEST(FrechetRankTransform, RanksAndTies) {
  const RowMatrix x(4, 2, {3.0, 1.0, 1.0, 1.0, 2.0, 5.0, 4.0, 1.0});
  const auto f = frechet_rank_transform(x);
  auto expected = [](double rank) { return -1.0 / std::log(rank / 5.0); };
  EXPECT_DOUBLE_EQ(f(0, 0), expected(3));
  EXPECT_DOUBLE_EQ(f(1, 0), expected(1));
  EXPECT_DOUBLE_EQ(f(2, 0), expected(2));
  EXPECT_DOUBLE_EQ(f(3, 0), expected(4));
  for (std::size_t r : {0u, 1u, 3u}) EXPECT_DOUBLE_EQ(f(r, 1), expected(2));
  EXPECT_DOUBLE_EQ(f(2, 1), expected(4));
}

TEST(FrechetRankTransform, MarginsLookFrechet) {
  Rng rng = make_rng(6, stream::kData);
  std::normal_distribution<double> z;
  RowMatrix x(5000, 1);
  for (std::size_t i = 0; i < 5000; ++i) x(i, 0) = z(rng);
  const auto f = frechet_rank_transform(x);
  std::vector<double> v(f.data().begin(), f.data().end());
  EXPECT_LT(oracle::ks_statistic(v, oracle::unit_frechet_cdf), 1e-3);
}

TEST(GeometricGrid, Endpoints) {
  const auto g = geometric_grid(1e-3, 10.0, 12);
  ASSERT_EQ(g.size(), 12u);
  EXPECT_EQ(g.front(), 1e-3);
  EXPECT_EQ(g.back(), 10.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) EXPECT_NEAR(g[i] * g[i], g[i - 1] * g[i + 1], 1e-12 * g[i] * g[i]);
  EXPECT_EQ(geometric_grid(2.0, 5.0, 1), std::vector<double>{2.0});
  EXPECT_THROW(geometric_grid(0.0, 1.0, 3), ValidationError);
}

TEST(ExtremalCoefficient, RecoversLogisticDependence) {
  for (double alpha : {0.3, 0.7}) {
    Rng rng = make_rng(7, stream::kData);
    const auto x = evt::sample_max_stable(rng, evt::DependenceModel::symmetric_logistic(alpha), 100000, 3);
    const double theta = std::pow(3.0, alpha);
    EXPECT_NEAR(extremal_coefficient(x), theta, 0.015 * theta);
    EXPECT_NEAR(std::get<evt::SymmetricLogistic>(fit_symmetric_logistic(x).variant()).alpha, alpha, 0.02);
  }
  EXPECT_THROW(extremal_coefficient(RowMatrix(2, 2, 0.0)), DomainError);
}

TEST(ExtremalCoefficient, AslCommonAlphaFit) {
  const auto shares = asl_mixture_shares(8, 3);
  const auto model = evt::make_singleton_plus_full_asl(shares, 0.4);
  Rng rng = make_rng(8, stream::kData);
  const auto x = evt::sample_max_stable(rng, model, 100000, 3);
  const auto fit = fit_asl_common_alpha(x, shares);
  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(evt::exponent(ones, fit), evt::exponent(ones, model), 0.015 * evt::exponent(ones, model));
}

TEST(SweepTarget, RoundTrip) {
  EXPECT_EQ(parse_sweep_target(to_string(SweepTarget::CvarL1)), SweepTarget::CvarL1);
  EXPECT_EQ(parse_sweep_target("cdf"), SweepTarget::Cdf);
  EXPECT_THROW(parse_sweep_target("var"), ValidationError);
}

TEST(TrueRisk, CdfClosedFormAndEmpirical) {
  SweepConfig c;
  c.target = SweepTarget::Cdf;
  const auto model = evt::DependenceModel::symmetric_logistic(0.5);
  const TrueRiskSource s = from_model(model);
  EXPECT_NEAR(true_risk(s, c, 2), std::exp(-std::sqrt(2.0)), 1e-12);
  TrueRiskSource held;
  held.held_out = RowMatrix(4, 2, {0.5, 0.5, 2.0, 0.1, 0.9, 1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(true_risk(held, c, 2), 0.75);
}

TEST(Sweep, ZeroBudgetModesCoincide) {
  Rng rng = make_rng(9, stream::kData);
  const auto model = evt::DependenceModel::symmetric_logistic(0.5);
  const auto data = evt::sample_max_stable(rng, model, 500, 2);
  SweepConfig c = tiny_sweep();
  c.deltas = {0.0};
  const auto records = error_vs_delta_sweep(data, model, from_model(model, 20000), c);
  ASSERT_EQ(records.size(), 3u);
  for (const auto& r : records) {
    EXPECT_DOUBLE_EQ(r.robust_risk, records.front().robust_risk);
    EXPECT_DOUBLE_EQ(r.error, std::abs(r.robust_risk - r.true_risk));
  }
}

TEST(Sweep, SortedNestedAndMonotone) {
  Rng rng = make_rng(10, stream::kData);
  const auto model = evt::DependenceModel::symmetric_logistic(0.5);
  const auto data = evt::sample_max_stable(rng, model, 500, 2);
  SweepConfig c = tiny_sweep();
  c.deltas = {1.0, 0.01, 0.1};
  const auto records = error_vs_delta_sweep(data, model, from_model(model, 20000), c);
  ASSERT_EQ(records.size(), 9u);
  const std::vector<std::string> modes{"unconstrained", "evt", "evt-unit-margins"};
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& r = records[3 * m + i];
      EXPECT_EQ(r.mode, modes[m]);
      EXPECT_EQ(r.delta, (std::vector<double>{0.01, 0.1, 1.0})[i]);
      if (i > 0) {
        EXPECT_GE(r.robust_risk, records[3 * m + i - 1].robust_risk);
      }
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GE(records[i].robust_risk, records[3 + i].robust_risk);
    EXPECT_GE(records[3 + i].robust_risk, records[6 + i].robust_risk);
  }
  std::ostringstream out;
  write_sweep_csv(out, records);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Sweep, CdfTargetUsesClosedFormDual) {
  const auto model = evt::DependenceModel::symmetric_logistic(0.5);
  Rng rng = make_rng(11, stream::kData);
  const auto data = evt::sample_max_stable(rng, model, 100, 2);
  SweepConfig c = tiny_sweep();
  c.target = SweepTarget::Cdf;
  c.replications = 2000;
  EXPECT_THROW(error_vs_delta_sweep(data, model, from_model(model), c), ValidationError);
  c.modes = {Mode::EvtConstrained};
  const auto records = error_vs_delta_sweep(data, model, from_model(model), c);
  ASSERT_EQ(records.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_LE(records[i].robust_risk, records[i - 1].robust_risk);
  EXPECT_NEAR(records.front().true_risk, std::exp(-std::sqrt(2.0)), 1e-12);
}

TEST(Sweep, RejectsBadConfig) {
  const auto model = evt::DependenceModel::symmetric_logistic(0.5);
  const RowMatrix data(10, 2, 1.0);
  SweepConfig c = tiny_sweep();
  c.deltas = {};
  EXPECT_THROW(error_vs_delta_sweep(data, model, from_model(model), c), ValidationError);
  c = tiny_sweep();
  c.deltas = {-1.0};
  EXPECT_THROW(error_vs_delta_sweep(data, model, from_model(model), c), ValidationError);
  c = tiny_sweep();
  c.modes = {Mode::EvtConstrained, Mode::EvtConstrained};
  EXPECT_THROW(error_vs_delta_sweep(data, model, from_model(model), c), ValidationError);
}
