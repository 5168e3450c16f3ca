#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mevdro/line_search.hpp"
#include "oracles.hpp"

using namespace mevdro;

TEST(MinimizeLambda, Quadratic) {
  const auto r = minimize_lambda([](double l) { return (l - 2.0) * (l - 2.0) + 3.0; }, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.lambda, 2.0, 1e-7);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
  EXPECT_LE(r.lo, r.lambda);
  EXPECT_GE(r.hi, r.lambda);
}

TEST(MinimizeLambda, IncreasingLinearGivesZero) {
  const double delta = 0.3;
  const auto r = minimize_lambda([&](double l) { return l * delta; }, delta);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.lambda, 0.0);
  EXPECT_EQ(r.value, 0.0);
}

TEST(MinimizeLambda, MinimumBeyondInitialBracket) {
  // Initial upper end is 1/(delta + eps) = 1; expansion must reach 40.
  const auto r = minimize_lambda([](double l) { return std::abs(l - 40.0) + 1.0; }, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.lambda, 40.0, 1e-6);
  EXPECT_NEAR(r.value, 1.0, 1e-6);
}

TEST(MinimizeLambda, MonotoneDecreasingIsFlagged) {
  const auto r = minimize_lambda([](double l) { return -l; }, 1.0);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.lambda, 1e10);
}

TEST(MinimizeLambda, HingeMatchesBreakpointEnumeration) {
  const std::vector<std::vector<double>> fixtures{{0.5, 1.0, 2.0}, {0.1, 0.1, 3.0}, {0.0, 0.4, 0.9}};
  for (const auto& g : fixtures) {
    for (double delta : {0.01, 0.1, 1.0}) {
      const double w = 1.0 / static_cast<double>(g.size());
      const auto r = minimize_lambda([&](double l) { return oracle::hinge(l, g, w, delta); }, delta);
      EXPECT_NEAR(r.value, oracle::hinge_breakpoint_min(g, w, delta), 1e-7) << "delta " << delta;
    }
  }
}
