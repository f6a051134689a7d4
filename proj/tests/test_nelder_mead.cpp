#include "servosys/nelder_mead.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "servosys/errors.hpp"

namespace servosys::optim {
namespace {

TEST(NelderMead, Rosenbrock) {
  auto f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const std::vector<double> lo = {-2.0, -2.0}, hi = {2.0, 2.0};
  NelderMeadOptions opt;
  opt.max_iterations = 5000;
  opt.max_evaluations = 10000;
  const auto res = minimize(f, {-1.2, 1.0}, lo, hi, opt);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x[0], 1.0, 1e-4);
  EXPECT_NEAR(res.x[1], 1.0, 1e-4);
}

TEST(NelderMead, ActiveBoundStaysFeasible) {
  int outside = 0;
  auto f = [&](std::span<const double> x) {
    if (x[0] < 0.5 || x[0] > 3.0 || x[1] < -1.0 || x[1] > 1.0) ++outside;
    return (x[0] + 1.0) * (x[0] + 1.0) + x[1] * x[1];
  };
  const std::vector<double> lo = {0.5, -1.0}, hi = {3.0, 1.0};
  const auto res = minimize(f, {2.0, 0.7}, lo, hi);
  EXPECT_EQ(outside, 0);
  EXPECT_NEAR(res.x[0], 0.5, 1e-6);
  EXPECT_NEAR(res.x[1], 0.0, 1e-4);
}

TEST(NelderMead, NeverWorseThanStart) {
  auto f = [](std::span<const double> x) { return std::abs(x[0] - 0.3) + std::abs(x[1]); };
  const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
  const std::vector<double> start = {0.9, 0.9};
  const auto res = minimize(f, start, lo, hi);
  EXPECT_LE(res.value, f(start));
}

TEST(NelderMead, DeterministicAndBudgeted) {
  auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::cos(7.0 * v) + v * v;
    return s;
  };
  const std::vector<double> lo(5, -1.0), hi(5, 1.0);
  NelderMeadOptions opt;
  opt.max_evaluations = 300;
  const auto a = minimize(f, {0.1, 0.2, 0.3, 0.4, 0.5}, lo, hi, opt);
  const auto b = minimize(f, {0.1, 0.2, 0.3, 0.4, 0.5}, lo, hi, opt);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.value, b.value);
  // One reflection round can add up to n + 2 evaluations past the budget.
  EXPECT_LE(a.evaluations, 300 + 7);
}

TEST(NelderMead, DimensionMismatch) {
  auto f = [](std::span<const double>) { return 0.0; };
  const std::vector<double> lo = {0.0}, hi = {1.0, 1.0};
  EXPECT_THROW(minimize(f, {0.5, 0.5}, lo, hi), ValidationError);
}

}  // namespace
}  // namespace servosys::optim
