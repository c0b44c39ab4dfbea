#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "phishvqc/cobyla.hpp"

using namespace phishvqc;

namespace {

// Written exactly as in the Fortran reference drivers so that evaluation
// sequences can be compared bit for bit.
double quadratic(std::span<const double> x) {
  return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
}

double rosenbrock(std::span<const double> x) {
  const double d = x[1] - x[0] * x[0];
  return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * (d * d);
}

void expect_monotone(const OptimizationTrace& t) {
  for (std::size_t i = 1; i < t.best_value_per_iteration.size(); ++i) {
    ASSERT_LE(t.best_value_per_iteration[i], t.best_value_per_iteration[i - 1]) << i;
  }
}

}  // namespace

TEST(Cobyla, QuadraticReachesOptimum) {
  const std::vector<double> x0{0.0, 0.0};
  const auto t = minimize(quadratic, x0, {});
  EXPECT_NEAR(t.final_params[0], 1.0, 1e-2);
  EXPECT_NEAR(t.final_params[1], 2.0, 1e-2);
  EXPECT_LE(t.evaluations_used, 300u);
  EXPECT_EQ(t.termination, Termination::RhoConverged);
  expect_monotone(t);
}

TEST(Cobyla, QuadraticMatchesReferenceImplementation) {
  // Reference: Powell's Fortran COBYLA, rhobeg 1, rhoend 1e-4. It evaluates
  // 44 points and hands back the last one (f = 1.588e-8); the best of its
  // sequence is evaluation 43, which is what minimize() returns.
  const std::vector<double> x0{0.0, 0.0};
  const auto t = minimize(quadratic, x0, {});
  EXPECT_EQ(t.evaluations_used, 44u);
  EXPECT_DOUBLE_EQ(t.final_value, 8.3124184081212235e-10);
  EXPECT_DOUBLE_EQ(t.best_value_per_iteration[42], 8.3124184081212235e-10);
  EXPECT_DOUBLE_EQ(t.best_value_per_iteration[41], 8.7660362404312918e-09);
}

TEST(Cobyla, OneDimensionalSquare) {
  const std::vector<double> x0{5.0};
  const auto t = minimize([](std::span<const double> x) { return x[0] * x[0]; }, x0, {});
  EXPECT_LT(std::abs(t.final_params[0]), 1e-2);
  EXPECT_EQ(t.termination, Termination::RhoConverged);
  EXPECT_EQ(t.evaluations_used, 22u);
}

TEST(Cobyla, RosenbrockMatchesReferenceImplementation) {
  const std::vector<double> x0{-1.2, 1.0};
  OptimizerConfig cfg;
  cfg.max_iterations = 5000;
  const auto t = minimize(rosenbrock, x0, cfg);
  EXPECT_LT(t.final_value, 1e-2);
  EXPECT_EQ(t.evaluations_used, 3735u);
  EXPECT_DOUBLE_EQ(t.final_value, 0.0077797900415147352);
  expect_monotone(t);
}

TEST(Cobyla, ConstrainedProblemMatchesReferenceImplementation) {
  // min x0^2 + x1^2  s.t.  x0 + x1 >= 1,  x0 <= 0.8,  x1 >= 0.7
  const std::vector<double> x0{0.0, 0.0};
  OptimizerConfig cfg;
  cfg.max_iterations = 500;
  const auto t = minimize_constrained(
      [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; },
      [](std::span<const double> x, std::span<double> c) {
        c[0] = x[0] + x[1] - 1.0;
        c[1] = 0.8 - x[0];
        c[2] = x[1] - 0.7;
      },
      3, x0, cfg);
  EXPECT_EQ(t.evaluations_used, 16u);
  EXPECT_NEAR(t.final_value, 0.58, 1e-12);
  EXPECT_NEAR(t.final_params[0], 0.3, 1e-12);
  EXPECT_NEAR(t.final_params[1], 0.7, 1e-12);
  EXPECT_LE(t.final_max_violation, 1e-12);
}

TEST(Cobyla, ConvexQuadraticsInFiveDimensions) {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<double> x0(n, 0.5);
    auto f = [n](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (i + 1.0) * (x[i] - 0.1 * i) * (x[i] - 0.1 * i);
      return s;
    };
    OptimizerConfig cfg;
    cfg.max_iterations = 100 * n + 10;
    const auto t = minimize(f, x0, cfg);
    EXPECT_LT(t.final_value, 1e-4) << n;
  }
}

TEST(Cobyla, DeterministicTraces) {
  const std::vector<double> x0{-1.2, 1.0};
  OptimizerConfig cfg;
  cfg.max_iterations = 400;
  const auto a = minimize(rosenbrock, x0, cfg);
  const auto b = minimize(rosenbrock, x0, cfg);
  EXPECT_EQ(a.best_value_per_iteration, b.best_value_per_iteration);
  EXPECT_EQ(a.final_params, b.final_params);
}

TEST(Cobyla, BudgetRespectedAndReported) {
  const std::vector<double> x0{-1.2, 1.0};
  OptimizerConfig cfg;
  cfg.max_iterations = 50;
  std::size_t calls = 0, callbacks = 0;
  const auto t = minimize(
      [&](std::span<const double> x) {
        ++calls;
        return rosenbrock(x);
      },
      x0, cfg, [&](std::size_t, double) { ++callbacks; });
  EXPECT_EQ(t.termination, Termination::MaxIterations);
  EXPECT_EQ(calls, 50u);
  EXPECT_EQ(t.evaluations_used, 50u);
  EXPECT_EQ(t.best_value_per_iteration.size(), 50u);
  EXPECT_EQ(callbacks, 50u);
}

TEST(Cobyla, ConfigValidation) {
  const std::vector<double> x0{0.0, 0.0, 0.0};
  auto f = [](std::span<const double>) { return 0.0; };
  OptimizerConfig cfg;
  cfg.max_iterations = 4;  // below n + 2
  EXPECT_THROW(minimize(f, x0, cfg), InvalidConfig);
  cfg.max_iterations = 0;
  EXPECT_THROW(minimize(f, x0, cfg), InvalidConfig);
  cfg = {};
  cfg.rho_end = 2.0;
  EXPECT_THROW(minimize(f, x0, cfg), InvalidConfig);
  EXPECT_THROW(minimize(f, std::vector<double>{}, OptimizerConfig{}), InvalidInput);
}

TEST(Cobyla, NonFiniteObjectiveCarriesParameters) {
  const std::vector<double> x0{0.0, 0.0};
  try {
    minimize(
        [](std::span<const double> x) {
          return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0] * x[0];
        },
        x0, {});
    FAIL() << "expected OptimizationError";
  } catch (const OptimizationError& e) {
    ASSERT_EQ(e.params().size(), 2u);
    EXPECT_GT(e.params()[0], 0.5);
  }
}
