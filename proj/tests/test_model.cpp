#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "goodwin/dynamics.hpp"
#include "goodwin/model.hpp"
#include "goodwin/reproduce.hpp"
#include "support.hpp"

using namespace goodwin;
using goodwin::testing::LogUniform;
using goodwin::testing::rel_err;

TEST(Hill, KnownValues) {
  EXPECT_DOUBLE_EQ(eval_hill(1.0, 1.0, 1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(eval_hill(20.0, 20.0, 20.0, 1.0), 20.0 / 21.0);
  EXPECT_DOUBLE_EQ(eval_hill(3.0, 2.0, 2.0, 0.0), 3.0);
  EXPECT_NEAR(eval_hill(20.0, 20.0, 20.0, 1.5), 20.0 / (1.0 + 20.0 * std::pow(1.5, 20.0)), 1e-15);
}

TEST(Hill, RejectsBadInputs) {
  EXPECT_THROW(eval_hill(0.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(eval_hill(1.0, -1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(eval_hill(1.0, 1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(eval_hill(1.0, 1.0, std::nan(""), 1.0), DomainError);
  EXPECT_THROW(eval_hill(1.0, 1.0, 1.0, -1e-300), DomainError);
  EXPECT_THROW(FeedbackSpec::hill(1.0, 1.0, 2.0)(-1.0), DomainError);
}

TEST(Hill, HugeExponentUnderflowsCleanly) {
  const auto f = FeedbackSpec::hill(5.0, 3.0, 500.0);
  for (double T : {1.1, 10.0, 1e3, 1e100}) {
    const double v = f(T);
    const double d = f.derivative(T);
    EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
    EXPECT_TRUE(std::isfinite(d) && d <= 0.0);
  }
  EXPECT_EQ(f(1e100), 0.0);
  EXPECT_NEAR(f(0.5), 5.0, 1e-12);
}

TEST(Hill, DerivativeMatchesFiniteDifference) {
  LogUniform rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto f = FeedbackSpec::hill(rng(0.1, 100.0), rng(0.1, 100.0), rng(0.5, 30.0));
    const double T = rng(0.05, 5.0);
    const double h = 1e-6 * T;
    const double fd = (f(T + h) - f(T - h)) / (2.0 * h);
    const double d = f.derivative(T);
    EXPECT_NEAR(d, fd, 1e-6 * std::max(1.0, std::abs(d))) << "T=" << T;
  }
}

TEST(Feedback, CustomAdmissibility) {
  EXPECT_NO_THROW(FeedbackSpec::custom([](double T) { return std::exp(-T); },
                                       [](double T) { return -std::exp(-T); }, Positivity::strictly_positive, {1000, 50.0}));
  // increasing
  EXPECT_THROW(FeedbackSpec::custom([](double T) { return 1.0 + T; }, [](double) { return 1.0; },
                                    Positivity::nonnegative),
               DomainError);
  // negative somewhere
  EXPECT_THROW(FeedbackSpec::custom([](double T) { return 1.0 - T; }, [](double) { return -1.0; },
                                    Positivity::nonnegative),
               DomainError);
  // nonnegative feedback cannot serve as f1
  const auto ramp = FeedbackSpec::custom([](double T) { return std::max(0.0, 1.0 - T); },
                                         [](double T) { return T < 1.0 ? -1.0 : 0.0; }, Positivity::nonnegative);
  const ModelParameters p{1, 1, 1, 1, 1};
  EXPECT_THROW(ModelInstance(p, ramp), DomainError);
  EXPECT_NO_THROW(ModelInstance(p, FeedbackSpec::hill(1, 1, 2), ramp));
  EXPECT_THROW(ModelInstance(p, FeedbackSpec::zero()), DomainError);
}

TEST(Model, ParameterValidation) {
  const auto f1 = FeedbackSpec::hill(1, 1, 2);
  EXPECT_THROW(ModelInstance({-1, 1, 1, 1, 1}, f1), DomainError);
  EXPECT_THROW(ModelInstance({1, 0, 1, 1, 1}, f1), DomainError);
  EXPECT_THROW(ModelInstance({1, 1, 1, std::numeric_limits<double>::infinity(), 1}, f1), DomainError);
  EXPECT_THROW(FeedbackSpec::constant(-1.0), DomainError);
}

TEST(Model, JacobianMatchesFiniteDifferences) {
  LogUniform rng(12);
  for (int i = 0; i < 300; ++i) {
    const ModelParameters p{rng(0.01, 2), rng(0.01, 2), rng(0.01, 2), rng(0.1, 10), rng(0.01, 1)};
    const auto f1 = FeedbackSpec::hill(rng(1, 50), rng(0.5, 50), rng(1.5, 20));
    const auto f2 = FeedbackSpec::hill(rng(1, 50), rng(0.5, 50), rng(1.5, 20));
    const ModelInstance m(p, f1, f2);
    const State x{rng(0.01, 5), rng(0.01, 5), rng(0.2, 2)};
    const Matrix3 J = jacobian(m, x);
    for (int col = 0; col < 3; ++col) {
      const double h = 1e-6 * (1.0 + std::abs(x.to_array()[col]));
      auto shifted = [&](double d) {
        auto y = x.to_array();
        y[col] += d;
        return vector_field(m, State::from_array(y)).to_array();
      };
      const auto p1 = shifted(h), m1 = shifted(-h);
      for (int row = 0; row < 3; ++row) {
        const double fd = (p1[row] - m1[row]) / (2.0 * h);
        // row-wise relative error: rounding in the larger terms of a row swamps its small entries
        const double scale = std::max({std::abs(J[row][0]), std::abs(J[row][1]), std::abs(J[row][2])});
        EXPECT_LE(std::abs(fd - J[row][col]) / scale, 1e-6) << "entry " << row << col;
      }
    }
  }
}

TEST(Model, ClassicalReductionIsBitIdentical) {
  const auto p = reference::parameters();
  const ModelInstance a(p, reference::f1());
  const ModelInstance b(p, reference::f1(), FeedbackSpec::constant(0.0));
  const ModelInstance c = reference::extended(0.0);
  EXPECT_TRUE(a.is_classical() && b.is_classical() && c.is_classical());
  LogUniform rng(13);
  for (int i = 0; i < 100; ++i) {
    const State x{rng(1e-3, 10), rng(1e-3, 10), rng(1e-3, 10)};
    EXPECT_EQ(vector_field(a, x), vector_field(b, x));
    EXPECT_EQ(vector_field(a, x), vector_field(c, x));
  }
  const auto ta = integrate(a, {1, 6, 2}, 600.0);
  const auto tc = integrate(c, {1, 6, 2}, 600.0);
  ASSERT_EQ(ta.size(), tc.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    ASSERT_EQ(ta.times[i], tc.times[i]);
    ASSERT_EQ(ta.states[i], tc.states[i]);
  }
}

TEST(Model, VectorFieldPointsInwardOnBoundary) {
  LogUniform rng(14);
  const ModelInstance m = reference::extended();
  for (int i = 0; i < 1000; ++i) {
    const State x{rng(1e-3, 10), rng(1e-3, 10), rng(1e-3, 10)};
    EXPECT_GT(vector_field(m, {0.0, x.L, x.T}).R, 0.0);
    EXPECT_GE(vector_field(m, {x.R, 0.0, x.T}).L, 0.0);
    EXPECT_GE(vector_field(m, {x.R, x.L, 0.0}).T, 0.0);
  }
}

TEST(Model, TrajectoriesStayInPositiveOctant) {
  LogUniform rng(15);
  const ModelInstance m = reference::extended();
  for (int i = 0; i < 20; ++i) {
    const State x0{rng.uniform(0, 2), rng.uniform(0, 10), rng.uniform(0, 3)};
    const auto tr = integrate(m, x0, 1440.0);
    for (const auto& s : tr.states) {
      ASSERT_GE(s.R, -tr.atol);
      ASSERT_GE(s.L, -tr.atol);
      ASSERT_GE(s.T, -tr.atol);
    }
  }
  const auto tr0 = integrate(m, {0, 0, 0}, 500.0);
  for (const auto& s : tr0.states) ASSERT_GE(std::min({s.R, s.L, s.T}), -tr0.atol);
}
