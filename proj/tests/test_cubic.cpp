#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "goodwin/cubic.hpp"
#include "goodwin/reproduce.hpp"
#include "support.hpp"

using namespace goodwin;
using goodwin::testing::LogUniform;

namespace {

double root_distance(const CubicRoots& a, const CubicRoots& b) {
  // both sorted by sort_roots; compare after matching by nearest root
  double worst = 0.0;
  for (const auto& z : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : b) best = std::min(best, std::abs(z - w));
    worst = std::max(worst, best);
  }
  return worst;
}

double scale_of(const CubicRoots& r) {
  double s = 0.0;
  for (const auto& z : r) s = std::max(s, std::abs(z));
  return std::max(s, 1e-300);
}

CubicRoots eigen_roots(const Matrix3& a) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i][j];
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
  CubicRoots r;
  for (int i = 0; i < 3; ++i) r[i] = es.eigenvalues()(i);
  return r;
}

}  // namespace

TEST(Cubic, KnownRoots) {
  // (x - 1)(x + 2)(x - 3) = x^3 - 2x^2 - 5x + 6
  const auto r = cubic_roots({-2.0, -5.0, 6.0});
  EXPECT_NEAR(r[0].real(), -2.0, 1e-14);
  EXPECT_NEAR(r[1].real(), 1.0, 1e-14);
  EXPECT_NEAR(r[2].real(), 3.0, 1e-14);
  for (const auto& z : r) EXPECT_EQ(z.imag(), 0.0);
  // (x + 1)(x^2 + 4) = x^3 + x^2 + 4x + 4
  const auto c = cubic_roots({1.0, 4.0, 4.0});
  EXPECT_NEAR(c[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(c[1].imag(), 2.0, 1e-14);
  EXPECT_NEAR(c[2].imag(), -2.0, 1e-14);
  EXPECT_NEAR(c[1].real(), 0.0, 1e-14);
  // triple root
  const auto t = cubic_roots({-3.0, 3.0, -1.0});
  for (const auto& z : t) EXPECT_NEAR(std::abs(z - 1.0), 0.0, 1e-5);
}

TEST(Cubic, CardanoAgreesWithCompanion) {
  LogUniform rng(31);
  for (int i = 0; i < 10000; ++i) {
    // random Goodwin-type Jacobians
    const double b1 = rng(1e-3, 10), b2 = rng(1e-3, 10), b3 = rng(1e-3, 10);
    const double g1 = rng(1e-2, 10), g2 = rng(1e-2, 10), d1 = -rng(1e-4, 10), d2 = i % 2 ? -rng(1e-4, 10) : 0.0;
    const Matrix3 J{{{-b1, 0.0, d1}, {g1, -b2, d2}, {0.0, g2, -b3}}};
    const auto p = characteristic_polynomial(J);
    const auto a = solve_cubic_cardano(p);
    const auto b = companion_roots(p);
    ASSERT_LE(root_distance(a, b) / scale_of(a), 1e-10) << "draw " << i;
  }
}

TEST(Cubic, EigenvaluesAgreeWithEigen) {
  LogUniform rng(32);
  for (int i = 0; i < 2000; ++i) {
    const Matrix3 J{{{-rng(1e-2, 5), 0.0, -rng(1e-3, 5)},
                     {rng(1e-2, 5), -rng(1e-2, 5), -rng(1e-3, 5)},
                     {0.0, rng(1e-2, 5), -rng(1e-2, 5)}}};
    const auto ours = eigenvalues(J);
    const auto ref = eigen_roots(J);
    ASSERT_LE(root_distance(ours, ref) / scale_of(ref), 1e-9);
  }
  const auto ext = reference::extended();
  const auto J = jacobian(ext, find_equilibrium(ext).state());
  EXPECT_LE(root_distance(eigenvalues(J), eigen_roots(J)) / scale_of(eigen_roots(J)), 1e-10);
}

TEST(Cubic, SortOrder) {
  const auto r = cubic_roots({1.0, 4.0, 4.0});
  EXPECT_EQ(r[0].imag(), 0.0);
  EXPECT_GT(r[1].imag(), 0.0);
  EXPECT_EQ(r[2], std::conj(r[1]));
}

TEST(Cubic, NonFiniteCoefficientsThrow) {
  EXPECT_THROW(cubic_roots({std::nan(""), 1.0, 1.0}), EigenSolverError);
}
