#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kaplan/error.hpp"
#include "kaplan/theta.hpp"

using namespace kaplan;

TEST(Theta, KnownValues) {
  EXPECT_NEAR(theta(1.0 / std::numbers::pi), 1.7726372, 1e-7);
  EXPECT_NEAR(theta(1.0), 1.0864348, 1e-7);
  EXPECT_NEAR(theta(100.0), 1.0, 1e-100);
}

TEST(Theta, JacobiIdentity) {
  for (double s : {0.01, 0.1, 0.3, 1.0, 2.0, 7.5}) {
    EXPECT_NEAR(theta(1.0 / s), std::sqrt(s) * theta(s), 1e-12 * theta(1.0 / s)) << s;
  }
}

TEST(Theta, RejectsNonpositive) {
  EXPECT_THROW((void)theta(0.0), Error);
  EXPECT_THROW((void)theta(-1.0), Error);
}

TEST(Theta, OneDimensionalSumConverges) {
  const double k = 1.0;
  EXPECT_NEAR(gaussian_sum_1d(k, 40), theta(k / std::numbers::pi), 1e-15);
  EXPECT_DOUBLE_EQ(gaussian_sum_1d(k, 0), 1.0);
}

TEST(Theta, OneDimensionalTailBoundsTheTail) {
  for (double k : {0.05, 0.5, 1.0, 3.0}) {
    for (int m1 : {1, 2, 5, 10}) {
      double tail = 0.0;
      for (int m = m1; m < 2000; ++m) tail += 2.0 * std::exp(-k * m * m);
      EXPECT_GE(gaussian_tail_1d(k, m1), tail * (1 - 1e-14)) << k << " " << m1;
    }
  }
}

TEST(Theta, BoxSumFactorizes) {
  for (int N = 1; N <= 3; ++N) {
    for (double k : {0.3, 1.0, 2.0}) {
      const int M = 6;
      EXPECT_NEAR(lattice_gaussian_box_sum(N, k, M), std::pow(gaussian_sum_1d(k, M), N),
                  1e-14 * std::pow(gaussian_sum_1d(k, M), N));
    }
  }
}

TEST(Theta, BallSumApproachesProduct) {
  for (int N = 1; N <= 3; ++N) {
    for (double k : {0.5, 1.0}) {
      const auto s = lattice_gaussian_sum(N, k, 12);
      EXPECT_NEAR(s.exact, std::pow(theta(k / std::numbers::pi), N), 1e-14);
      EXPECT_LE(s.truncated, s.exact * (1 + 1e-13));
      EXPECT_NEAR(s.truncated, s.exact, 1e-8 * s.exact);
      EXPECT_GE(s.tail_bound, s.exact - s.truncated - 1e-13 * s.exact);
    }
  }
}

TEST(Theta, TailBoundIsValid) {
  for (int N = 1; N <= 3; ++N) {
    for (int radius : {2, 4, 6}) {
      for (double k : {0.3, 0.4, 1.5}) {
        const auto s = lattice_gaussian_sum(N, k, radius);
        EXPECT_GE(lattice_gaussian_tail_bound(N, k, radius), s.exact - s.truncated - 1e-13 * s.exact);
      }
    }
  }
}

TEST(Theta, StrictlyDecreasingAndAboveOne) {
  double prev = theta(0.01);
  for (double s = 0.02; s < 8.0; s *= 1.3) {
    const double v = theta(s);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 1.0);
    prev = v;
  }
}
