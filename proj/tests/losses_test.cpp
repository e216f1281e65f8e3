#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgst/losses.hpp"

using namespace dgst;

TEST(L2Term, Examples) {
  const std::vector<float> a{0.1f, 0.7f, 0.3f};
  EXPECT_EQ(l2_term(a, a), 0.0);
  for (std::size_t n : {1u, 7u, 1000u}) {
    EXPECT_DOUBLE_EQ(l2_term(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)), 1.0);
    EXPECT_DOUBLE_EQ(l2_term(std::vector<double>(n, 0.5), std::vector<double>(n, 0.0)), 0.5);
  }
  EXPECT_DOUBLE_EQ(l2_term(std::vector<double>(4, 0.0), std::vector<double>(4, 1.0), L2Mode::raw), 2.0);
  EXPECT_THROW(l2_term(std::vector<double>(3), std::vector<double>(4)), DimensionMismatch);
}

TEST(L2Term, SymmetricAndTriangle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0, 1);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> a(64), b(64), c(64);
    for (int i = 0; i < 64; ++i) a[i] = U(rng), b[i] = U(rng), c[i] = U(rng);
    EXPECT_DOUBLE_EQ(l2_term(a, b), l2_term(b, a));
    EXPECT_LE(l2_term(a, c), l2_term(a, b) + l2_term(b, c) + 1e-12);
    EXPECT_GE(l2_term(a, b), 0.0);
  }
}

TEST(CganDLoss, Examples) {
  EXPECT_NEAR(cgan_d_loss({{1 - 1e-7}, {1e-7}}), 0.0, 1e-6);
  EXPECT_NEAR(cgan_d_loss({{0.5}, {0.5}}), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(cgan_d_loss({{0.9}, {0.1}}), -(std::log(0.9) + std::log(0.9)), 1e-12);
  EXPECT_NEAR(cgan_d_loss({{0.9}, {0.1}}), 0.2107, 1e-4);
  // Clamped at epsilon instead of producing infinities.
  EXPECT_TRUE(std::isfinite(cgan_d_loss({{0.0}, {1.0}})));
  EXPECT_THROW(cgan_d_loss({{}, {0.5}}), std::invalid_argument);
}

TEST(CganGLoss, Examples) {
  const std::vector<double> fooled{1 - 1e-7};
  EXPECT_NEAR(cgan_g_loss(fooled), 0.0, 1e-6);
  const std::vector<double> half{0.5};
  EXPECT_NEAR(cgan_g_loss(half), std::log(2.0), 1e-12);
  const std::vector<double> mixed{0.25, 0.75};
  EXPECT_NEAR(cgan_g_loss(mixed), -(std::log(0.25) + std::log(0.75)) / 2, 1e-12);
  EXPECT_NEAR(cgan_g_loss(mixed), 0.8370, 1e-4);
  EXPECT_NEAR(cgan_g_loss(half, GeneratorLossForm::literal), std::log(0.5), 1e-12);
}

TEST(CganLosses, Monotone) {
  double prev = INFINITY;
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const std::vector<double> f{p, 0.5};
    const double g = cgan_g_loss(f);
    EXPECT_LT(g, prev);
    EXPECT_GE(g, 0.0);
    prev = g;
  }
  EXPECT_LT(cgan_d_loss({{0.99}, {0.01}}), cgan_d_loss({{0.9}, {0.1}}));
  EXPECT_LT(cgan_d_loss({{0.9}, {0.1}}), cgan_d_loss({{0.6}, {0.4}}));
}

TEST(CombinedObjective, Examples) {
  EXPECT_DOUBLE_EQ(combined_objective(0.5, 0.1, {100}), 10.5);
  EXPECT_DOUBLE_EQ(combined_objective(0.7, 0.3, {0}), 0.7);
  EXPECT_NEAR(combined_objective(0.6931, 0.5, {}), 50.6931, 1e-12);
  EXPECT_THROW(combined_objective(NAN, 0.5, {}), std::invalid_argument);
}
