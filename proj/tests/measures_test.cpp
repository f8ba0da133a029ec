#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mvsim/error.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/oracles.hpp"

using namespace mvsim;

namespace {

std::vector<double> normals(std::size_t count, std::uint64_t seed, double mean = 0.0,
                            double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> v(count);
  for (auto& x : v) x = normal(rng);
  return v;
}

DiscreteMeasure u1(std::vector<double> x) { return DiscreteMeasure::uniform(std::move(x), 1); }

}  // namespace

TEST(DiscreteMeasure, Validation) {
  EXPECT_THROW(DiscreteMeasure({0.0, 1.0}, {0.5, 0.6}, 1), DomainError);
  EXPECT_THROW(DiscreteMeasure({0.0, 1.0}, {1.5, -0.5}, 1), DomainError);
  EXPECT_THROW(DiscreteMeasure({0.0, 1.0, 2.0}, {1.0}, 2), DomainError);
  EXPECT_TRUE(u1({1.0, 2.0, 3.0}).is_uniform());
  EXPECT_FALSE(DiscreteMeasure({0.0, 1.0}, {0.25, 0.75}, 1).is_uniform());
}

TEST(Moment, Examples) {
  for (double p : {1.0, 2.0, 3.5}) EXPECT_EQ(moment(u1({0.0}), p), 0.0);
  EXPECT_DOUBLE_EQ(moment(u1({-1.0, 1.0}), 2.0), 1.0);
  EXPECT_DOUBLE_EQ(moment(u1({0.0, 1.0, 2.0}), 2.0), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(moment(DiscreteMeasure::uniform({3.0, 4.0}, 2), 2.0), 25.0);
}

TEST(Wasserstein1d, Examples) {
  const auto mu = u1({0.3, -1.2, 4.0});
  EXPECT_EQ(wasserstein_1d(mu, mu, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein_1d(u1({0.0}), u1({2.0}), 2.0), 2.0);
  EXPECT_DOUBLE_EQ(wasserstein_1d(u1({0.0, 2.0}), u1({1.0, 3.0}), 2.0), 1.0);
  EXPECT_THROW(wasserstein_1d(DiscreteMeasure::uniform({0.0, 1.0}, 2), u1({0.0}), 2.0),
               DomainError);
}

TEST(Wasserstein1d, UnequalWeightsSplitMass) {
  // delta_0 against uniform{1, 3}: W1 = (1 + 3) / 2, W2^2 = (1 + 9) / 2.
  EXPECT_DOUBLE_EQ(wasserstein_1d(u1({0.0}), u1({1.0, 3.0}), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(wasserstein_1d(u1({0.0}), u1({1.0, 3.0}), 2.0), std::sqrt(5.0));
  const DiscreteMeasure skew({0.0, 1.0}, {0.25, 0.75}, 1);
  EXPECT_NEAR(wasserstein_1d(skew, u1({0.0, 1.0}), 1.0), 0.25, 1e-15);
}

TEST(WassersteinExact, Examples) {
  EXPECT_EQ(wasserstein_exact(u1({3.0, 1.0, 2.0}), u1({1.0, 2.0, 3.0}), 2.0), 0.0);
  const auto mu = DiscreteMeasure::uniform({0.0, 0.0, 1.0, 0.0}, 2);
  const auto nu = DiscreteMeasure::uniform({0.0, 1.0, 1.0, 1.0}, 2);
  EXPECT_DOUBLE_EQ(wasserstein_exact(mu, nu, 2.0), 1.0);
  EXPECT_THROW(wasserstein_exact(u1({0.0}), u1({0.0, 1.0}), 2.0), DomainError);
  EXPECT_THROW(wasserstein_exact(DiscreteMeasure({0.0, 1.0}, {0.25, 0.75}, 1),
                                 u1({0.0, 1.0}), 2.0),
               DomainError);
}

TEST(WassersteinExact, CapacityLimit) {
  std::vector<double> big(kExactTransportCap + 1, 0.0);
  EXPECT_THROW(wasserstein_exact(u1(big), u1(big), 2.0), CapacityError);
}

TEST(WassersteinExact, MatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> size(1, 7), dim(1, 3);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = size(rng), d = dim(rng);
    const auto x = normals(m * d, 100 + trial);
    const auto y = normals(m * d, 500 + trial, 0.5, 2.0);
    for (double p : {1.0, 2.0}) {
      EXPECT_NEAR(wasserstein_exact(DiscreteMeasure::uniform(x, d), DiscreteMeasure::uniform(y, d), p),
                  oracles::brute_force_wasserstein(x, y, d, p), 1e-12)
          << "trial " << trial << " p " << p;
    }
  }
}

TEST(WassersteinExact, AgreesWithOneDimensional) {
  const auto x = normals(300, 1), y = normals(300, 2, 1.0, 0.5);
  for (double p : {1.0, 2.0}) {
    EXPECT_NEAR(wasserstein_exact(u1(x), u1(y), p), wasserstein_1d(u1(x), u1(y), p), 1e-12);
  }
}

TEST(WassersteinExact, MetricAxioms) {
  const std::size_t d = 2;
  const auto x = normals(40, 7), y = normals(40, 8, 1.0), z = normals(40, 9, -1.0, 2.0);
  const auto mx = DiscreteMeasure::uniform(x, d), my = DiscreteMeasure::uniform(y, d),
             mz = DiscreteMeasure::uniform(z, d);
  for (double p : {1.0, 2.0}) {
    const double xy = wasserstein_exact(mx, my, p);
    EXPECT_GT(xy, 0.0);
    EXPECT_NEAR(xy, wasserstein_exact(my, mx, p), 1e-13);
    EXPECT_LE(xy, wasserstein_exact(mx, mz, p) + wasserstein_exact(mz, my, p) + 1e-13);
  }
  EXPECT_LE(wasserstein_exact(mx, my, 1.0), wasserstein_exact(mx, my, 2.0) + 1e-13);
}

TEST(WassersteinExact, TranslationShiftsW2ByMeanDifference) {
  // For a common translation c, W2(mu, mu + c) = |c|.
  const auto x = normals(50, 11);
  auto shifted = x;
  for (auto& v : shifted) v += 0.75;
  EXPECT_NEAR(wasserstein_exact(u1(x), u1(shifted), 2.0), 0.75, 1e-12);
  auto y = normals(50, 12);
  auto ys = y;
  for (auto& v : ys) v += 0.75;
  EXPECT_NEAR(wasserstein_exact(u1(shifted), u1(ys), 2.0), wasserstein_exact(u1(x), u1(y), 2.0),
              1e-12);
}

TEST(WassersteinSliced, Examples) {
  const auto x = normals(60, 3);
  const auto mu = DiscreteMeasure::uniform(x, 3);
  EXPECT_EQ(wasserstein_sliced(mu, mu, 2.0, 64, 1), 0.0);
  const auto a = u1(normals(100, 4)), b = u1(normals(80, 5, 0.3));
  EXPECT_NEAR(wasserstein_sliced(a, b, 2.0, 16, 9), wasserstein_1d(a, b, 2.0), 1e-12);
  EXPECT_EQ(wasserstein_sliced(a, b, 2.0, 16, 9), wasserstein_sliced(a, b, 2.0, 16, 9));
}

TEST(WassersteinSliced, BoundedByExact) {
  const auto x = normals(60, 13), y = normals(60, 14, 0.5);
  const auto mx = DiscreteMeasure::uniform(x, 2), my = DiscreteMeasure::uniform(y, 2);
  EXPECT_LE(wasserstein_sliced(mx, my, 2.0, 256, 3), wasserstein_exact(mx, my, 2.0) + 1e-12);
}

TEST(W2ToGaussian, Examples) {
  EXPECT_EQ(w2_to_gaussian(u1({1.5}), 1.5, 0.0), 0.0);
  EXPECT_NEAR(w2_to_gaussian(u1({0.0}), 0.0, 1.0), 1.0, 1e-14);
  EXPECT_NEAR(w2_to_gaussian(u1({0.0}), 2.0, 0.0), 2.0, 1e-15);
  EXPECT_THROW(w2_to_gaussian(u1({0.0}), 0.0, -1.0), DomainError);
}

TEST(W2ToGaussian, MatchesQuadratureOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 25; ++trial) {
    const auto x = normals(size(rng), 900 + trial, 0.3, 1.4);
    std::vector<double> w(x.size(), 1.0 / double(x.size()));
    const double mean = 0.1 * trial - 1.0, var = 0.2 + 0.1 * trial;
    EXPECT_NEAR(w2_to_gaussian(u1(x), mean, var),
                oracles::quadrature_w2_to_gaussian(x, w, mean, var), 1e-10);
  }
}

TEST(W2ToGaussian, LargeSampleConverges) {
  const auto x = normals(1000000, 21, 0.5, std::sqrt(2.0));
  const double w2sq = w2_squared_to_gaussian_samples(x, 0.5, 2.0);
  EXPECT_LT(w2sq, 3e-5);
  EXPECT_NEAR(w2sq, std::pow(w2_to_gaussian(u1(x), 0.5, 2.0), 2.0), 1e-10);
}

TEST(W1ToGaussian, ConsistentWithW2) {
  const auto x = normals(2000, 22, 0.2, 0.8);
  const auto mu = u1(x);
  const double w1 = w1_to_gaussian(mu, 0.0, 1.0);
  EXPECT_LE(w1, w2_to_gaussian(mu, 0.0, 1.0) + 1e-12);
  EXPECT_NEAR(w1_to_gaussian_samples(x, 0.0, 1.0), w1, 1e-10);
  EXPECT_NEAR(w1_to_gaussian(u1({0.0}), 0.0, 1.0), std::sqrt(2.0 / M_PI), 1e-14);
  EXPECT_NEAR(w1_to_gaussian(u1({3.0}), 1.0, 0.0), 2.0, 1e-15);
}
