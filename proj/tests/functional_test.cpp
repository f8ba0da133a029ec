#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "mvsim/error.hpp"
#include "mvsim/functional.hpp"

using namespace mvsim;

namespace {

DiscreteMeasure u1(std::vector<double> x) { return DiscreteMeasure::uniform(std::move(x), 1); }

// Independent oracle: integrate f against N(m, v) by adaptive quadrature.
double gaussian_quadrature(const std::function<double(double)>& f, double m, double v) {
  const double s = std::sqrt(v);
  auto integrand = [&](double z) {
    return f(m + s * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
      15, 1e-14);
}

}  // namespace

TEST(Functional, DiscreteExamples) {
  EXPECT_DOUBLE_EQ(functional_eval(make_functional("mean"), u1({0.0, 1.0, 2.0})).value, 1.0);
  EXPECT_DOUBLE_EQ(functional_eval(make_functional("mean-squared"), u1({-1.0, 1.0})).value, 0.0);
  EXPECT_DOUBLE_EQ(functional_eval(make_functional("variance-kernel"), u1({0.0, 2.0})).value, 2.0);
  EXPECT_DOUBLE_EQ(functional_eval(make_functional("constant"), u1({5.0})).value, 1.0);
  EXPECT_DOUBLE_EQ(functional_eval(make_functional("second-moment"), u1({1.0, 3.0})).value, 5.0);
}

TEST(Functional, SamplesMatchMeasure) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::vector<double> x(500);
  for (auto& v : x) v = normal(rng);
  for (const auto& [id, description] : functional_catalog()) {
    const auto phi = make_functional(id);
    EXPECT_NEAR(functional_eval(phi, x).value, functional_eval(phi, u1(x)).value, 1e-12) << id;
  }
}

TEST(Functional, GaussianExamples) {
  EXPECT_NEAR(functional_on_gaussian(make_functional("second-moment"), {0.7, 1.3}),
              0.7 * 0.7 + 1.3, 1e-14);
  EXPECT_DOUBLE_EQ(functional_on_gaussian(make_functional("mean"), {0.5, 2.0}), 0.5);
  EXPECT_NEAR(functional_on_gaussian(make_functional("variance-kernel"), {3.0, 0.4}), 0.8, 1e-14);
  EXPECT_DOUBLE_EQ(functional_on_gaussian(make_functional("mean"), {0.5, 0.0}), 0.5);
}

TEST(Functional, GaussianClosedFormsAgainstQuadrature) {
  const double m = 0.4, v = 0.9;
  const std::vector<std::pair<ScalarFunction, std::function<double(double)>>> cases{
      {ScalarFunction::polynomial({1.0, -2.0, 0.5, 0.25}),
       [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x; }},
      {ScalarFunction::sine(1.7, 0.3), [](double x) { return std::sin(1.7 * x + 0.3); }},
      {ScalarFunction::abs(0.2), [](double x) { return std::fabs(x - 0.2); }},
      {ScalarFunction::tanh(0.8), [](double x) { return std::tanh(0.8 * x); }},
  };
  for (const auto& [f, oracle] : cases) {
    EXPECT_NEAR(f.gaussian_expectation(m, v), gaussian_quadrature(oracle, m, v), 1e-10) << f.name();
  }
  const auto gk = DifferenceKernel::gaussian(1.5);
  EXPECT_NEAR(gk.gaussian_expectation(v),
              gaussian_quadrature([](double z) { return std::exp(-z * z / (2 * 2.25)); }, 0.0,
                                  2.0 * v),
              1e-10);
}

TEST(Functional, QuadraticSampledEstimate) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::vector<double> x(3000);
  for (auto& v : x) v = normal(rng);
  const auto phi = make_functional("gauss-kernel");
  const auto exact = functional_eval(phi, x);
  EXPECT_TRUE(exact.exact);
  FunctionalOptions sampled;
  sampled.quadratic_exact_limit = 100;
  sampled.sampled_pairs = 1 << 18;
  const auto approx = functional_eval(phi, x, sampled);
  EXPECT_FALSE(approx.exact);
  EXPECT_GT(approx.std_error, 0.0);
  EXPECT_NEAR(approx.value, exact.value, 5.0 * approx.std_error);
}

TEST(Functional, UnknownIdRejected) { EXPECT_THROW(make_functional("nope"), DomainError); }

TEST(Functional, NonIntegrableRejected) {
  const Functional phi{"exp-square", LinearFunctional{ScalarFunction::custom(
                                         "exp-square", [](double x) { return std::exp(x * x); })}};
  EXPECT_THROW(functional_on_gaussian(phi, {0.0, 1.0}), DomainError);
}
