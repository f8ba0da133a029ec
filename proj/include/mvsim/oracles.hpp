#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvsim::oracles {

/// W_p between two uniform M-point clouds in R^d by exhaustive search over
/// all M! permutations (M <= 9).
double brute_force_wasserstein(std::span<const double> x, std::span<const double> y,
                               std::size_t dimension, double p);

/// Mean and variance of the linear model's law at t by classical RK4 on
/// m' = (a + bbar) m, v' = 2 a v + sigma0^2.
std::array<double, 2> rk4_moments(double a, double bbar, double sigma0, double m0, double v0,
                                  double t, std::size_t steps);

/// Exact expectations for the Euler-Maruyama particle system of the
/// linear model (N particles, n steps, initial N(m0, v0) i.i.d.), from the
/// closed moment recursion.
struct EmMoments {
  double mean;          // E[mean of X_T]
  double second_moment; // E[(1/N) sum_i (X^i_T)^2]
  double mean_squared;  // E[(mean of X_T)^2]
};
EmMoments em_moments(double a, double bbar, double sigma0, double m0, double v0, double horizon,
                     std::size_t particles, std::size_t steps);

/// |E[int x^2 dmu^{N,n}_T] - (m(T)^2 + v(T))|: the exact weak error of the
/// second-moment functional.
double exact_weak_error_second_moment(double a, double bbar, double sigma0, double m0, double v0,
                                      double horizon, std::size_t particles, std::size_t steps);

/// Deterministic Euler recursion x_{j+1} = x_j + h (a + bbar) x_j.
double euler_mean_field_ode(double a, double bbar, double m0, double horizon, std::size_t steps);

/// W_2 between a 1-D discrete measure and N(mean, variance) by adaptive
/// quadrature of the squared quantile gap on each atom's interval.
double quadrature_w2_to_gaussian(std::span<const double> points, std::span<const double> weights,
                                 double mean, double variance);

struct PhiloxVector {
  std::array<std::uint32_t, 4> counter;
  std::array<std::uint32_t, 2> key;
  std::array<std::uint32_t, 4> expected;
};

/// Published Philox4x32-10 known-answer vectors (Random123).
std::vector<PhiloxVector> philox_known_answers();

struct SelftestResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Runs every oracle suite; quick (a few seconds).
std::vector<SelftestResult> run_selftest();

}  // namespace mvsim::oracles
