#include "mvsim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "mvsim/error.hpp"
#include "mvsim/format.hpp"
#include "mvsim/measures.hpp"
#include "mvsim/philox.hpp"
#include "mvsim/reference_models.hpp"

namespace mvsim::oracles {

double brute_force_wasserstein(std::span<const double> x, std::span<const double> y,
                               std::size_t dimension, double p) {
  const std::size_t m = x.size() / dimension;
  if (m == 0 || y.size() != x.size() || m > 9) {
    throw DomainError("brute force: need equal sizes and M <= 9");
  }
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dimension; ++k) {
        const double diff = x[i * dimension + k] - y[perm[i] * dimension + k];
        sq += diff * diff;
      }
      total += std::pow(std::sqrt(sq), p);
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(m), 1.0 / p);
}

std::array<double, 2> rk4_moments(double a, double bbar, double sigma0, double m0, double v0,
                                  double t, std::size_t steps) {
  const double h = t / static_cast<double>(steps);
  const auto f = [&](const std::array<double, 2>& y) {
    return std::array<double, 2>{(a + bbar) * y[0], 2.0 * a * y[1] + sigma0 * sigma0};
  };
  std::array<double, 2> y{m0, v0};
  for (std::size_t j = 0; j < steps; ++j) {
    const auto k1 = f(y);
    const auto k2 = f({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const auto k3 = f({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const auto k4 = f({y[0] + h * k3[0], y[1] + h * k3[1]});
    for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return y;
}

EmMoments em_moments(double a, double bbar, double sigma0, double m0, double v0, double horizon,
                     std::size_t particles, std::size_t steps) {
  const double h = horizon / static_cast<double>(steps);
  const double n = static_cast<double>(particles);
  const double s2 = sigma0 * sigma0;
  // X^i' = (1 + h a) X^i + h bbar Xbar + sigma dW^i;  Xbar' = (1 + h(a + bbar)) Xbar + sigma dWbar.
  double mean = m0;
  double second = m0 * m0 + v0;      // E[(1/N) sum (X^i)^2]
  double mean_sq = m0 * m0 + v0 / n;  // E[Xbar^2]
  const double p = 1.0 + h * a;
  const double q = 1.0 + h * (a + bbar);
  for (std::size_t j = 0; j < steps; ++j) {
    second = p * p * second + (2.0 * p * h * bbar + h * h * bbar * bbar) * mean_sq + s2 * h;
    mean_sq = q * q * mean_sq + s2 * h / n;
    mean = q * mean;
  }
  return {mean, second, mean_sq};
}

double exact_weak_error_second_moment(double a, double bbar, double sigma0, double m0, double v0,
                                      double horizon, std::size_t particles, std::size_t steps) {
  const auto em = em_moments(a, bbar, sigma0, m0, v0, horizon, particles, steps);
  const auto law = ou_flow(a, bbar, sigma0, m0, v0, horizon);
  return std::abs(em.second_moment - (law.mean * law.mean + law.variance));
}

double euler_mean_field_ode(double a, double bbar, double m0, double horizon, std::size_t steps) {
  const double h = horizon / static_cast<double>(steps);
  double x = m0;
  for (std::size_t j = 0; j < steps; ++j) x += h * (a + bbar) * x;
  return x;
}

double quadrature_w2_to_gaussian(std::span<const double> points, std::span<const double> weights,
                                 double mean, double variance) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return points[i] < points[j]; });
  const double s = std::sqrt(variance);
  // In the normal variable z the integrand is (x - m - s z)^2 phi(z) on
  // [q(a), q(b)], which keeps the tails finite for the quadrature.
  const auto pdf = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
  const auto quantile = [](double u) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
  };
  double total = 0.0;
  double lo = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double hi = k + 1 == order.size() ? 1.0 : lo + weights[order[k]];
    const double x = points[order[k]];
    const auto f = [&](double z) {
      const double g = x - mean - s * z;
      return g * g * pdf(z);
    };
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, quantile(lo), quantile(hi), 20, 1e-14);
    lo = hi;
  }
  return std::sqrt(std::max(0.0, total));
}

std::vector<PhiloxVector> philox_known_answers() {
  return {
      {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
      {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
       {0xffffffffu, 0xffffffffu},
       {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
      {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
       {0xa4093822u, 0x299f31d0u},
       {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
  };
}

namespace {

SelftestResult check_philox() {
  for (const auto& v : philox_known_answers()) {
    if (Philox4x32::apply(v.counter, v.key) != v.expected) {
      return {"philox known answers", false, "mismatch against the Random123 vectors"};
    }
  }
  return {"philox known answers", true, "3 vectors"};
}

SelftestResult check_transport() {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> msize(1, 7), dsize(1, 3);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = msize(rng);
    const std::size_t d = dsize(rng);
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    std::vector<double> x(m * d), y(m * d);
    for (auto& v : x) v = normal(rng);
    for (auto& v : y) v = normal(rng);
    const double exact = wasserstein_exact(DiscreteMeasure::uniform(x, d),
                                           DiscreteMeasure::uniform(y, d), p);
    worst = std::max(worst, std::abs(exact - brute_force_wasserstein(x, y, d, p)));
  }
  return {"exact transport vs permutation search", worst <= 1e-10,
          "200 instances, max diff " + format_double(worst)};
}

SelftestResult check_flow() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 1.0), pos(0.0, 2.0), time(0.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = coef(rng), b = coef(rng), s = pos(rng), m0 = coef(rng), v0 = pos(rng);
    const double t = time(rng);
    const auto law = ou_flow(a, b, s, m0, v0, t);
    const auto rk = rk4_moments(a, b, s, m0, v0, t, 4000);
    worst = std::max({worst, std::abs(law.mean - rk[0]), std::abs(law.variance - rk[1])});
  }
  return {"gaussian flow vs RK4", worst <= 1e-8, "50 parameter sets, max diff " + format_double(worst)};
}

SelftestResult check_gaussian_w2() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + trial;
    std::vector<double> x(m);
    for (auto& v : x) v = 1.5 * normal(rng);
    const std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const double closed = w2_to_gaussian(DiscreteMeasure::uniform(x, 1), 0.3, 0.7);
    worst = std::max(worst, std::abs(closed - quadrature_w2_to_gaussian(x, w, 0.3, 0.7)));
  }
  return {"W2 to gaussian vs quadrature", worst <= 1e-8, "20 measures, max diff " + format_double(worst)};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  return {check_philox(), check_transport(), check_flow(), check_gaussian_w2()};
}

}  // namespace mvsim::oracles
