#include "mvsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

#include "mvsim/assignment.hpp"
#include "mvsim/error.hpp"
#include "mvsim/normal.hpp"
#include "mvsim/philox.hpp"
#include "mvsim/summation.hpp"

namespace mvsim {

DiscreteMeasure::DiscreteMeasure(std::vector<double> points, std::vector<double> weights,
                                 std::size_t dimension)
    : points_(std::move(points)), weights_(std::move(weights)), dimension_(dimension) {
  if (dimension == 0) throw DomainError("measure: dimension must be positive");
  if (weights_.empty()) throw DomainError("measure: at least one atom required");
  if (points_.size() != weights_.size() * dimension) {
    throw DomainError("measure: points and weights disagree in count");
  }
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("measure: weights must be nonnegative");
  }
  if (std::abs(pairwise_sum(weights_) - 1.0) > 1e-12) {
    throw DomainError("measure: weights must sum to 1");
  }
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> points, std::size_t dimension) {
  if (dimension == 0 || points.empty() || points.size() % dimension != 0) {
    throw DomainError("measure: need a nonempty whole number of points");
  }
  const std::size_t m = points.size() / dimension;
  return DiscreteMeasure(std::move(points),
                         std::vector<double>(m, 1.0 / static_cast<double>(m)), dimension);
}

bool DiscreteMeasure::is_uniform() const noexcept {
  const double w = 1.0 / static_cast<double>(weights_.size());
  return std::all_of(weights_.begin(), weights_.end(),
                     [w](double x) { return std::abs(x - w) <= 1e-12; });
}

namespace {

double distance_power(std::span<const double> x, std::span<const double> y, double p) {
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    sq += diff * diff;
  }
  if (p == 2.0) return sq;
  if (p == 1.0) return std::sqrt(sq);
  return std::pow(std::sqrt(sq), p);
}

double abs_power(double z, double p) {
  const double a = std::abs(z);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("wasserstein: order p must be >= 1");
}

std::vector<std::size_t> sorted_order(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return order;
}

// sum over the monotone coupling of two sorted weighted samples of
// mass * |x - y|^p.
double monotone_cost(std::span<const double> x, std::span<const double> wx,
                     std::span<const double> y, std::span<const double> wy, double p) {
  const auto ox = sorted_order(x);
  const auto oy = sorted_order(y);
  std::size_t i = 0;
  std::size_t j = 0;
  double rx = wx[ox[0]];
  double ry = wy[oy[0]];
  std::vector<double> terms;
  terms.reserve(x.size() + y.size());
  while (i < x.size() && j < y.size()) {
    const double cost = abs_power(x[ox[i]] - y[oy[j]], p);
    if (rx < ry) {
      terms.push_back(rx * cost);
      ry -= rx;
      if (++i < x.size()) rx = wx[ox[i]];
    } else if (ry < rx) {
      terms.push_back(ry * cost);
      rx -= ry;
      if (++j < y.size()) ry = wy[oy[j]];
    } else {
      terms.push_back(rx * cost);
      if (++i < x.size()) rx = wx[ox[i]];
      if (++j < y.size()) ry = wy[oy[j]];
    }
  }
  return pairwise_sum(terms);
}

// z_k = Phi^{-1}(k / M) and phi(z_k) for k = 0..M, shared per M.
struct QuantileTable {
  std::vector<double> z;
  std::vector<double> pdf;
};

std::shared_ptr<const QuantileTable> quantile_table(std::size_t m) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const QuantileTable>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(m); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<QuantileTable>();
  table->z.resize(m + 1);
  table->pdf.resize(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(m);
    table->z[k] = stdnormal::quantile(u);
    table->pdf[k] = stdnormal::pdf(table->z[k]);
  }
  std::lock_guard lock(mutex);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(m, std::move(table)).first->second;
}

inline double z_pdf(double z, double pdf) { return std::isinf(z) ? 0.0 : z * pdf; }

// int_a^b (x - m - s q(u))^2 du with q the standard normal quantile.
inline double w2_atom(double y, double s, double width, double za, double pa, double zb,
                      double pb) {
  const double first = pa - pb;                                   // int q
  const double second = width - (z_pdf(zb, pb) - z_pdf(za, pa));  // int q^2
  return width * y * y - 2.0 * y * s * first + s * s * second;
}

// int_a^b |y - s q(u)| du.
inline double w1_atom(double y, double s, double a, double b, double za, double pa, double zb,
                      double pb) {
  if (s == 0.0) return (b - a) * std::abs(y);
  // Split where s q(u) = y.
  double zc = y / s;
  double uc = stdnormal::cdf(zc);
  double pc;
  if (uc <= a) {
    uc = a;
    zc = za;
    pc = pa;
  } else if (uc >= b) {
    uc = b;
    zc = zb;
    pc = pb;
  } else {
    pc = stdnormal::pdf(zc);
  }
  // int q over [a, c] is pa - pc; over [c, b] is pc - pb.
  const double below = y * (uc - a) - s * (pa - pc);
  const double above = s * (pc - pb) - y * (b - uc);
  return below + above;
}

void check_gaussian(double variance) {
  if (!(variance >= 0.0)) throw DomainError("gaussian target: variance must be nonnegative");
}

void check_line(const DiscreteMeasure& mu) {
  if (mu.dimension() != 1) throw DomainError("measure must be one-dimensional");
}

template <class AtomFn>
double sum_over_sorted_atoms(const DiscreteMeasure& mu, AtomFn atom) {
  const auto x = mu.points();
  const auto w = mu.weights();
  const auto order = sorted_order(x);
  std::vector<double> terms(order.size());
  double a = 0.0;
  double za = -std::numeric_limits<double>::infinity();
  double pa = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double b = k + 1 == order.size() ? 1.0 : std::min(1.0, a + w[order[k]]);
    const double zb = stdnormal::quantile(b);
    const double pb = stdnormal::pdf(zb);
    terms[k] = atom(x[order[k]], a, b, za, pa, zb, pb);
    a = b;
    za = zb;
    pa = pb;
  }
  return pairwise_sum(terms);
}

}  // namespace

double moment(const DiscreteMeasure& mu, double p) {
  if (!(p >= 1.0)) throw DomainError("moment: order must be >= 1");
  const std::vector<double> origin(mu.dimension(), 0.0);
  std::vector<double> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    terms[k] = mu.weights()[k] * distance_power(mu.point(k), origin, p);
  }
  return pairwise_sum(terms);
}

double wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  check_order(p);
  if (mu.dimension() != 1 || nu.dimension() != 1) {
    throw DomainError("wasserstein_1d: both measures must be one-dimensional");
  }
  const double cost = monotone_cost(mu.points(), mu.weights(), nu.points(), nu.weights(), p);
  return p == 1.0 ? cost : std::pow(cost, 1.0 / p);
}

double wasserstein_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  check_order(p);
  if (mu.size() != nu.size()) throw DomainError("wasserstein_exact: sizes differ");
  if (mu.dimension() != nu.dimension()) throw DomainError("wasserstein_exact: dimensions differ");
  if (!mu.is_uniform() || !nu.is_uniform()) {
    throw DomainError("wasserstein_exact: weights must be uniform");
  }
  const std::size_t m = mu.size();
  if (m > kExactTransportCap) {
    throw CapacityError("wasserstein_exact: " + std::to_string(m) + " points exceed the cap of " +
                        std::to_string(kExactTransportCap) + "; use the sliced method");
  }
  std::vector<double> cost(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = distance_power(mu.point(i), nu.point(j), p);
  }
  const auto assignment = solve_assignment(cost, m);
  const double mean_cost = std::max(0.0, assignment.cost / static_cast<double>(m));
  return p == 1.0 ? mean_cost : std::pow(mean_cost, 1.0 / p);
}

double wasserstein_sliced(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                          std::size_t projections, std::uint64_t seed) {
  check_order(p);
  if (projections == 0) throw DomainError("wasserstein_sliced: need at least one projection");
  if (mu.dimension() != nu.dimension()) throw DomainError("wasserstein_sliced: dimensions differ");
  const std::size_t d = mu.dimension();
  const auto key = key_from_seed(seed);
  std::vector<double> direction(d), pmu(mu.size()), pnu(nu.size());
  std::vector<double> costs(projections);
  for (std::size_t k = 0; k < projections; ++k) {
    double norm = 0.0;
    do {
      for (std::size_t c = 0; c < d; c += 2) {
        const auto z = normal_pair(stream_counter(static_cast<std::uint32_t>(k), 0, 0,
                                                  StreamTag::kProjection,
                                                  static_cast<std::uint32_t>(c / 2)),
                                   key);
        direction[c] = z[0];
        if (c + 1 < d) direction[c + 1] = z[1];
      }
      norm = std::sqrt(std::inner_product(direction.begin(), direction.end(),
                                          direction.begin(), 0.0));
    } while (norm == 0.0);
    for (double& x : direction) x /= norm;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      pmu[i] = std::inner_product(direction.begin(), direction.end(), mu.point(i).begin(), 0.0);
    }
    for (std::size_t i = 0; i < nu.size(); ++i) {
      pnu[i] = std::inner_product(direction.begin(), direction.end(), nu.point(i).begin(), 0.0);
    }
    costs[k] = monotone_cost(pmu, mu.weights(), pnu, nu.weights(), p);
  }
  const double mean_cost = pairwise_sum(costs) / static_cast<double>(projections);
  return p == 1.0 ? mean_cost : std::pow(mean_cost, 1.0 / p);
}

double w2_to_gaussian(const DiscreteMeasure& mu, double mean, double variance) {
  check_line(mu);
  check_gaussian(variance);
  const double s = std::sqrt(variance);
  const double total = sum_over_sorted_atoms(
      mu, [&](double x, double a, double b, double za, double pa, double zb, double pb) {
        return w2_atom(x - mean, s, b - a, za, pa, zb, pb);
      });
  return std::sqrt(std::max(0.0, total));
}

double w1_to_gaussian(const DiscreteMeasure& mu, double mean, double variance) {
  check_line(mu);
  check_gaussian(variance);
  const double s = std::sqrt(variance);
  return sum_over_sorted_atoms(
      mu, [&](double x, double a, double b, double za, double pa, double zb, double pb) {
        return w1_atom(x - mean, s, a, b, za, pa, zb, pb);
      });
}

double w2_squared_to_gaussian_samples(std::span<const double> samples, double mean,
                                      double variance) {
  check_gaussian(variance);
  if (samples.empty()) throw DomainError("w2_to_gaussian: no samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  const double s = std::sqrt(variance);
  const double width = 1.0 / static_cast<double>(m);
  const auto table = quantile_table(m);
  std::vector<double> terms(m);
  for (std::size_t k = 0; k < m; ++k) {
    terms[k] = w2_atom(x[k] - mean, s, width, table->z[k], table->pdf[k], table->z[k + 1],
                       table->pdf[k + 1]);
  }
  return std::max(0.0, pairwise_sum(terms));
}

double w1_to_gaussian_samples(std::span<const double> samples, double mean, double variance) {
  check_gaussian(variance);
  if (samples.empty()) throw DomainError("w1_to_gaussian: no samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t m = x.size();
  const double s = std::sqrt(variance);
  const auto table = quantile_table(m);
  std::vector<double> terms(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(m);
    const double b = static_cast<double>(k + 1) / static_cast<double>(m);
    terms[k] = w1_atom(x[k] - mean, s, a, b, table->z[k], table->pdf[k], table->z[k + 1],
                       table->pdf[k + 1]);
  }
  return pairwise_sum(terms);
}

}  // namespace mvsim
