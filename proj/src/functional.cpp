#include "mvsim/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mvsim/error.hpp"
#include "mvsim/philox.hpp"
#include "mvsim/summation.hpp"

namespace mvsim {

namespace {

// E[f(m + s Z)] by adaptive Gauss-Kronrod on the standard normal density.
double gauss_quadrature(const std::function<double(double)>& f, double mean, double variance) {
  if (variance == 0.0) return f(mean);
  const double s = std::sqrt(variance);
  const auto integrand = [&](double z) {
    return f(mean + s * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
      15, 1e-12, &error);
  if (!std::isfinite(value) || !(error <= 1e-6 * std::max(1.0, std::fabs(value)))) {
    throw DomainError("gaussian expectation is not finite");
  }
  return value;
}

}  // namespace

ScalarFunction ScalarFunction::identity() { return polynomial({0.0, 1.0}); }

ScalarFunction ScalarFunction::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  ScalarFunction f(Kind::kPolynomial, "polynomial");
  f.coeffs_ = std::move(coeffs);
  return f;
}

ScalarFunction ScalarFunction::sine(double frequency, double phase) {
  ScalarFunction f(Kind::kSine, "sin");
  f.a_ = frequency;
  f.b_ = phase;
  return f;
}

ScalarFunction ScalarFunction::abs(double center) {
  ScalarFunction f(Kind::kAbs, "abs");
  f.a_ = center;
  return f;
}

ScalarFunction ScalarFunction::tanh(double scale) {
  ScalarFunction f(Kind::kTanh, "tanh");
  f.a_ = scale;
  return f;
}

ScalarFunction ScalarFunction::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw DomainError("custom function is empty");
  ScalarFunction f(Kind::kCustom, std::move(name));
  f.custom_ = std::move(fn);
  return f;
}

double ScalarFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::kPolynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Kind::kSine:
      return std::sin(a_ * x + b_);
    case Kind::kAbs:
      return std::abs(x - a_);
    case Kind::kTanh:
      return std::tanh(a_ * x);
    case Kind::kCustom:
      return custom_(x);
  }
  return 0.0;
}

double ScalarFunction::gaussian_expectation(double mean, double variance) const {
  if (!(variance >= 0.0)) throw DomainError("gaussian expectation: negative variance");
  switch (kind_) {
    case Kind::kPolynomial: {
      // Raw moments: mu_k = m mu_{k-1} + (k - 1) v mu_{k-2}.
      double prev = 1.0;
      double cur = mean;
      double acc = coeffs_[0];
      if (coeffs_.size() > 1) acc += coeffs_[1] * cur;
      for (std::size_t k = 2; k < coeffs_.size(); ++k) {
        const double next = mean * cur + static_cast<double>(k - 1) * variance * prev;
        prev = cur;
        cur = next;
        acc += coeffs_[k] * cur;
      }
      return acc;
    }
    case Kind::kSine:
      return std::sin(a_ * mean + b_) * std::exp(-0.5 * a_ * a_ * variance);
    case Kind::kAbs: {
      const double mu = mean - a_;
      if (variance == 0.0) return std::abs(mu);
      const double s = std::sqrt(variance);
      return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * mu * mu / variance) +
             mu * std::erf(mu / (s * std::sqrt(2.0)));
    }
    case Kind::kTanh:
    case Kind::kCustom:
      return gauss_quadrature([this](double x) { return (*this)(x); }, mean, variance);
  }
  return 0.0;
}

DifferenceKernel DifferenceKernel::squared() { return DifferenceKernel(Kind::kSquared, "squared"); }

DifferenceKernel DifferenceKernel::gaussian(double length) {
  if (!(length > 0.0)) throw DomainError("gaussian kernel: length must be positive");
  DifferenceKernel k(Kind::kGaussian, "gaussian");
  k.length_ = length;
  return k;
}

DifferenceKernel DifferenceKernel::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw DomainError("custom kernel is empty");
  DifferenceKernel k(Kind::kCustom, std::move(name));
  k.custom_ = std::move(fn);
  return k;
}

double DifferenceKernel::operator()(double x, double y) const {
  const double z = x - y;
  switch (kind_) {
    case Kind::kSquared:
      return z * z;
    case Kind::kGaussian:
      return std::exp(-0.5 * z * z / (length_ * length_));
    case Kind::kCustom:
      return custom_(z);
  }
  return 0.0;
}

double DifferenceKernel::gaussian_expectation(double variance) const {
  if (!(variance >= 0.0)) throw DomainError("gaussian expectation: negative variance");
  // X - Y ~ N(0, 2v).
  switch (kind_) {
    case Kind::kSquared:
      return 2.0 * variance;
    case Kind::kGaussian:
      return length_ / std::sqrt(length_ * length_ + 2.0 * variance);
    case Kind::kCustom:
      return gauss_quadrature(custom_, 0.0, 2.0 * variance);
  }
  return 0.0;
}

namespace {

double linear_eval(const ScalarFunction& f, std::span<const double> x,
                   std::span<const double> w) {
  std::vector<double> terms(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) terms[k] = w.empty() ? f(x[k]) : w[k] * f(x[k]);
  const double s = pairwise_sum(terms);
  return w.empty() ? s / static_cast<double>(x.size()) : s;
}

FunctionalValue quadratic_eval(const DifferenceKernel& k, std::span<const double> x,
                               std::span<const double> w, const FunctionalOptions& options) {
  const std::size_t m = x.size();
  if (m <= options.quadratic_exact_limit) {
    std::vector<double> rows(m);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        row[j] = (w.empty() ? 1.0 : w[j]) * k(x[i], x[j]);
      }
      rows[i] = (w.empty() ? 1.0 : w[i]) * pairwise_sum(row);
    }
    double value = pairwise_sum(rows);
    if (w.empty()) value /= static_cast<double>(m) * static_cast<double>(m);
    return {value, 0.0, true};
  }
  // Uniform pairs (i, j) drawn with replacement; for weighted measures,
  // inverse-CDF sampling of the atom index.
  std::vector<double> cdf;
  if (!w.empty()) {
    cdf.resize(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) cdf[i] = acc += w[i];
  }
  const auto pick = [&](double u) {
    if (cdf.empty()) return std::min(m - 1, static_cast<std::size_t>(u * static_cast<double>(m)));
    return std::min(m - 1, static_cast<std::size_t>(
                               std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back()) -
                               cdf.begin()));
  };
  const auto key = key_from_seed(options.seed);
  const std::size_t pairs = std::max<std::size_t>(options.sampled_pairs, 2);
  std::vector<double> values(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto bits = Philox4x32::apply(
        stream_counter(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32), 0,
                       StreamTag::kPairSampling, 0),
        key);
    const double u1 = to_open_unit((static_cast<std::uint64_t>(bits[0]) << 32) | bits[1]);
    const double u2 = to_open_unit((static_cast<std::uint64_t>(bits[2]) << 32) | bits[3]);
    values[p] = k(x[pick(u1)], x[pick(u2)]);
  }
  const double mean = pairwise_sum(values) / static_cast<double>(pairs);
  std::vector<double> dev(pairs);
  for (std::size_t p = 0; p < pairs; ++p) dev[p] = (values[p] - mean) * (values[p] - mean);
  const double var = pairwise_sum(dev) / static_cast<double>(pairs - 1);
  return {mean, std::sqrt(var / static_cast<double>(pairs)), false};
}

FunctionalValue evaluate(const Functional& phi, std::span<const double> x,
                         std::span<const double> w, const FunctionalOptions& options) {
  if (x.empty()) throw DomainError("functional: empty measure");
  return std::visit(
      [&](const auto& form) -> FunctionalValue {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, ConstantFunctional>) {
          return {form.value, 0.0, true};
        } else if constexpr (std::is_same_v<T, LinearFunctional>) {
          return {linear_eval(form.f, x, w), 0.0, true};
        } else if constexpr (std::is_same_v<T, ComposedFunctional>) {
          return {form.g(linear_eval(form.f, x, w)), 0.0, true};
        } else {
          return quadratic_eval(form.k, x, w, options);
        }
      },
      phi.form);
}

}  // namespace

FunctionalValue functional_eval(const Functional& phi, const DiscreteMeasure& mu,
                                const FunctionalOptions& options) {
  if (mu.dimension() != 1) throw DomainError("functional: measure must be one-dimensional");
  return evaluate(phi, mu.points(), mu.weights(), options);
}

FunctionalValue functional_eval(const Functional& phi, std::span<const double> samples,
                                const FunctionalOptions& options) {
  return evaluate(phi, samples, {}, options);
}

double functional_on_gaussian(const Functional& phi, const FlowPoint& law) {
  const double value = std::visit(
      [&](const auto& form) -> double {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, ConstantFunctional>) {
          return form.value;
        } else if constexpr (std::is_same_v<T, LinearFunctional>) {
          return form.f.gaussian_expectation(law.mean, law.variance);
        } else if constexpr (std::is_same_v<T, ComposedFunctional>) {
          return form.g(form.f.gaussian_expectation(law.mean, law.variance));
        } else {
          return form.k.gaussian_expectation(law.variance);
        }
      },
      phi.form);
  if (!std::isfinite(value)) throw DomainError("functional: gaussian value is not finite");
  return value;
}

namespace {

struct CatalogItem {
  const char* id;
  const char* description;
  Functional (*make)();
};

const std::vector<CatalogItem>& items() {
  static const std::vector<CatalogItem> list = {
      {"constant", "Phi = 1",
       [] { return Functional{"constant", ConstantFunctional{1.0}}; }},
      {"mean", "int x dmu",
       [] { return Functional{"mean", LinearFunctional{ScalarFunction::identity()}}; }},
      {"second-moment", "int x^2 dmu",
       [] {
         return Functional{"second-moment",
                           LinearFunctional{ScalarFunction::polynomial({0.0, 0.0, 1.0})}};
       }},
      {"abs", "int |x| dmu",
       [] { return Functional{"abs", LinearFunctional{ScalarFunction::abs()}}; }},
      {"sin", "int sin(x) dmu",
       [] { return Functional{"sin", LinearFunctional{ScalarFunction::sine()}}; }},
      {"mean-squared", "(int x dmu)^2",
       [] {
         return Functional{"mean-squared",
                           ComposedFunctional{ScalarFunction::polynomial({0.0, 0.0, 1.0}),
                                              ScalarFunction::identity()}};
       }},
      {"tanh-sin", "tanh(int sin(x) dmu)",
       [] {
         return Functional{"tanh-sin",
                           ComposedFunctional{ScalarFunction::tanh(), ScalarFunction::sine()}};
       }},
      {"variance-kernel", "int int (x - y)^2 dmu dmu",
       [] {
         return Functional{"variance-kernel", QuadraticFunctional{DifferenceKernel::squared()}};
       }},
      {"gauss-kernel", "int int exp(-(x - y)^2 / 2) dmu dmu",
       [] {
         return Functional{"gauss-kernel",
                           QuadraticFunctional{DifferenceKernel::gaussian(1.0)}};
       }},
  };
  return list;
}

}  // namespace

Functional make_functional(const std::string& id) {
  for (const auto& item : items()) {
    if (id == item.id) return item.make();
  }
  throw DomainError("unknown functional '" + id + "'");
}

std::vector<std::pair<std::string, std::string>> functional_catalog() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : items()) out.emplace_back(item.id, item.description);
  return out;
}

}  // namespace mvsim
