#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mvsim/measures.hpp"
#include "mvsim/reference_models.hpp"

namespace mvsim {

/// Scalar function on R with a computable Gaussian expectation: closed
/// form for the named families, adaptive quadrature otherwise.
class ScalarFunction {
 public:
  static ScalarFunction identity();
  /// sum_k coeffs[k] x^k
  static ScalarFunction polynomial(std::vector<double> coeffs);
  static ScalarFunction sine(double frequency = 1.0, double phase = 0.0);
  /// |x - center|
  static ScalarFunction abs(double center = 0.0);
  static ScalarFunction tanh(double scale = 1.0);
  static ScalarFunction custom(std::string name, std::function<double(double)> fn);

  double operator()(double x) const;
  /// E[f(X)] for X ~ N(mean, variance).
  double gaussian_expectation(double mean, double variance) const;
  const std::string& name() const noexcept { return name_; }

 private:
  enum class Kind { kPolynomial, kSine, kAbs, kTanh, kCustom };
  ScalarFunction(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<double> coeffs_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::function<double(double)> custom_;
};

/// Interaction kernel K(x, y) = k(x - y).
class DifferenceKernel {
 public:
  /// k(z) = z^2
  static DifferenceKernel squared();
  /// k(z) = exp(-z^2 / (2 l^2))
  static DifferenceKernel gaussian(double length);
  static DifferenceKernel custom(std::string name, std::function<double(double)> fn);

  double operator()(double x, double y) const;
  /// E[k(X - Y)] for X, Y i.i.d. N(m, variance).
  double gaussian_expectation(double variance) const;
  const std::string& name() const noexcept { return name_; }

 private:
  enum class Kind { kSquared, kGaussian, kCustom };
  DifferenceKernel(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  double length_ = 1.0;
  std::function<double(double)> custom_;
};

/// Phi(mu) = value
struct ConstantFunctional {
  double value = 0.0;
};
/// Phi(mu) = int F dmu
struct LinearFunctional {
  ScalarFunction f;
};
/// Phi(mu) = G(int F dmu)
struct ComposedFunctional {
  ScalarFunction g;
  ScalarFunction f;
};
/// Phi(mu) = int int K(x, y) mu(dx) mu(dy)
struct QuadraticFunctional {
  DifferenceKernel k;
};

/// Functional on 1-D probability measures. Membership in the admissible
/// class (linear functional derivatives with the required Hölder bounds) is
/// assumed for user-built functionals and not checked.
struct Functional {
  std::string id;
  std::variant<ConstantFunctional, LinearFunctional, ComposedFunctional, QuadraticFunctional> form;
};

struct FunctionalValue {
  double value = 0.0;
  double std_error = 0.0;  // nonzero only for the sampled quadratic form
  bool exact = true;
};

struct FunctionalOptions {
  std::size_t quadratic_exact_limit = 8192;
  std::size_t sampled_pairs = std::size_t{1} << 20;
  std::uint64_t seed = 0x5eed;
};

FunctionalValue functional_eval(const Functional& phi, const DiscreteMeasure& mu,
                                const FunctionalOptions& options = {});
/// Same on uniform 1-D samples.
FunctionalValue functional_eval(const Functional& phi, std::span<const double> samples,
                                const FunctionalOptions& options = {});

/// Phi(N(mean, variance)). Throws DomainError when the Gaussian integral
/// is not finite.
double functional_on_gaussian(const Functional& phi, const FlowPoint& law);

/// Built-in functionals: constant, mean, second-moment, abs, sin,
/// mean-squared, tanh-sin, variance-kernel, gauss-kernel.
Functional make_functional(const std::string& id);
std::vector<std::pair<std::string, std::string>> functional_catalog();

}  // namespace mvsim
