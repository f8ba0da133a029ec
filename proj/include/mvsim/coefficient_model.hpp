#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mvsim/measure_view.hpp"

namespace mvsim {

/// Declared (not verified) regularity of a model's coefficients.
struct RegularityCard {
  double eta = 1.0;  // Hölder exponent in (0, 1]
  bool lipschitz_in_x_and_measure = false;
  bool smooth = false;
  bool bounded = false;
  // L in |b(t,x,mu) - b(t,y,nu)| <= L (|x - y| + W1(mu, nu)); NaN when not declared.
  double lipschitz_constant = std::numeric_limits<double>::quiet_NaN();
};

/// Drift b(t, x, mu) in R^d and diffusion sigma(t, x, mu) in R^{d x q} of a
/// McKean-Vlasov SDE, where mu is always an empirical measure.
///
/// Implementations must be pure and safe to call concurrently.
class CoefficientModel {
 public:
  virtual ~CoefficientModel() = default;

  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t noise_dimension() const = 0;
  virtual RegularityCard regularity() const = 0;

  /// Writes b(t, x, mu) into out (size d).
  virtual void drift(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
                     std::span<double> out) const = 0;

  /// Writes sigma(t, x, mu) into out (size d * q, row-major).
  virtual void diffusion(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
                         std::span<double> out) const = 0;
};

/// Checked evaluation of b; throws DomainError on dimension mismatch or an
/// empty measure.
std::vector<double> evaluate_drift(const CoefficientModel& model, double t,
                                   std::span<const double> x, const EmpiricalMeasureView& mu);

/// Checked evaluation of sigma (row-major d x q).
std::vector<double> evaluate_diffusion(const CoefficientModel& model, double t,
                                       std::span<const double> x,
                                       const EmpiricalMeasureView& mu);

/// Model assembled from callables; handy for ad-hoc and test models.
class FunctionModel final : public CoefficientModel {
 public:
  using Coefficient = std::function<void(double, std::span<const double>,
                                         const EmpiricalMeasureView&, std::span<double>)>;

  FunctionModel(std::string id, std::size_t dimension, std::size_t noise_dimension,
                Coefficient drift, Coefficient diffusion, RegularityCard card = {});

  std::string id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t noise_dimension() const override { return noise_dimension_; }
  RegularityCard regularity() const override { return card_; }

  void drift(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
             std::span<double> out) const override {
    drift_(t, x, mu, out);
  }
  void diffusion(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
                 std::span<double> out) const override {
    diffusion_(t, x, mu, out);
  }

 private:
  std::string id_;
  std::size_t dimension_;
  std::size_t noise_dimension_;
  Coefficient drift_;
  Coefficient diffusion_;
  RegularityCard card_;
};

}  // namespace mvsim
