#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mvsim/coefficient_model.hpp"

namespace mvsim {

/// Gaussian initial law N(mean, variance I_d); variance 0 is a point mass.
struct InitialLaw {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t dimension = 1;
};

struct FlowPoint {
  double mean;
  double variance;
};

/// Law of the linear mean-field SDE dX = (a X + bbar E[X]) dt + sigma0 dW
/// started from N(m0, v0): Gaussian with
///   m(t) = m0 exp((a + bbar) t),   v' = 2 a v + sigma0^2.
class GaussianFlow {
 public:
  GaussianFlow(double a, double bbar, double sigma0, double m0, double v0);

  double mean(double t) const;
  double variance(double t) const;
  FlowPoint at(double t) const { return {mean(t), variance(t)}; }

  double a() const noexcept { return a_; }
  double bbar() const noexcept { return bbar_; }
  double sigma0() const noexcept { return sigma0_; }
  double m0() const noexcept { return m0_; }
  double v0() const noexcept { return v0_; }

 private:
  double a_;
  double bbar_;
  double sigma0_;
  double m0_;
  double v0_;
};

/// (mean, variance) of the linear model's law at time t.
FlowPoint ou_flow(double a, double bbar, double sigma0, double m0, double v0, double t);

/// b(t, x, mu) = a x + bbar mean(mu), sigma = sigma0, d = q = 1.
class LinearInteractionModel final : public CoefficientModel {
 public:
  LinearInteractionModel(std::string id, double a, double bbar, double sigma0);

  std::string id() const override { return id_; }
  std::size_t dimension() const override { return 1; }
  std::size_t noise_dimension() const override { return 1; }
  RegularityCard regularity() const override;

  void drift(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
             std::span<double> out) const override;
  void diffusion(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
                 std::span<double> out) const override;

  double a() const noexcept { return a_; }
  double bbar() const noexcept { return bbar_; }
  double sigma0() const noexcept { return sigma0_; }

 private:
  std::string id_;
  double a_;
  double bbar_;
  double sigma0_;
};

/// b(t, x, mu) = c sign(z) |z|^eta + a x with z = x - mean(mu), sigma = sigma0.
/// With `clip` > 0 the drift is evaluated at x and z clamped to
/// [-clip, clip], which makes it bounded.
class HolderDriftModel final : public CoefficientModel {
 public:
  HolderDriftModel(double c, double eta, double a, double sigma0, double clip = 0.0);

  std::string id() const override { return "holder-drift"; }
  std::size_t dimension() const override { return 1; }
  std::size_t noise_dimension() const override { return 1; }
  RegularityCard regularity() const override;

  void drift(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
             std::span<double> out) const override;
  void diffusion(double t, std::span<const double> x, const EmpiricalMeasureView& mu,
                 std::span<double> out) const override;

 private:
  double c_;
  double eta_;
  double a_;
  double sigma0_;
  double clip_;
};

/// b = 0, sigma = 0 in any dimension.
class ZeroModel final : public CoefficientModel {
 public:
  explicit ZeroModel(std::size_t dimension = 1, std::size_t noise_dimension = 1)
      : dimension_(dimension), noise_dimension_(noise_dimension) {}

  std::string id() const override { return "zero"; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t noise_dimension() const override { return noise_dimension_; }
  RegularityCard regularity() const override;

  void drift(double, std::span<const double>, const EmpiricalMeasureView&,
             std::span<double> out) const override;
  void diffusion(double, std::span<const double>, const EmpiricalMeasureView&,
                 std::span<double> out) const override;

 private:
  std::size_t dimension_;
  std::size_t noise_dimension_;
};

/// Parameters understood by the catalog; unused fields are ignored.
struct ModelParams {
  double a = -1.0;
  double bbar = 0.5;
  double sigma0 = 1.0;
  double m0 = 1.0;
  double v0 = 0.0;
  double eta = 0.5;
  double c = -1.0;
  double clip = 0.0;
};

/// A model together with its initial law and, when solvable, its exact flow.
struct ModelSetup {
  std::shared_ptr<const CoefficientModel> model;
  InitialLaw initial;
  std::optional<GaussianFlow> flow;
};

struct CatalogEntry {
  std::string id;
  std::string description;
  ModelParams defaults;
  std::function<ModelSetup(const ModelParams&)> make;
};

/// Built-in models: "ou-linear", "ou-attract", "holder-drift", "zero".
const std::vector<CatalogEntry>& model_catalog();

/// Looks up an entry by id ("hölder-drift" is accepted as an alias).
/// Throws DomainError for unknown ids.
const CatalogEntry& find_model(const std::string& id);

}  // namespace mvsim
