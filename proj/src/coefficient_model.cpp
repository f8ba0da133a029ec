#include "mvsim/coefficient_model.hpp"

#include "mvsim/error.hpp"

namespace mvsim {
namespace {

void check_arguments(const CoefficientModel& model, std::span<const double> x,
                     const EmpiricalMeasureView& mu) {
  if (x.size() != model.dimension()) throw DomainError("coefficient: point has wrong dimension");
  if (mu.dimension() != model.dimension()) {
    throw DomainError("coefficient: measure has wrong dimension");
  }
  if (mu.size() == 0) throw DomainError("coefficient: empty measure");
}

}  // namespace

std::vector<double> evaluate_drift(const CoefficientModel& model, double t,
                                   std::span<const double> x, const EmpiricalMeasureView& mu) {
  check_arguments(model, x, mu);
  std::vector<double> out(model.dimension());
  model.drift(t, x, mu, out);
  return out;
}

std::vector<double> evaluate_diffusion(const CoefficientModel& model, double t,
                                       std::span<const double> x,
                                       const EmpiricalMeasureView& mu) {
  check_arguments(model, x, mu);
  std::vector<double> out(model.dimension() * model.noise_dimension());
  model.diffusion(t, x, mu, out);
  return out;
}

FunctionModel::FunctionModel(std::string id, std::size_t dimension, std::size_t noise_dimension,
                             Coefficient drift, Coefficient diffusion, RegularityCard card)
    : id_(std::move(id)),
      dimension_(dimension),
      noise_dimension_(noise_dimension),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      card_(card) {
  if (dimension == 0 || noise_dimension == 0) {
    throw DomainError("model: dimensions must be positive");
  }
  if (!drift_ || !diffusion_) throw DomainError("model: drift and diffusion are required");
}

}  // namespace mvsim
