#pragma once

#include <cstddef>
#include <span>

#include "mvsim/noise.hpp"
#include "mvsim/reference_models.hpp"

namespace mvsim::detail {

/// Exact transition of dX = (a X + bbar m(t)) dt + sigma0 dW over one fine
/// step, given the Brownian increment over that step. The stochastic
/// convolution int e^{a(h-s)} dW_s is sampled jointly with the increment:
/// c1 dW + c2 Z with Z an independent normal from the convolution stream.
class ExactOuStepper {
 public:
  ExactOuStepper(const GaussianFlow& flow, const TimeGrid& fine_grid);

  /// Reference path of one particle from x0; writes X at the requested fine
  /// node indices (increasing) into `out`.
  void path(const NoiseTableau& tableau, std::size_t particle, double x0,
            std::span<const std::size_t> fine_nodes, std::span<double> out) const;

 private:
  const GaussianFlow* flow_;
  TimeGrid grid_;
  double decay_;       // e^{a h}
  double mean_gain_;   // e^{(a+bbar) h} - e^{a h}
  double c1_;
  double c2_;
};

}  // namespace mvsim::detail
