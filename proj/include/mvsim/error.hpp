#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvsim {

/// Invalid argument to a library operation (out-of-range time, dimension
/// mismatch, non-divisible grids, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A particle left the finite reals during time stepping.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t particle, std::size_t step)
      : std::runtime_error("non-finite state for particle " + std::to_string(particle) +
                           " at step " + std::to_string(step)),
        particle_(particle),
        step_(step) {}

  std::size_t particle() const noexcept { return particle_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t particle_;
  std::size_t step_;
};

/// The requested operation needs structure the model does not have
/// (e.g. a closed-form law for the exact coupled reference).
class UnsupportedModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact solver was asked for a problem above its size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace mvsim
