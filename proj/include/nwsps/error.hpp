#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nwsps {

// Base for every error raised by the library. The CLI maps these onto the
// structured error JSON.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// Input violates a documented precondition (bad geometry, bad rates, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

// A numerical procedure failed (NaN field, non-converged fit, ...).
class NumericalError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical_error"; }
};

// FDTD field blow-up; carries the step at which a non-finite value appeared.
class FieldDivergence : public NumericalError {
public:
  FieldDivergence(const std::string& what, std::int64_t step)
      : NumericalError(what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }
  const char* kind() const noexcept override { return "field_divergence"; }

private:
  std::int64_t step_;
};

}  // namespace nwsps
