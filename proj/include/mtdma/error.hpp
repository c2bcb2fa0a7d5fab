#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtdma {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: duty cycles, plans, schedules, scenario fields.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Loss rate or RTT outside the range where the Mathis approximation holds.
class ModelValidityError : public Error {
public:
  using Error::Error;
};

/// An exhaustive search would visit more schedules than allowed.
class BudgetExceeded : public Error {
public:
  BudgetExceeded(std::uint64_t required, std::uint64_t budget, const std::string& context = {})
      : Error((context.empty() ? std::string() : context + ": ") + "enumeration needs " +
              std::to_string(required) + " schedules, budget is " + std::to_string(budget)),
        required_(required), budget_(budget) {}

  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t budget() const noexcept { return budget_; }

private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

}  // namespace mtdma
