#pragma once

#include <stdexcept>
#include <string>

namespace qsl {

// Contract violations raised by the numerical core. All derive from
// std::invalid_argument or std::runtime_error so callers can catch broadly.

class NonHermitianError : public std::invalid_argument {
  public:
    NonHermitianError(const std::string& what, double max_asymmetry)
        : std::invalid_argument(what), max_asymmetry_(max_asymmetry) {}

    double max_asymmetry() const noexcept { return max_asymmetry_; }

  private:
    double max_asymmetry_;
};

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class NormalizationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class StepSizeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace qsl
