#pragma once
#include <stdexcept>
#include <string>

namespace pqmc {

// A factorization hit a pivot that is not usably positive.
class DefinitenessError : public std::runtime_error {
  public:
    DefinitenessError(int pivot, double value)
        : std::runtime_error("matrix is not positive definite: pivot " +
                             std::to_string(pivot) + " = " +
                             std::to_string(value)),
          pivot_(pivot) {}
    int pivot() const { return pivot_; }

  private:
    int pivot_;
};

// An iterative scheme ran out of iterations before reaching tolerance.
class NumericalError : public std::runtime_error {
  public:
    NumericalError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) +
                             ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

// The conditional-expectation closed form requires the payoff to be monotone
// in the pre-integrated variable; raised when the factor's first column has
// mixed signs.
class MonotonicityError : public std::runtime_error {
  public:
    explicit MonotonicityError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace pqmc
