#pragma once

#include <stdexcept>
#include <string>

namespace oamturb {

/// Adaptive quadrature could not reach the requested tolerance within its panel budget.
class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// a + b vanished; the normalized output state is undefined.
class DegenerateChannel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix handed to a square-root routine had a clearly negative eigenvalue.
class NotPSD : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature failure raised inside a sweep, tagged with the grid point.
class SweepFailure : public ConvergenceFailure {
public:
    SweepFailure(double x, const std::string& what)
        : ConvergenceFailure("at x=" + std::to_string(x) + ": " + what), x_(x) {}
    double x() const noexcept { return x_; }

private:
    double x_;
};

}  // namespace oamturb
