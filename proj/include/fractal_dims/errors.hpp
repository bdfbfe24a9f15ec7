#ifndef FRACTAL_DIMS_ERRORS_HPP
#define FRACTAL_DIMS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fractal_dims {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or precondition violation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

// A configured size cap (points, segments, cells) would be exceeded.
class SizeLimitError : public Error {
public:
    explicit SizeLimitError(const std::string& what) : Error("size limit: " + what) {}
};

// Iterative method failed to converge; carries the final residual.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double residual)
        : Error("numeric error: " + what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error("geometry error: " + what) {}
};

class ContourError : public Error {
public:
    explicit ContourError(const std::string& what) : Error("contour error: " + what) {}
};

// Evaluation requested too close to a zero of the Dirichlet polynomial.
class PoleProximityError : public Error {
public:
    explicit PoleProximityError(double abs_p)
        : Error("pole proximity: |P(s)| = " + std::to_string(abs_p)), abs_p_(abs_p) {}
    double abs_p() const noexcept { return abs_p_; }

private:
    double abs_p_;
};

// Requested scale is below what the grid can resolve.
class ResolutionError : public Error {
public:
    explicit ResolutionError(const std::string& what) : Error("resolution error: " + what) {}
};

// Requested evaluation range is outside the sampled data.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& what) : Error("range error: " + what) {}
};

// Least-squares fit is degenerate or has too few samples.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error("fit error: " + what) {}
};

}  // namespace fractal_dims

#endif  // FRACTAL_DIMS_ERRORS_HPP
