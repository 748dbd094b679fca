#pragma once

#include <stdexcept>
#include <cmath>
#include <string>
#include <utility>

namespace fbsec {

// Base of everything the library throws.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A user-supplied parameter is non-finite or out of range. `field()` names it.
class parameter_error : public error {
public:
    parameter_error(std::string field, const std::string& what)
        : error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A mathematical function was called outside its domain.
class domain_error : public error {
public:
    using error::error;
};

// An iterative method (series, quadrature, inversion) missed its tolerance.
class convergence_error : public error {
public:
    convergence_error(const std::string& what, double achieved_error)
        : error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
          achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// Talbot inversion at N and 2N nodes disagreed.
class inversion_instability_error : public convergence_error {
public:
    using convergence_error::convergence_error;
};

// Closed forms were asked for parameters outside the integer-exponent case.
class case_mismatch_error : public error {
public:
    using error::error;
};

namespace detail {

inline void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) {
        throw parameter_error(field, "must be finite");
    }
}

} // namespace detail

} // namespace fbsec
