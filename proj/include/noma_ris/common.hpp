#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace noma_ris {

/// Thrown when an input violates an operation's precondition. `parameter()`
/// names the offending quantity so front ends can report it in one line.
class DomainError : public std::domain_error {
public:
    DomainError(std::string parameter, const std::string& what)
        : std::domain_error(parameter + ": " + what), parameter_(std::move(parameter)) {}

    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

inline void require(bool condition, const char* parameter, const char* what) {
    if (!condition) throw DomainError(parameter, what);
}

inline void require_positive(double value, const char* parameter) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(parameter, "must be finite and > 0");
}

inline void require_finite(double value, const char* parameter) {
    if (!std::isfinite(value)) throw DomainError(parameter, "must be finite");
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// Amplitude factor 1/sqrt(PL) for a loss given in dB.
inline double loss_amplitude(double loss_db) { return std::pow(10.0, -loss_db / 20.0); }

}  // namespace noma_ris
