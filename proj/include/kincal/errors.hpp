#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kincal {

/// Fewer pose measurements than the identification problem needs.
class TooFewMeasurementsError : public std::runtime_error {
public:
    TooFewMeasurementsError(const std::string& what, int required_measurements)
        : std::runtime_error(what), required(required_measurements) {}

    int required;
};

/// The masked Jacobian columns are rank deficient.
class NotIdentifiableError : public std::runtime_error {
public:
    NotIdentifiableError(const std::string& what, std::vector<int> deficient)
        : std::runtime_error(what), deficient_columns(std::move(deficient)) {}

    std::vector<int> deficient_columns;
};

/// Gram factorization failed even after jitter escalation.
class IllConditionedModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-iteration progress of the calibration loop.
struct CalibrationIteration {
    int iteration = 0;
    double residual_norm = 0.0;
    double step_norm = 0.0;
};

/// Calibration residual grew for several consecutive iterations.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<CalibrationIteration> h)
        : std::runtime_error(what), history(std::move(h)) {}

    std::vector<CalibrationIteration> history;
};

/// Configuration file failed validation; `field` is the offending path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field_path, const std::string& message)
        : std::runtime_error(field_path + ": " + message), field(field_path) {}

    std::string field;
};

}  // namespace kincal
