#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dwrom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad user input: malformed configs, dry rest states, unknown benchmark names.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure while running: singular systems, NaN states, dry nodes.
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularMatrixError : SimulationError {
    explicit SingularMatrixError(const std::string& msg) : SimulationError(msg) {}
};

// Blow-up attributable to an under-resolved interpolation space; reported
// separately from generic failures so runs can be flagged instead of crashed.
struct EimInstabilityError : SimulationError {
    explicit EimInstabilityError(const std::string& msg) : SimulationError(msg) {}
};

}  // namespace dwrom
