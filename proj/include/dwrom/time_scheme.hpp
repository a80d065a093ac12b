#pragma once

#include <vector>

#include "dwrom/common.hpp"

namespace dwrom {

// Runge-Kutta coefficients in Shu-Osher form. Stage s combines previous
// stage values with weights rho[s][r] and their operator evaluations with
// theta[s][r]; consistency requires each rho row to sum to 1.
struct TimeScheme {
    std::vector<std::vector<double>> rho;
    std::vector<std::vector<double>> theta;

    int stages() const { return static_cast<int>(rho.size()); }
    void validate() const;
    // Abscissa of stage s given the previous stage times (tau[0] = t^n).
    double stage_time(int s, const std::vector<double>& tau, double dt) const;
};

TimeScheme ssprk22();

}  // namespace dwrom
