#include "dwrom/time_scheme.hpp"

#include <cmath>

namespace dwrom {

void TimeScheme::validate() const {
    if (rho.size() != theta.size()) throw ConfigError("time scheme: rho/theta stage mismatch");
    for (size_t s = 0; s < rho.size(); ++s) {
        if (rho[s].size() != s + 1 || theta[s].size() != s + 1)
            throw ConfigError("time scheme: row " + std::to_string(s) + " has wrong length");
        double sum = 0.0;
        for (double r : rho[s]) sum += r;
        if (std::abs(sum - 1.0) > 1e-12)
            throw ConfigError("time scheme: rho row does not sum to 1");
    }
}

double TimeScheme::stage_time(int s, const std::vector<double>& tau, double dt) const {
    double t = 0.0;
    for (int r = 0; r <= s; ++r) t += rho[s][r] * tau[r] + dt * theta[s][r];
    return t;
}

TimeScheme ssprk22() {
    TimeScheme ts;
    ts.rho = {{1.0}, {0.5, 0.5}};
    ts.theta = {{1.0}, {0.0, 0.5}};
    ts.validate();
    return ts;
}

}  // namespace dwrom
