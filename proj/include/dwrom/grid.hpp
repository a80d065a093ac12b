#pragma once

#include "dwrom/common.hpp"

namespace dwrom {

enum class Bc { Periodic, DirichletLeftLifted, Extrapolated };

// Uniform 1D mesh. For periodic grids node nh wraps onto node 0, so
// dx = (x1-x0)/nh; otherwise the last node sits on x1 and dx = (x1-x0)/(nh-1).
struct Grid1D {
    double x0 = 0.0;
    double x1 = 1.0;
    int nh = 0;
    Bc bc = Bc::Periodic;

    double dx() const {
        return bc == Bc::Periodic ? (x1 - x0) / nh : (x1 - x0) / (nh - 1);
    }
    double node(int i) const { return x0 + i * dx(); }
    double length() const { return x1 - x0; }
    bool periodic() const { return bc == Bc::Periodic; }

    Vec nodes() const {
        Vec x(nh);
        for (int i = 0; i < nh; ++i) x[i] = node(i);
        return x;
    }
};

Grid1D make_grid(double x0, double x1, int nh, Bc bc);

}  // namespace dwrom
