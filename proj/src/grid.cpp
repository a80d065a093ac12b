#include "dwrom/grid.hpp"

namespace dwrom {

Grid1D make_grid(double x0, double x1, int nh, Bc bc) {
    if (nh < 5) throw ConfigError("grid needs at least 5 nodes, got " + std::to_string(nh));
    if (!(x1 > x0)) throw ConfigError("grid extent must be positive");
    Grid1D g{x0, x1, nh, bc};
    if (!(g.dx() > 0.0)) throw ConfigError("grid spacing must be positive");
    return g;
}

}  // namespace dwrom
