#pragma once

#include <optional>

namespace dwrom {

// Knobs a caller may override on a published benchmark setup.
struct BenchmarkOverrides {
    std::optional<int> nh;
    std::optional<double> a0, h0, cfl, t_end, p, d_cip;

    static BenchmarkOverrides none() { return {}; }
};

}  // namespace dwrom
