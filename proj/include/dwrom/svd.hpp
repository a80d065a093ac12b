#pragma once

#include "dwrom/common.hpp"

namespace dwrom {

struct ThinSvd {
    Mat u;       // n x r, orthonormal columns
    Vec sigma;   // length r = min(n,k), nonincreasing, >= 0
    Mat v;       // k x r
};

ThinSvd thin_svd(const Mat& s);

}  // namespace dwrom
