#include "dwrom/svd.hpp"

#include <Eigen/SVD>

namespace dwrom {

// Bidiagonal divide-and-conquer SVD. The snapshot Gram matrix route squares
// the condition number and loses the trailing modes' orthonormality, which
// the POD truncation identity is sensitive to, so the full decomposition is
// used even for tall snapshot matrices.
ThinSvd thin_svd(const Mat& s) {
    if (s.rows() < 1 || s.cols() < 1) throw ConfigError("thin_svd: empty matrix");
    Eigen::BDCSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace dwrom
