#include "dwrom/stencils.hpp"

namespace dwrom {

namespace {

// Index with periodic wrap or clamped to the boundary node (constant
// extrapolation of the nearest interior value).
inline int nbr(int i, int off, int n, bool periodic) {
    int j = i + off;
    if (periodic) {
        j %= n;
        if (j < 0) j += n;
        return j;
    }
    if (j < 0) return 0;
    if (j > n - 1) return n - 1;
    return j;
}

}  // namespace

Vec fd_apply(FdOp which, const Vec& v, const Grid1D& grid) {
    const int n = grid.nh;
    if (v.size() != n) throw ConfigError("fd_apply: length mismatch");
    const bool per = grid.periodic();
    const double dx = grid.dx();
    Vec y(n);
    switch (which) {
        case FdOp::D: {
            const double c = 1.0 / (2.0 * dx);
            for (int i = 0; i < n; ++i)
                y[i] = c * (v[nbr(i, 1, n, per)] - v[nbr(i, -1, n, per)]);
            break;
        }
        case FdOp::D2: {
            const double c = 1.0 / (dx * dx);
            for (int i = 0; i < n; ++i)
                y[i] = c * (v[nbr(i, 1, n, per)] - 2.0 * v[i] + v[nbr(i, -1, n, per)]);
            break;
        }
        case FdOp::D3: {
            const double c = 1.0 / (2.0 * dx * dx * dx);
            for (int i = 0; i < n; ++i)
                y[i] = c * (v[nbr(i, 2, n, per)] - 2.0 * v[nbr(i, 1, n, per)] +
                            2.0 * v[nbr(i, -1, n, per)] - v[nbr(i, -2, n, per)]);
            break;
        }
    }
    return y;
}

Vec cip_apply(const Vec& v, const Vec& lambda, double d, const Grid1D& grid) {
    const int n = grid.nh;
    if (v.size() != n || lambda.size() != n) throw ConfigError("cip_apply: length mismatch");
    if (d == 0.0) return Vec::Zero(n);
    const bool per = grid.periodic();
    const double dx = grid.dx();
    const Vec d2v = fd_apply(FdOp::D2, v, grid);
    Vec y(n);
    const double c = d * dx * dx * dx;
    for (int j = 0; j < n; ++j) {
        const int jp = nbr(j, 1, n, per), jm = nbr(j, -1, n, per);
        y[j] = c * (lambda[jp] * d2v[jp] - 2.0 * lambda[j] * d2v[j] + lambda[jm] * d2v[jm]);
    }
    return y;
}

LinearOperator1D fd_matrix_d(const Grid1D& grid) {
    const int n = grid.nh;
    const double c = 1.0 / (2.0 * grid.dx());
    LinearOperator1D op;
    op.cyclic = grid.periodic();
    TriDiagMatrix t = TriDiagMatrix::zero(n);
    for (int i = 0; i < n - 1; ++i) {
        t.upper[i] = c;
        t.lower[i] = -c;
    }
    if (op.cyclic) {
        // row n-1 couples to node 0 with +c, row 0 to node n-1 with -c
        op.cyc = {t, c, -c};
    } else {
        // Ghosts clamp to the boundary node: the one-sided rows keep the
        // centered 1/(2 dx) scale.
        t.diag[0] = -c;
        t.upper[0] = c;
        t.diag[n - 1] = c;
        t.lower[n - 2] = -c;
        op.tri = t;
    }
    return op;
}

}  // namespace dwrom
