#include "dwrom/solvers.hpp"

#include <cmath>

namespace dwrom {

TriDiagMatrix TriDiagMatrix::zero(int n) {
    return {Vec::Zero(n - 1), Vec::Zero(n), Vec::Zero(n - 1)};
}

TriDiagMatrix TriDiagMatrix::identity(int n) {
    return {Vec::Zero(n - 1), Vec::Ones(n), Vec::Zero(n - 1)};
}

static void check_square(const TriDiagMatrix& m) {
    const int n = m.n();
    if (m.lower.size() != n - 1 || m.upper.size() != n - 1)
        throw ConfigError("tridiagonal bands have inconsistent lengths");
}

Vec tridiag_apply(const TriDiagMatrix& m, const Vec& v) {
    const int n = m.n();
    if (v.size() != n) throw ConfigError("tridiag_apply: length mismatch");
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = m.diag[i] * v[i];
        if (i > 0) s += m.lower[i - 1] * v[i - 1];
        if (i < n - 1) s += m.upper[i] * v[i + 1];
        y[i] = s;
    }
    return y;
}

Vec tridiag_apply_transpose(const TriDiagMatrix& m, const Vec& v) {
    TriDiagMatrix t{m.upper, m.diag, m.lower};
    return tridiag_apply(t, v);
}

Vec cyclic_apply(const CyclicTriDiagMatrix& m, const Vec& v) {
    Vec y = tridiag_apply(m.core, v);
    const int n = m.n();
    y[0] += m.corner_upright * v[n - 1];
    y[n - 1] += m.corner_lowleft * v[0];
    return y;
}

Vec cyclic_apply_transpose(const CyclicTriDiagMatrix& m, const Vec& v) {
    CyclicTriDiagMatrix t{{m.core.upper, m.core.diag, m.core.lower},
                          m.corner_upright, m.corner_lowleft};
    return cyclic_apply(t, v);
}

Mat tridiag_dense(const TriDiagMatrix& m) {
    const int n = m.n();
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = m.diag[i];
        if (i > 0) a(i, i - 1) = m.lower[i - 1];
        if (i < n - 1) a(i, i + 1) = m.upper[i];
    }
    return a;
}

Mat cyclic_dense(const CyclicTriDiagMatrix& m) {
    Mat a = tridiag_dense(m.core);
    const int n = m.n();
    a(0, n - 1) += m.corner_upright;
    a(n - 1, 0) += m.corner_lowleft;
    return a;
}

Vec thomas_solve(const TriDiagMatrix& m, const Vec& rhs) {
    check_square(m);
    const int n = m.n();
    if (rhs.size() != n) throw ConfigError("thomas_solve: rhs length mismatch");

    Vec cp(n - 1), dp(n);
    double pivot = m.diag[0];
    if (std::abs(pivot) < kPivotTol) throw SingularMatrixError("thomas_solve: zero pivot at row 0");
    if (n > 1) cp[0] = m.upper[0] / pivot;
    dp[0] = rhs[0] / pivot;
    for (int i = 1; i < n; ++i) {
        pivot = m.diag[i] - m.lower[i - 1] * cp[i - 1];
        if (std::abs(pivot) < kPivotTol)
            throw SingularMatrixError("thomas_solve: zero pivot at row " + std::to_string(i));
        if (i < n - 1) cp[i] = m.upper[i] / pivot;
        dp[i] = (rhs[i] - m.lower[i - 1] * dp[i - 1]) / pivot;
    }
    for (int i = n - 2; i >= 0; --i) dp[i] -= cp[i] * dp[i + 1];
    return dp;
}

Vec cyclic_solve(const CyclicTriDiagMatrix& m, const Vec& rhs) {
    const int n = m.n();
    if (n < 3) throw ConfigError("cyclic_solve needs n >= 3");
    if (m.corner_lowleft == 0.0 && m.corner_upright == 0.0) return thomas_solve(m.core, rhs);

    // Rank-one splitting A = T + u v^T with u = (g, 0,..., 0, cl)^T and
    // v = (1, 0,..., 0, cu/g)^T; T absorbs -g and -cl*cu/g on the diagonal.
    const double cl = m.corner_lowleft;
    const double cu = m.corner_upright;
    const double gval = -m.core.diag[0];
    if (std::abs(gval) < kPivotTol) throw SingularMatrixError("cyclic_solve: degenerate splitting");

    TriDiagMatrix t = m.core;
    t.diag[0] -= gval;
    t.diag[n - 1] -= cl * cu / gval;

    Vec u = Vec::Zero(n);
    u[0] = gval;
    u[n - 1] = cl;

    Vec y = thomas_solve(t, rhs);
    Vec z = thomas_solve(t, u);

    const double vy = y[0] + (cu / gval) * y[n - 1];
    const double vz = z[0] + (cu / gval) * z[n - 1];
    const double denom = 1.0 + vz;
    if (std::abs(denom) < kPivotTol)
        throw SingularMatrixError("cyclic_solve: degenerate Sherman-Morrison denominator");
    return y - (vy / denom) * z;
}

Vec dense_solve(const Mat& a, const Vec& rhs) {
    if (a.rows() != a.cols()) throw ConfigError("dense_solve: matrix not square");
    if (a.rows() != rhs.size()) throw ConfigError("dense_solve: rhs length mismatch");
    Eigen::PartialPivLU<Mat> lu(a);
    const Vec udiag = lu.matrixLU().diagonal();
    const double scale = udiag.cwiseAbs().maxCoeff();
    if (scale <= 0.0 || udiag.cwiseAbs().minCoeff() < kPivotTol * scale)
        throw SingularMatrixError("dense_solve: zero pivot after pivoting");
    return lu.solve(rhs);
}

TriDiagFactor tridiag_factorize(const TriDiagMatrix& m) {
    check_square(m);
    const int n = m.n();
    TriDiagFactor f;
    f.low = Vec::Zero(std::max(n - 1, 0));
    f.diag = Vec(n);
    f.upper = m.upper;
    f.diag[0] = m.diag[0];
    if (std::abs(f.diag[0]) < kPivotTol) throw SingularMatrixError("factorize: zero pivot at row 0");
    for (int i = 1; i < n; ++i) {
        f.low[i - 1] = m.lower[i - 1] / f.diag[i - 1];
        f.diag[i] = m.diag[i] - f.low[i - 1] * m.upper[i - 1];
        if (std::abs(f.diag[i]) < kPivotTol)
            throw SingularMatrixError("factorize: zero pivot at row " + std::to_string(i));
    }
    return f;
}

Vec TriDiagFactor::solve(const Vec& rhs) const {
    const int n = static_cast<int>(diag.size());
    Vec x(n);
    x[0] = rhs[0];
    for (int i = 1; i < n; ++i) x[i] = rhs[i] - low[i - 1] * x[i - 1];
    x[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

CyclicTriDiagFactor cyclic_factorize(const CyclicTriDiagMatrix& m) {
    const int n = m.n();
    CyclicTriDiagFactor f;
    if (m.corner_lowleft == 0.0 && m.corner_upright == 0.0) {
        f.plain = true;
        f.base = tridiag_factorize(m.core);
        return f;
    }
    f.plain = false;
    const double cl = m.corner_lowleft;
    const double cu = m.corner_upright;
    const double gval = -m.core.diag[0];
    if (std::abs(gval) < kPivotTol) throw SingularMatrixError("cyclic_factorize: degenerate splitting");

    TriDiagMatrix t = m.core;
    t.diag[0] -= gval;
    t.diag[n - 1] -= cl * cu / gval;
    f.base = tridiag_factorize(t);

    Vec u = Vec::Zero(n);
    u[0] = gval;
    u[n - 1] = cl;
    f.z = f.base.solve(u);
    f.v_first = 1.0;
    f.v_last = cu / gval;
    f.denom = 1.0 + f.v_first * f.z[0] + f.v_last * f.z[n - 1];
    if (std::abs(f.denom) < kPivotTol)
        throw SingularMatrixError("cyclic_factorize: degenerate Sherman-Morrison denominator");
    return f;
}

Vec CyclicTriDiagFactor::solve(const Vec& rhs) const {
    Vec y = base.solve(rhs);
    if (plain) return y;
    const int n = static_cast<int>(y.size());
    const double vy = v_first * y[0] + v_last * y[n - 1];
    return y - (vy / denom) * z;
}

LinearFactor1D factorize(const LinearOperator1D& op) {
    LinearFactor1D f;
    f.cyclic = op.cyclic;
    if (op.cyclic)
        f.cyc = cyclic_factorize(op.cyc);
    else
        f.tri = tridiag_factorize(op.tri);
    return f;
}

}  // namespace dwrom
