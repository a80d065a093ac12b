#pragma once

#include "dwrom/common.hpp"

namespace dwrom {

// Minimum pivot magnitude accepted during elimination (100x double epsilon).
inline constexpr double kPivotTol = 1e-14;

struct TriDiagMatrix {
    Vec lower;  // length n-1
    Vec diag;   // length n
    Vec upper;  // length n-1

    int n() const { return static_cast<int>(diag.size()); }
    static TriDiagMatrix zero(int n);
    static TriDiagMatrix identity(int n);
};

// Periodic closure of a 3-point stencil: core tridiagonal plus the two
// wrap-around couplings A(n-1,0) and A(0,n-1).
struct CyclicTriDiagMatrix {
    TriDiagMatrix core;
    double corner_lowleft = 0.0;
    double corner_upright = 0.0;

    int n() const { return core.n(); }
};

Vec tridiag_apply(const TriDiagMatrix& m, const Vec& v);
Vec tridiag_apply_transpose(const TriDiagMatrix& m, const Vec& v);
Vec cyclic_apply(const CyclicTriDiagMatrix& m, const Vec& v);
Vec cyclic_apply_transpose(const CyclicTriDiagMatrix& m, const Vec& v);
Mat tridiag_dense(const TriDiagMatrix& m);
Mat cyclic_dense(const CyclicTriDiagMatrix& m);

// Classical Thomas algorithm, elimination and back substitution in one sweep.
Vec thomas_solve(const TriDiagMatrix& m, const Vec& rhs);

// Periodic system via a rank-one Sherman-Morrison correction over Thomas.
Vec cyclic_solve(const CyclicTriDiagMatrix& m, const Vec& rhs);

// Partial-pivot elimination for the small dense reduced systems.
Vec dense_solve(const Mat& a, const Vec& rhs);

// Cached forward elimination of a tridiagonal matrix; solves then cost two
// substitution sweeps. Used where a LHS is reused across many steps.
struct TriDiagFactor {
    Vec low;     // eliminated sub-diagonal multipliers
    Vec diag;    // pivots
    Vec upper;
    Vec solve(const Vec& rhs) const;
};

struct CyclicTriDiagFactor {
    TriDiagFactor base;
    Vec z;              // base^{-1} u for the Sherman-Morrison update
    double v_first = 0.0, v_last = 0.0;
    double denom = 1.0;  // 1 + v^T z
    bool plain = true;   // both corners zero: no correction needed
    Vec solve(const Vec& rhs) const;
};

TriDiagFactor tridiag_factorize(const TriDiagMatrix& m);
CyclicTriDiagFactor cyclic_factorize(const CyclicTriDiagMatrix& m);

// Either closure of the same operator, picked by the grid's boundary mode.
struct LinearOperator1D {
    bool cyclic = false;
    TriDiagMatrix tri;
    CyclicTriDiagMatrix cyc;

    int n() const { return cyclic ? cyc.n() : tri.n(); }
    Vec apply(const Vec& v) const { return cyclic ? cyclic_apply(cyc, v) : tridiag_apply(tri, v); }
    Vec apply_transpose(const Vec& v) const {
        return cyclic ? cyclic_apply_transpose(cyc, v) : tridiag_apply_transpose(tri, v);
    }
    Vec solve(const Vec& rhs) const { return cyclic ? cyclic_solve(cyc, rhs) : thomas_solve(tri, rhs); }
    Mat dense() const { return cyclic ? cyclic_dense(cyc) : tridiag_dense(tri); }
};

struct LinearFactor1D {
    bool cyclic = false;
    TriDiagFactor tri;
    CyclicTriDiagFactor cyc;
    Vec solve(const Vec& rhs) const { return cyclic ? cyc.solve(rhs) : tri.solve(rhs); }
};

LinearFactor1D factorize(const LinearOperator1D& op);

}  // namespace dwrom
