#pragma once

#include "dwrom/grid.hpp"
#include "dwrom/solvers.hpp"

namespace dwrom {

enum class FdOp { D, D2, D3 };

// Centered finite-difference operators on the grid:
//   D  : (v_{i+1} - v_{i-1}) / (2 dx)
//   D2 : (v_{i+1} - 2 v_i + v_{i-1}) / dx^2
//   D3 : (v_{i+2} - 2 v_{i+1} + 2 v_{i-1} - v_{i-2}) / (2 dx^3)
// Non-periodic grids extrapolate ghosts with the nearest boundary value.
Vec fd_apply(FdOp which, const Vec& v, const Grid1D& grid);

// Continuous interior penalty dissipation,
//   J(v,lambda)_j = d dx^3 { l_{j+1}(D2 v)_{j+1} - 2 l_j(D2 v)_j + l_{j-1}(D2 v)_{j-1} }.
Vec cip_apply(const Vec& v, const Vec& lambda, double d, const Grid1D& grid);

// First-derivative matrix matching fd_apply(D, .) row by row; used to build
// the energy scalar-product matrix dx (I + alpha D^T D).
LinearOperator1D fd_matrix_d(const Grid1D& grid);

}  // namespace dwrom
