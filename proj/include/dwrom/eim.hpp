#pragma once

#include <array>
#include <vector>

#include "dwrom/rom.hpp"

namespace dwrom {

// Greedy empirical interpolation over nonlinear-flux snapshots. The basis is
// stored in cardinal (Lagrange) form, psi_j(z_i) = delta_ij, so evaluation is
// a single matrix-vector product with the flux sampled at the magic points.
struct EimSpace {
    std::vector<int> z;                        // magic-point node indices
    Mat psi;                                   // dof x n_eim cardinal basis
    Mat b;                                     // W^T Psi, set via eim_set_projection
    std::vector<std::array<int, 5>> stencils;  // nodes j-2..j+2 per magic point
    double tol = 0.0;
    std::vector<double> history;               // max training residual per pass
    bool tol_reached = true;                   // false: snapshots exhausted first

    int n_eim() const { return static_cast<int>(z.size()); }
};

EimSpace eim_greedy(const Mat& flux_snapshots, double tol_eim, const Grid1D& grid);

void eim_set_projection(EimSpace& space, const Mat& w);

// b . flux_at_z. flux_at_z must carry one value per magic point.
Vec eim_reduced_flux(const EimSpace& space, const Vec& flux_at_z);

// Pointwise flux evaluations on a 5-node stencil (values ordered j-2..j+2).
double bbm_flux_at(const BbmProblem& p, int node, const std::array<double, 5>& eta);
struct EbPointFlux {
    double n_eta;
    double n_q;
};
EbPointFlux eb_flux_at(const EbConfig& config, const Vec& hbar, int node,
                       const std::array<double, 5>& eta, const std::array<double, 5>& q);

// Reconstruct V eta_hat (+ lift) on the stencils of `space` only.
std::array<double, 5> reconstruct_stencil(const EimSpace& space, int point_index,
                                          const Mat& v, const Vec& coeff, const Vec& lift);

// pdROM update with every projected flux replaced by magic-point interpolation.
Vec eimrom_bbm_step(const ReducedBbmOps& ops, const EimSpace& space, const BbmProblem& p,
                    const ReducedBasis& basis, const Vec& eta_hat, double dt);

EbReducedState eimrom_eb_step(const ReducedEbOps& ops, const EimSpace& space_eta,
                              const EimSpace& space_q, const EbConfig& config,
                              const FemMatrices& fem, const ReducedBasis& basis_eta,
                              const ReducedBasis& basis_q, const EbReducedState& s, double dt,
                              EbRomVariant variant = EbRomVariant::Psi);

}  // namespace dwrom
