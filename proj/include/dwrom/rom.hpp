#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dwrom/bbm.hpp"
#include "dwrom/eb.hpp"
#include "dwrom/svd.hpp"

namespace dwrom {

struct SnapshotMeta {
    double time = 0.0;
    double h0 = 0.0;
    double a0 = 0.0;
    int run_id = 0;
};

// Juxtaposition of FOM states (and optionally the nonlinear fluxes sampled
// at the same instants), one column per instant.
struct SnapshotSet {
    Mat states;
    std::optional<Mat> fluxes;
    std::vector<SnapshotMeta> meta;

    int columns() const { return static_cast<int>(states.cols()); }
    void append(const SnapshotSet& other);
};

enum class TestSpaceMode { Galerkin, Energy };

struct PodTruncation {
    double tol = -1.0;  // tolerance on the discarded energy, or
    int n_rb = -1;      // a fixed dimension
    static PodTruncation by_tol(double t) { return {t, -1}; }
    static PodTruncation by_n(int n) { return {-1.0, n}; }
};

struct ReducedBasis {
    Mat v;        // dof x n_rb, orthonormal
    Mat w;        // test matrix; Theta V in energy mode, V in Galerkin mode
    Vec sigma;    // all singular values, retained + discarded
    TestSpaceMode mode = TestSpaceMode::Galerkin;
    int n_rb = 0;

    static ReducedBasis identity(int dof);
};

// Retains the smallest N with sum_{i<=N} sigma_i / sum sigma_i >= 1 - tol.
ReducedBasis pod_basis(const SnapshotSet& snaps, const PodTruncation& trunc,
                       TestSpaceMode mode,
                       const std::function<Vec(const Vec&)>& theta = {});
int pod_pick_dimension(const Vec& sigma, double tol);

// ---------------------------------------------------------------------------
// BBM reduction

struct ReducedBbmOps {
    Mat a_rb;     // W^T (I - alpha D2)^{-1} diag(omega) D3 V
    Mat m_rb;     // W^T V
    Eigen::PartialPivLU<Mat> m_lu;
    Vec phi_lift;  // W^T (I - alpha D2)^{-1} (omega . D3 lift), zero without lift
};

ReducedBbmOps build_bbm_reduced(const BbmProblem& p, const ReducedBasis& basis);

// One explicit Euler substep of the pdROM update; bbm steppers compose these
// through the Shu-Osher coefficients.
Vec pdrom_bbm_substep(const ReducedBbmOps& ops, const BbmProblem& p,
                      const ReducedBasis& basis, const Vec& eta_hat, double dt);
Vec pdrom_bbm_step(const ReducedBbmOps& ops, const BbmProblem& p,
                   const ReducedBasis& basis, const Vec& eta_hat, double dt);

// Phi-only variant: full-space hyperbolic update, reduced dispersive closure.
struct PhiOnlyOps {
    Mat b_rb;  // W^T (I - alpha D2) V
    Eigen::PartialPivLU<Mat> b_lu;
};
PhiOnlyOps build_phi_only(const BbmProblem& p, const ReducedBasis& basis);
Vec phi_only_step(const PhiOnlyOps& ops, const BbmProblem& p,
                  const ReducedBasis& basis, const Vec& eta_full, double dt);

// ---------------------------------------------------------------------------
// EB reduction

enum class EbRomVariant { Psi, Fused };

struct ReducedEbOps {
    Mat m_eta, m_q, tt, tx, s_eta, s_q;
    Vec f_iwg_hat;
    Eigen::PartialPivLU<Mat> m_q_lu;   // for T^t M^{-1} N^q
    Eigen::PartialPivLU<Mat> psi_lu;   // M^q - T^t

    mutable double dt_cached = -1.0;
    mutable Eigen::PartialPivLU<Mat> lhs_eta_lu, lhs_q_lu, lhs_q_fused_lu;
};

struct EbReducedState {
    Vec eta_hat;
    Vec q_hat;
    double t = 0.0;
};

ReducedEbOps build_eb_reduced(const EbConfig& config, const FemMatrices& fem,
                              const ReducedBasis& basis_eta, const ReducedBasis& basis_q);

EbReducedState pdrom_eb_step(const ReducedEbOps& ops, const EbConfig& config,
                             const ReducedBasis& basis_eta, const ReducedBasis& basis_q,
                             const EbReducedState& s, double dt,
                             EbRomVariant variant = EbRomVariant::Psi);

// Stage driver shared by the pdROM and EIMROM steppers; the two differ only
// in how the projected stage fluxes are produced.
struct EbStageFlux {
    Vec n_eta_hat;
    Vec n_q_hat;
};
EbReducedState eb_reduced_advance(const ReducedEbOps& ops, const EbConfig& config,
                                  const EbReducedState& s, double dt, EbRomVariant variant,
                                  const std::function<EbStageFlux(const Vec&, const Vec&)>& fluxes);

// ---------------------------------------------------------------------------

enum class ErrorNorm { L2Final, L2TimeAvg };

// Relative L2 norm of the reconstructed difference between two trajectories
// sampled at matching instants (one column per instant).
double rom_error(const Mat& rom_traj, const Mat& fom_traj, ErrorNorm norm);

}  // namespace dwrom
