#include "dwrom/rom.hpp"

#include <cmath>

#include "dwrom/perf.hpp"

namespace dwrom {

void SnapshotSet::append(const SnapshotSet& other) {
    if (states.size() == 0) {
        *this = other;
        return;
    }
    if (states.rows() != other.states.rows()) throw ConfigError("snapshot append: dof mismatch");
    const int c0 = columns(), c1 = other.columns();
    states.conservativeResize(Eigen::NoChange, c0 + c1);
    states.rightCols(c1) = other.states;
    if (fluxes.has_value() != other.fluxes.has_value())
        throw ConfigError("snapshot append: flux presence mismatch");
    if (fluxes) {
        fluxes->conservativeResize(Eigen::NoChange, c0 + c1);
        fluxes->rightCols(c1) = *other.fluxes;
    }
    meta.insert(meta.end(), other.meta.begin(), other.meta.end());
}

int pod_pick_dimension(const Vec& sigma, double tol) {
    const double total = sigma.sum();
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (int n = 0; n < sigma.size(); ++n) {
        acc += sigma[n];
        if (acc / total >= 1.0 - tol) return n + 1;
    }
    return static_cast<int>(sigma.size());
}

ReducedBasis pod_basis(const SnapshotSet& snaps, const PodTruncation& trunc, TestSpaceMode mode,
                       const std::function<Vec(const Vec&)>& theta) {
    if (snaps.columns() == 0) throw ConfigError("pod_basis: empty snapshot set");
    const ThinSvd svd = thin_svd(snaps.states);

    int n_rb;
    if (trunc.n_rb > 0) {
        n_rb = std::min<int>(trunc.n_rb, svd.sigma.size());
    } else {
        if (!(trunc.tol > 0.0 && trunc.tol < 1.0))
            throw ConfigError("pod_basis: tol_pod must lie in (0,1)");
        n_rb = pod_pick_dimension(svd.sigma, trunc.tol);
    }

    ReducedBasis basis;
    basis.v = svd.u.leftCols(n_rb);
    basis.sigma = svd.sigma;
    basis.mode = mode;
    basis.n_rb = n_rb;
    if (mode == TestSpaceMode::Energy) {
        if (!theta) throw ConfigError("pod_basis: energy mode needs a Theta product");
        basis.w = Mat(basis.v.rows(), n_rb);
        for (int j = 0; j < n_rb; ++j) basis.w.col(j) = theta(basis.v.col(j));
    } else {
        basis.w = basis.v;
    }
    return basis;
}

ReducedBasis ReducedBasis::identity(int dof) {
    ReducedBasis b;
    b.v = Mat::Identity(dof, dof);
    b.w = b.v;
    b.sigma = Vec::Ones(dof);
    b.mode = TestSpaceMode::Galerkin;
    b.n_rb = dof;
    return b;
}

// ---------------------------------------------------------------------------
// BBM

ReducedBbmOps build_bbm_reduced(const BbmProblem& p, const ReducedBasis& basis) {
    if (basis.v.rows() != p.config.grid.nh) throw ConfigError("build_bbm_reduced: dof mismatch");
    const int n_rb = basis.n_rb;
    ReducedBbmOps ops;
    ops.a_rb = Mat(n_rb, n_rb);
    for (int j = 0; j < n_rb; ++j) {
        Vec t = fd_apply(FdOp::D3, basis.v.col(j), p.config.grid);
        t = (p.omega.array() * t.array()).matrix();
        if (p.dirichlet_left()) t[0] = 0.0;
        ops.a_rb.col(j) = basis.w.transpose() * p.elliptic.solve(t);
    }
    ops.m_rb = basis.w.transpose() * basis.v;
    ops.m_lu = Eigen::PartialPivLU<Mat>(ops.m_rb);
    {
        const Vec udiag = ops.m_lu.matrixLU().diagonal();
        const double scale = udiag.cwiseAbs().maxCoeff();
        if (scale <= 0.0 || udiag.cwiseAbs().minCoeff() < kPivotTol * scale)
            throw SimulationError("build_bbm_reduced: singular W^T V (degenerate test space)");
    }
    if (p.lift.size() != 0) {
        Vec t = fd_apply(FdOp::D3, p.lift, p.config.grid);
        t = (p.omega.array() * t.array()).matrix();
        if (p.dirichlet_left()) t[0] = 0.0;
        ops.phi_lift = basis.w.transpose() * p.elliptic.solve(t);
    } else {
        ops.phi_lift = Vec::Zero(n_rb);
    }
    return ops;
}

Vec pdrom_bbm_substep(const ReducedBbmOps& ops, const BbmProblem& p, const ReducedBasis& basis,
                      const Vec& eta_hat, double dt) {
    Vec full = basis.v * eta_hat;
    if (p.lift.size() != 0) full += p.lift;
    Vec flux = bbm_explicit_rhs(p, full);
    if (p.dirichlet_left()) flux[0] = 0.0;
    Vec rhs_hat;
    {
        perf::ScopedTimer timer(perf::Category::Flux);
        rhs_hat = basis.w.transpose() * flux;
    }
    Vec phi_hat;
    {
        perf::ScopedTimer timer(perf::Category::LinearSolve);
        phi_hat = -(ops.a_rb * eta_hat) - ops.phi_lift;
        rhs_hat = ops.m_lu.solve(phi_hat - rhs_hat);
    }
    return eta_hat + dt * rhs_hat;
}

namespace {

// Shu-Osher composition of Euler substeps shared by all reduced steppers.
template <typename State, typename Euler>
State shu_osher_compose(const TimeScheme& scheme, const State& s0, double dt, Euler&& euler) {
    std::vector<State> stages{s0};
    for (int st = 0; st < scheme.stages(); ++st) {
        State acc = State::Zero(s0.size());
        for (int r = 0; r <= st; ++r) {
            if (scheme.rho[st][r] != 0.0) acc += scheme.rho[st][r] * stages[r];
            if (scheme.theta[st][r] != 0.0)
                acc += scheme.theta[st][r] * (euler(stages[r], dt) - stages[r]);
        }
        stages.push_back(std::move(acc));
    }
    return stages.back();
}

}  // namespace

Vec pdrom_bbm_step(const ReducedBbmOps& ops, const BbmProblem& p, const ReducedBasis& basis,
                   const Vec& eta_hat, double dt) {
    if (!(dt > 0.0)) throw ConfigError("pdrom_bbm_step: dt must be positive");
    static const TimeScheme scheme = ssprk22();
    Vec out = shu_osher_compose(scheme, eta_hat, dt, [&](const Vec& s, double h) {
        return pdrom_bbm_substep(ops, p, basis, s, h);
    });
    if (!out.allFinite()) throw SimulationError("pdrom_bbm_step: NaN in reduced state");
    return out;
}

PhiOnlyOps build_phi_only(const BbmProblem& p, const ReducedBasis& basis) {
    PhiOnlyOps ops;
    ops.b_rb = Mat(basis.n_rb, basis.n_rb);
    for (int j = 0; j < basis.n_rb; ++j)
        ops.b_rb.col(j) = basis.w.transpose() * p.elliptic.apply(basis.v.col(j));
    ops.b_lu = Eigen::PartialPivLU<Mat>(ops.b_rb);
    return ops;
}

Vec phi_only_step(const PhiOnlyOps& ops, const BbmProblem& p, const ReducedBasis& basis,
                  const Vec& eta_full, double dt) {
    if (!(dt > 0.0)) throw ConfigError("phi_only_step: dt must be positive");
    static const TimeScheme scheme = ssprk22();
    auto euler = [&](const Vec& eta, double h) {
        Vec rhs = bbm_explicit_rhs(p, eta);
        Vec d3 = fd_apply(FdOp::D3, eta, p.config.grid);
        d3 = (p.omega.array() * d3.array()).matrix();
        if (p.dirichlet_left()) d3[0] = 0.0;
        Vec phi_full;
        {
            perf::ScopedTimer timer(perf::Category::LinearSolve);
            const Vec phi_hat = ops.b_lu.solve(basis.w.transpose() * d3);
            phi_full = -(basis.v * phi_hat);
        }
        Vec out = eta + h * (phi_full - rhs);
        if (p.dirichlet_left()) out[0] = eta[0];
        return out;
    };
    Vec out = shu_osher_compose(scheme, eta_full, dt, euler);
    if (!out.allFinite()) throw SimulationError("phi_only_step: NaN in state");
    return out;
}

// ---------------------------------------------------------------------------
// EB

namespace {

Mat project_operator(const LinearOperator1D& op, const Mat& w, const Mat& v) {
    Mat out(w.cols(), v.cols());
    for (int j = 0; j < v.cols(); ++j) out.col(j) = w.transpose() * op.apply(v.col(j));
    return out;
}

void check_invertible(const Eigen::PartialPivLU<Mat>& lu, const char* what) {
    const Vec udiag = lu.matrixLU().diagonal();
    const double scale = udiag.cwiseAbs().maxCoeff();
    if (scale <= 0.0 || udiag.cwiseAbs().minCoeff() < kPivotTol * scale)
        throw SimulationError(std::string("eb reduction: singular ") + what);
}

}  // namespace

ReducedEbOps build_eb_reduced(const EbConfig& config, const FemMatrices& fem,
                              const ReducedBasis& basis_eta, const ReducedBasis& basis_q) {
    if (basis_eta.v.rows() != config.grid.nh || basis_q.v.rows() != config.grid.nh)
        throw ConfigError("build_eb_reduced: dof mismatch");
    ReducedEbOps ops;
    ops.m_eta = project_operator(fem.mass, basis_eta.w, basis_eta.v);
    ops.m_q = project_operator(fem.mass, basis_q.w, basis_q.v);
    ops.tt = project_operator(fem.tt, basis_q.w, basis_q.v);
    ops.s_eta = project_operator(fem.sponge, basis_eta.w, basis_eta.v);
    ops.s_q = project_operator(fem.sponge, basis_q.w, basis_q.v);

    // T^x eta realized as (tx1 + tx2) w with w = D2 eta
    ops.tx = Mat(basis_q.n_rb, basis_eta.n_rb);
    for (int j = 0; j < basis_eta.n_rb; ++j) {
        const Vec w = fd_apply(FdOp::D2, basis_eta.v.col(j), config.grid);
        ops.tx.col(j) = basis_q.w.transpose() * fem.tx_apply(w);
    }

    ops.f_iwg_hat = basis_eta.w.transpose() * fem.f_iwg;

    ops.m_q_lu = Eigen::PartialPivLU<Mat>(ops.m_q);
    check_invertible(ops.m_q_lu, "M_q");
    ops.psi_lu = Eigen::PartialPivLU<Mat>(Mat(ops.m_q - ops.tt));
    check_invertible(ops.psi_lu, "(M_q - T^t)");
    return ops;
}

namespace {

void refresh_reduced_dt(const ReducedEbOps& ops, double dt) {
    if (ops.dt_cached > 0.0 && std::abs(dt - ops.dt_cached) <= 1e-12 * ops.dt_cached) return;
    ops.lhs_eta_lu = Eigen::PartialPivLU<Mat>(Mat(ops.m_eta + dt * ops.s_eta));
    ops.lhs_q_lu = Eigen::PartialPivLU<Mat>(Mat(ops.m_q + dt * ops.s_q));
    ops.lhs_q_fused_lu = Eigen::PartialPivLU<Mat>(Mat(ops.m_q - ops.tt + dt * ops.s_q));
    ops.dt_cached = dt;
}

}  // namespace

EbReducedState eb_reduced_advance(const ReducedEbOps& ops, const EbConfig& config,
                                  const EbReducedState& s, double dt, EbRomVariant variant,
                                  const std::function<EbStageFlux(const Vec&, const Vec&)>& fluxes) {
    static const TimeScheme scheme = ssprk22();
    refresh_reduced_dt(ops, dt);

    std::vector<Vec> eta_st{s.eta_hat}, q_st{s.q_hat};
    std::vector<double> tau{s.t};
    std::vector<EbStageFlux> flux;

    for (int st = 0; st < scheme.stages(); ++st) {
        flux.push_back(fluxes(eta_st[st], q_st[st]));
        const double ts = scheme.stage_time(st, tau, dt);

        Vec acc_eta = Vec::Zero(eta_st[0].size());
        Vec acc_q = Vec::Zero(q_st[0].size());
        double mu_mix = wave_generator_amplitude(config, ts);
        for (int r = 0; r <= st; ++r) {
            if (scheme.rho[st][r] == 0.0) continue;
            acc_eta += scheme.rho[st][r] * eta_st[r];
            acc_q += scheme.rho[st][r] * q_st[r];
            mu_mix -= scheme.rho[st][r] * wave_generator_amplitude(config, tau[r]);
        }

        Vec rhs_eta = ops.m_eta * acc_eta;
        if (mu_mix != 0.0) rhs_eta -= mu_mix * (ops.m_eta * ops.f_iwg_hat);
        Vec rhs_psi = Vec::Zero(q_st[0].size());
        Vec rhs_q_flux = Vec::Zero(q_st[0].size());
        Vec acc_tx = Vec::Zero(q_st[0].size());
        for (int r = 0; r <= st; ++r) {
            const double th = scheme.theta[st][r];
            if (th == 0.0) continue;
            rhs_eta -= dt * th * flux[r].n_eta_hat;
            rhs_q_flux -= dt * th * flux[r].n_q_hat;
            acc_tx += th * (ops.tx * eta_st[r]);
            rhs_psi -= th * (ops.tt * ops.m_q_lu.solve(flux[r].n_q_hat));
        }
        rhs_psi -= acc_tx;

        perf::ScopedTimer timer(perf::Category::LinearSolve);
        Vec eta_s = ops.lhs_eta_lu.solve(rhs_eta);
        Vec q_s;
        if (variant == EbRomVariant::Psi) {
            const Vec psi = ops.psi_lu.solve(rhs_psi);
            q_s = ops.lhs_q_lu.solve(ops.m_q * acc_q + dt * (ops.m_q * psi) + rhs_q_flux);
        } else {
            Vec rhs_q = (ops.m_q - ops.tt) * acc_q + rhs_q_flux - dt * acc_tx;
            q_s = ops.lhs_q_fused_lu.solve(rhs_q);
        }
        eta_st.push_back(std::move(eta_s));
        q_st.push_back(std::move(q_s));
        tau.push_back(ts);
    }

    EbReducedState out;
    out.eta_hat = eta_st.back();
    out.q_hat = q_st.back();
    out.t = s.t + dt;
    if (!out.eta_hat.allFinite() || !out.q_hat.allFinite())
        throw SimulationError("eb reduced step: NaN in reduced state");
    return out;
}

EbReducedState pdrom_eb_step(const ReducedEbOps& ops, const EbConfig& config,
                             const ReducedBasis& basis_eta, const ReducedBasis& basis_q,
                             const EbReducedState& s, double dt, EbRomVariant variant) {
    if (!(dt > 0.0)) throw ConfigError("pdrom_eb_step: dt must be positive");
    auto fluxes = [&](const Vec& eta_hat, const Vec& q_hat) -> EbStageFlux {
        const Vec eta = basis_eta.v * eta_hat;
        const Vec q = basis_q.v * q_hat;
        const EbFluxes f = eb_nonlinear_ops(config, eta, q);
        perf::ScopedTimer timer(perf::Category::Flux);
        return {basis_eta.w.transpose() * f.n_eta, basis_q.w.transpose() * f.n_q};
    };
    return eb_reduced_advance(ops, config, s, dt, variant, fluxes);
}

// ---------------------------------------------------------------------------

double rom_error(const Mat& rom_traj, const Mat& fom_traj, ErrorNorm norm) {
    if (rom_traj.rows() != fom_traj.rows() || rom_traj.cols() != fom_traj.cols())
        throw ConfigError("rom_error: trajectory shape mismatch");
    if (norm == ErrorNorm::L2Final) {
        const double ref = fom_traj.rightCols(1).norm();
        const double diff = (rom_traj.rightCols(1) - fom_traj.rightCols(1)).norm();
        return ref > 0.0 ? diff / ref : diff;
    }
    const double ref = fom_traj.norm();
    const double diff = (rom_traj - fom_traj).norm();
    return ref > 0.0 ? diff / ref : diff;
}

}  // namespace dwrom
