#include "dwrom/bbm.hpp"

#include <cmath>

#include "dwrom/perf.hpp"

namespace dwrom {

void BbmConfig::validate() const {
    if (p > 1.0 / 6.0 + 1e-15) throw ConfigError("bbm: p must satisfy p <= 1/6");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("bbm: cfl must lie in (0,1)");
    if (!(h0 > 0.0) || !(g > 0.0)) throw ConfigError("bbm: h0 and g must be positive");
    if (grid.nh < 5) throw ConfigError("bbm: grid too small");
    if (bathy.size() != 0 && bathy.size() != grid.nh)
        throw ConfigError("bbm: bathymetry length mismatch");
    if (t_end < 0.0) throw ConfigError("bbm: negative final time");
}

namespace {

// I - alpha D2 with the grid's boundary closure. Dirichlet-left pins the
// first row so the dispersive correction vanishes where the state is lifted.
LinearOperator1D assemble_elliptic(const Grid1D& grid, double alpha) {
    const int n = grid.nh;
    const double r = alpha / (grid.dx() * grid.dx());
    LinearOperator1D op;
    TriDiagMatrix t = TriDiagMatrix::zero(n);
    for (int i = 0; i < n; ++i) t.diag[i] = 1.0 + 2.0 * r;
    for (int i = 0; i < n - 1; ++i) {
        t.lower[i] = -r;
        t.upper[i] = -r;
    }
    if (grid.periodic()) {
        op.cyclic = true;
        op.cyc = {t, -r, -r};
        return op;
    }
    // ghost folding: v_{-1} = v_0 and v_n = v_{n-1}
    t.diag[0] = 1.0 + r;
    t.diag[n - 1] = 1.0 + r;
    if (grid.bc == Bc::DirichletLeftLifted) {
        t.diag[0] = 1.0;
        t.upper[0] = 0.0;
    }
    op.tri = t;
    return op;
}

}  // namespace

BbmProblem build_bbm_problem(const BbmConfig& config, Vec lift) {
    config.validate();
    BbmProblem p;
    p.config = config;
    p.dx = config.grid.dx();
    const int n = config.grid.nh;
    const double c0 = std::sqrt(config.g * config.h0);

    Vec bathy = config.bathy.size() ? config.bathy : Vec::Zero(n);
    p.c = Vec(n);
    for (int i = 0; i < n; ++i) {
        const double hbar = config.h0 * (1.0 - bathy[i]);
        if (!(hbar > 0.0)) throw ConfigError("bbm: dry node at index " + std::to_string(i));
        p.c[i] = std::sqrt(config.g * hbar);
    }
    p.gamma = p.c;
    p.delta = Vec::Constant(n, 1.5 * c0 / config.h0);
    const double c04 = c0 * c0 * c0 * c0;
    p.omega = Vec(n);
    for (int i = 0; i < n; ++i)
        p.omega[i] = config.h0 * config.h0 * std::pow(p.c[i], 5) / (6.0 * c04);
    p.alpha = (1.0 / 6.0 - config.p) * config.h0 * config.h0;
    p.nu = 1.5 * fd_apply(FdOp::D, p.c, config.grid);

    p.elliptic = assemble_elliptic(config.grid, p.alpha);
    p.dmat = fd_matrix_d(config.grid);

    if (lift.size() != 0) {
        if (lift.size() != n) throw ConfigError("bbm: lift length mismatch");
        p.lift = std::move(lift);
    } else if (p.dirichlet_left()) {
        throw ConfigError("bbm: Dirichlet-left runs need a lift profile");
    }
    return p;
}

Vec BbmProblem::theta_apply(const Vec& v) const {
    return dx * (v + alpha * dmat.apply_transpose(dmat.apply(v)));
}

Vec bbm_explicit_rhs(const BbmProblem& p, const Vec& eta) {
    perf::ScopedTimer timer(perf::Category::Flux);
    const int n = p.config.grid.nh;
    if (eta.size() != n) throw ConfigError("bbm_explicit_rhs: length mismatch");
    const Vec deta = fd_apply(FdOp::D, eta, p.config.grid);
    Vec lambda(n);
    for (int i = 0; i < n; ++i) lambda[i] = p.gamma[i] + p.delta[i] * std::abs(eta[i]);
    Vec rhs = cip_apply(eta, lambda, p.config.d_cip, p.config.grid);
    for (int i = 0; i < n; ++i)
        rhs[i] += (p.gamma[i] + p.delta[i] * eta[i]) * deta[i] + p.nu[i] * eta[i];
    return rhs;
}

Vec bbm_phi_solve(const BbmProblem& p, const Vec& eta) {
    Vec rhs = fd_apply(FdOp::D3, eta, p.config.grid);
    rhs = (-p.omega.array() * rhs.array()).matrix();
    if (p.dirichlet_left()) rhs[0] = 0.0;
    perf::ScopedTimer timer(perf::Category::LinearSolve);
    return p.elliptic.solve(rhs);
}

double bbm_dt(const BbmProblem& p, const Vec& eta) {
    double lmax = 0.0;
    for (int i = 0; i < eta.size(); ++i) {
        const double l = p.gamma[i] + p.delta[i] * std::abs(eta[i]);
        if (!std::isfinite(l)) throw SimulationError("bbm_dt: non-finite wave speed");
        lmax = std::max(lmax, l);
    }
    if (!(lmax > 0.0)) throw SimulationError("bbm_dt: vanishing wave speed");
    return p.config.cfl * p.dx / lmax;
}

namespace {

// Euler substep of the IMEX splitting: Phi solved on the stage input, the
// hyperbolic residual kept explicit. Dirichlet-left pins node 0.
Vec bbm_euler(const BbmProblem& p, const Vec& eta, double dt) {
    Vec rhs = bbm_explicit_rhs(p, eta);
    const Vec phi = bbm_phi_solve(p, eta);
    Vec out = eta + dt * (phi - rhs);
    if (p.dirichlet_left()) out[0] = eta[0];
    return out;
}

}  // namespace

BbmState bbm_step(const BbmProblem& p, const BbmState& s, double dt) {
    if (!(dt > 0.0)) throw ConfigError("bbm_step: dt must be positive");
    static const TimeScheme scheme = ssprk22();
    std::vector<Vec> stages;
    stages.reserve(scheme.stages() + 1);
    stages.push_back(s.eta);
    for (int st = 0; st < scheme.stages(); ++st) {
        // Shu-Osher convex combination of Euler substeps
        Vec acc = Vec::Zero(s.eta.size());
        for (int r = 0; r <= st; ++r) {
            if (scheme.rho[st][r] != 0.0) acc += scheme.rho[st][r] * stages[r];
            if (scheme.theta[st][r] != 0.0)
                acc += scheme.theta[st][r] * (bbm_euler(p, stages[r], dt) - stages[r]);
        }
        stages.push_back(std::move(acc));
    }
    BbmState out;
    out.eta = stages.back();
    out.t = s.t + dt;
    out.step_index = s.step_index + 1;
    if (!out.eta.allFinite())
        throw SimulationError("bbm_step: NaN detected at step " + std::to_string(out.step_index));
    return out;
}

double bbm_energy(const BbmProblem& p, const Vec& eta) {
    const Vec deta = p.dmat.apply(eta);
    return p.dx * (eta.squaredNorm() + p.alpha * deta.squaredNorm());
}

BbmBenchmark bbm_benchmark(const std::string& name, const BenchmarkOverrides& ov) {
    BbmConfig cfg;
    cfg.g = 9.81;
    int nh = ov.nh.value_or(2000);
    Vec eta0;

    if (name == "monochromatic") {
        cfg.h0 = ov.h0.value_or(1.0);
        cfg.a0 = ov.a0.value_or(0.04);
        cfg.cfl = ov.cfl.value_or(0.2);
        cfg.t_end = ov.t_end.value_or(200.0);
        cfg.grid = make_grid(0.0, 20.0 * M_PI, nh, Bc::Periodic);
        eta0 = Vec(nh);
        for (int i = 0; i < nh; ++i) eta0[i] = cfg.a0 * std::cos(cfg.grid.node(i) / 10.0);
    } else if (name == "undular_bore") {
        cfg.h0 = ov.h0.value_or(1.0);
        cfg.a0 = ov.a0.value_or(0.04);
        cfg.cfl = ov.cfl.value_or(0.1);
        cfg.t_end = ov.t_end.value_or(20.0);
        cfg.grid = make_grid(0.0, 20.0 * M_PI, nh, Bc::DirichletLeftLifted);
        eta0 = Vec(nh);
        for (int i = 0; i < nh; ++i) {
            const double x = cfg.grid.node(i);
            eta0[i] = cfg.a0 * (1.0 - 1.0 / (1.0 + std::exp(-4.0 * (x - 5.0))));
        }
    } else if (name == "solitary_bar") {
        cfg.h0 = ov.h0.value_or(1.0);
        cfg.a0 = ov.a0.value_or(0.1);
        cfg.cfl = ov.cfl.value_or(0.1);
        cfg.t_end = ov.t_end.value_or(60.0);
        cfg.grid = make_grid(0.0, 100.0, nh, Bc::Periodic);
        cfg.bathy = Vec(nh);
        for (int i = 0; i < nh; ++i) {
            const double x = cfg.grid.node(i);
            double b = 0.0;
            if (x > 45.0 && x <= 55.0)
                b = (x - 45.0) / 10.0;
            else if (x > 55.0 && x <= 75.0)
                b = 1.0;
            else if (x > 75.0 && x <= 80.0)
                b = -(x - 80.0) / 5.0;
            cfg.bathy[i] = 0.07 * b;
        }
        eta0 = Vec(nh);
        for (int i = 0; i < nh; ++i)
            eta0[i] = cfg.a0 / std::cosh((cfg.grid.node(i) - 22.0) / 5.0);
    } else {
        throw ConfigError("bbm_benchmark: unknown benchmark '" + name + "'");
    }

    cfg.p = ov.p.value_or(0.0);
    cfg.d_cip = ov.d_cip.value_or(1.0);
    return {cfg, eta0};
}

BbmState bbm_run(const BbmProblem& p, BbmState state, double t_end,
                 const std::vector<double>& sample_times, Mat* samples,
                 std::vector<double>* sampled_at) {
    size_t next = 0;
    auto record = [&](const BbmState& s) {
        while (next < sample_times.size() && s.t >= sample_times[next] - 1e-12) {
            if (samples) samples->col(static_cast<int>(next)) = s.eta;
            if (sampled_at) sampled_at->push_back(s.t);
            ++next;
        }
    };
    if (samples) samples->resize(state.eta.size(), static_cast<int>(sample_times.size()));
    record(state);
    while (state.t < t_end - 1e-12) {
        double dt = bbm_dt(p, state.eta);
        // land exactly on the next sample instant and on t_end
        if (next < sample_times.size() && state.t + dt > sample_times[next])
            dt = sample_times[next] - state.t;
        if (state.t + dt > t_end) dt = t_end - state.t;
        state = bbm_step(p, state, dt);
        record(state);
    }
    return state;
}

}  // namespace dwrom
