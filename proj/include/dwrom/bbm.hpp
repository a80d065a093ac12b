#pragma once

#include <optional>
#include <string>
#include <utility>

#include "dwrom/grid.hpp"
#include "dwrom/overrides.hpp"
#include "dwrom/solvers.hpp"
#include "dwrom/stencils.hpp"
#include "dwrom/time_scheme.hpp"

namespace dwrom {

// Modified BBM-KdV over variable bathymetry. The solver runs in dimensional
// variables; bathy holds the dimensionless product beta*b(x) entering
// c(x) = sqrt(g h0 (1 - beta b)).
struct BbmConfig {
    double h0 = 1.0;    // reference depth (m)
    double g = 9.81;    // gravity (m/s^2)
    double a0 = 0.04;   // wave amplitude (m)
    double p = 0.0;     // dispersion parameter, p <= 1/6
    double cfl = 0.2;
    double t_end = 200.0;
    double d_cip = 1.0;
    Grid1D grid;
    Vec bathy;          // empty means flat bottom

    void validate() const;
};

struct BbmProblem {
    BbmConfig config;
    double dx = 0.0;

    // Per-node dimensional coefficients.
    Vec c;       // sqrt(g hbar)
    Vec gamma;   // advection speed, = c
    Vec delta;   // nonlinearity, (3/2) c0/h0 (uniform)
    Vec omega;   // dispersion, h0^2 c^5 / (6 c0^4)
    Vec nu;      // bathymetry source, (3/2) D c
    double alpha = 0.0;  // (1/6 - p) h0^2

    LinearOperator1D elliptic;   // I - alpha D2
    LinearOperator1D dmat;       // first-derivative matrix (for Theta)
    Vec lift;                    // frozen Dirichlet lift, empty otherwise

    bool dirichlet_left() const { return config.grid.bc == Bc::DirichletLeftLifted; }
    // Energy scalar product Theta = dx (I + alpha D^T D) applied to v.
    Vec theta_apply(const Vec& v) const;
};

struct BbmState {
    Vec eta;
    double t = 0.0;
    long step_index = 0;
};

BbmProblem build_bbm_problem(const BbmConfig& config, Vec lift = Vec());

// Explicit hyperbolic residual (gamma + delta eta) . D eta + nu . eta + J(eta, lambda),
// with lambda_i = gamma_i + delta |eta_i|.
Vec bbm_explicit_rhs(const BbmProblem& p, const Vec& eta);

// Dispersive closure: solve (I - alpha D2) Phi = -omega . (D3 eta).
Vec bbm_phi_solve(const BbmProblem& p, const Vec& eta);

double bbm_dt(const BbmProblem& p, const Vec& eta);

BbmState bbm_step(const BbmProblem& p, const BbmState& s, double dt);

// eta^T Theta eta = dx (|eta|^2 + alpha |D eta|^2).
double bbm_energy(const BbmProblem& p, const Vec& eta);

struct BbmBenchmark {
    BbmConfig config;
    Vec eta0;
};

// monochromatic | undular_bore | solitary_bar
BbmBenchmark bbm_benchmark(const std::string& name,
                           const BenchmarkOverrides& ov = BenchmarkOverrides::none());

// Runs the FOM to t_end; returns the final state. When sample_times is
// nonempty, the states nearest past each sample instant are appended to
// *samples (dof x n columns) together with their times.
BbmState bbm_run(const BbmProblem& p, BbmState state, double t_end,
                 const std::vector<double>& sample_times = {},
                 Mat* samples = nullptr, std::vector<double>* sampled_at = nullptr);

}  // namespace dwrom
