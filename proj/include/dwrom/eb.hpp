#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwrom/grid.hpp"
#include "dwrom/overrides.hpp"
#include "dwrom/solvers.hpp"
#include "dwrom/stencils.hpp"
#include "dwrom/time_scheme.hpp"

namespace dwrom {

struct IwgConfig {
    double x_iwg = 0.0;       // generator center (m)
    double t_gen = 2.525;     // signal period (s)
    double alpha_iwg = 4.0;
    double amplitude = 0.0;   // A_iwg rescaling factor
};

// One absorbing layer; x_s2 sits on the boundary, x_s1 on the inner edge.
struct SpongeConfig {
    double x_s1 = 0.0;
    double x_s2 = 0.0;
    double n1 = 1e-3;
    double n2 = 10.0;
};

// Enhanced Boussinesq (Madsen-Sorensen) system, P1 finite elements.
struct EbConfig {
    double h0 = 1.0;
    double g = 9.81;
    double a0 = 0.2;
    double b2 = 1.0 / 15.0;           // B2
    double b1 = 1.0 / 15.0 + 1.0 / 3.0;  // B1 = B2 + 1/3
    double cfl = 0.5;
    double t_end = 18.0;
    double d_cip = 1.0;
    Grid1D grid;
    Vec bathy;  // bottom elevation bbar(x) in meters; hbar = h0 - bbar > 0
    std::optional<IwgConfig> generator;
    std::vector<SpongeConfig> sponges;

    void validate() const;
    Vec depth_at_rest() const;  // hbar
};

struct EbState {
    Vec eta;
    Vec q;
    double t = 0.0;
};

struct FemMatrices {
    double dx = 0.0;
    Vec hbar;

    LinearOperator1D mass;       // P1 mass, rows dx/6 [1 4 1]
    LinearOperator1D tt;         // discrete T^t (stiffness + gradient part)
    LinearOperator1D tt_grad;    // gradient part alone, kept for inspection
    LinearOperator1D tx1, tx2;   // discrete T^x pieces acting on w = D2 eta
    LinearOperator1D sponge;     // implicit diffusion from the sponge layers
    Vec nu_sponge;               // nodal nu(x)
    Vec f_iwg;                   // generator spatial profile (zero if absent)

    LinearFactor1D mass_f;       // factored once
    LinearFactor1D lhs_psi_f;    // factored (M - T^t)

    // dt-dependent factors, rebuilt when dt changes by > 1e-12 relative.
    mutable double dt_cached = -1.0;
    mutable LinearFactor1D lhs_eta_f, lhs_q_f;

    Vec tx_apply(const Vec& w) const {
        return tx1.apply(w) + tx2.apply(w);
    }
};

FemMatrices assemble_eb_matrices(const EbConfig& config);

// Nonlinear operators including the CIP term, lambda_j = |u_j| + sqrt(g h_j):
//   n_eta = dx D q + J(eta, lambda)
//   n_q   = dx D(q^2/h) + (g/6)[(2h_j+h_{j+1})(eta_{j+1}-eta_j)
//                               + (2h_j+h_{j-1})(eta_j-eta_{j-1})] + J(q, lambda)
struct EbFluxes {
    Vec n_eta;
    Vec n_q;
};
EbFluxes eb_nonlinear_ops(const EbConfig& config, const Vec& eta, const Vec& q);

// Time factor A_iwg sin(2 pi t / T) and spatial profile Gamma exp(-(x-x_iwg)^2/d^2).
std::pair<double, Vec> wave_generator_value(const EbConfig& config, double t);
double wave_generator_amplitude(const EbConfig& config, double t);

struct SolitaryWave {
    Vec eta0;
    Vec q0;
    double celerity = 0.0;
};
SolitaryWave solitary_wave_init(double a0, double h0, double g, const Grid1D& grid,
                                double x_center, double b1, double b2);

double eb_dt(const EbConfig& config, const EbState& s);

EbState eb_step(const EbConfig& config, const FemMatrices& fem, const EbState& s, double dt);

struct EbBenchmark {
    EbConfig config;
    EbState state0;
    double celerity = 0.0;  // solitary cases only
};

// solitary_bar | monochromatic_bar
EbBenchmark eb_benchmark(const std::string& name,
                         const BenchmarkOverrides& ov = BenchmarkOverrides::none());

EbState eb_run(const EbConfig& config, const FemMatrices& fem, EbState state, double t_end,
               const std::vector<double>& sample_times = {},
               Mat* eta_samples = nullptr, Mat* q_samples = nullptr,
               std::vector<double>* sampled_at = nullptr);

}  // namespace dwrom
