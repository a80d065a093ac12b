#include <doctest.h>

#include <random>

#include "dwrom/eb.hpp"
#include "test_util.hpp"

using namespace dwrom;
using namespace dwrom::testutil;

namespace {

EbConfig flat_config(int nh = 64, Bc bc = Bc::Periodic, double h0 = 1.0) {
    EbConfig cfg;
    cfg.h0 = h0;
    cfg.t_end = 1.0;
    cfg.grid = make_grid(-10.0, 10.0, nh, bc);
    return cfg;
}

}  // namespace

TEST_CASE("assembly degeneracies on constant bathymetry") {
    const EbConfig cfg = flat_config(48);
    const FemMatrices fem = assemble_eb_matrices(cfg);

    CHECK(fem.tt_grad.cyc.core.diag.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tt_grad.cyc.core.lower.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tt_grad.cyc.core.upper.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tx2.cyc.core.diag.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tx2.cyc.core.lower.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tx2.cyc.core.upper.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fem.tx2.cyc.corner_lowleft == 0.0);
    CHECK(fem.tx2.cyc.corner_upright == 0.0);

    // mass rows sum to dx (partition of unity)
    const Vec ones = Vec::Ones(cfg.grid.nh);
    const Vec row_sums = fem.mass.apply(ones);
    for (int i = 0; i < cfg.grid.nh; ++i)
        CHECK(row_sums[i] == doctest::Approx(fem.dx).epsilon(1e-13));

    // no sponges: S identically zero
    CHECK(fem.sponge.apply(Vec::Random(cfg.grid.nh)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sponge assembly follows the printed rows") {
    EbConfig cfg = flat_config(100, Bc::Extrapolated);
    cfg.grid = make_grid(0.0, 10.0, 100, Bc::Extrapolated);
    cfg.sponges = {{8.0, 10.0, 1e-3, 10.0}};
    const FemMatrices fem = assemble_eb_matrices(cfg);
    const Vec& nu = fem.nu_sponge;
    // zero outside, ramping inside toward the boundary
    CHECK(nu[0] == 0.0);
    const int i_in = static_cast<int>(8.2 / cfg.grid.dx());
    const int i_bd = cfg.grid.nh - 1;
    CHECK(nu[i_in] > 0.0);
    CHECK(nu[i_bd] > nu[i_in]);
    CHECK(nu[i_bd] ==
          doctest::Approx(1e-3 * (1.0 - std::exp(10.0)) / (1.0 - std::exp(1.0))).epsilon(1e-12));

    // row structure at an interior sponge node
    const int j = i_in + 3;
    const double dx = fem.dx;
    CHECK(fem.sponge.tri.lower[j - 1] ==
          doctest::Approx(-(nu[j] + nu[j - 1]) / (8.0 * dx)).epsilon(1e-13));
    CHECK(fem.sponge.tri.diag[j] ==
          doctest::Approx((nu[j - 1] + 2 * nu[j] + nu[j + 1]) / (8.0 * dx)).epsilon(1e-13));
    CHECK(fem.sponge.tri.upper[j] ==
          doctest::Approx(-(nu[j] + nu[j + 1]) / (8.0 * dx)).epsilon(1e-13));
}

TEST_CASE("nonlinear operators: lake at rest and the direct-formula oracle") {
    const EbConfig cfg = flat_config(56);
    const int n = cfg.grid.nh;
    const EbFluxes rest = eb_nonlinear_ops(cfg, Vec::Zero(n), Vec::Zero(n));
    CHECK(rest.n_eta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(rest.n_q.cwiseAbs().maxCoeff() == 0.0);

    // constant eta, zero q on a flat bottom: all eta differences vanish
    const EbFluxes c = eb_nonlinear_ops(cfg, Vec::Constant(n, 0.05), Vec::Zero(n));
    CHECK(c.n_q.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(3);
    const Vec eta = random_vec(n, rng, -0.05, 0.05);
    const Vec q = random_vec(n, rng, -0.1, 0.1);
    const EbFluxes got = eb_nonlinear_ops(cfg, eta, q);

    const Vec hb = cfg.depth_at_rest();
    Vec h = hb + eta, lam(n), fq(n);
    for (int i = 0; i < n; ++i) {
        lam[i] = std::abs(q[i] / h[i]) + std::sqrt(cfg.g * h[i]);
        fq[i] = q[i] * q[i] / h[i];
    }
    Vec want_eta(n), want_q(n);
    for (int j = 0; j < n; ++j) {
        const int jp = (j + 1) % n, jm = (j + n - 1) % n;
        want_eta[j] = 0.5 * (q[jp] - q[jm]);
        want_q[j] = 0.5 * (fq[jp] - fq[jm]) +
                    cfg.g / 6.0 * ((2 * h[j] + h[jp]) * (eta[jp] - eta[j]) +
                                   (2 * h[j] + h[jm]) * (eta[j] - eta[jm]));
    }
    want_eta += cip_apply(eta, lam, cfg.d_cip, cfg.grid);
    want_q += cip_apply(q, lam, cfg.d_cip, cfg.grid);
    CHECK(rel_err(got.n_eta, want_eta) < 1e-12);
    CHECK(rel_err(got.n_q, want_q) < 1e-12);

    CHECK_THROWS_AS(eb_nonlinear_ops(cfg, Vec::Constant(n, -2.0), q), SimulationError);
}

TEST_CASE("wave generator: phase and printed amplitude") {
    EbConfig cfg = flat_config(200, Bc::Extrapolated, 0.5);
    cfg.grid = make_grid(0.0, 35.0, 200, Bc::Extrapolated);
    cfg.generator = IwgConfig{10.0, 2.525, 4.0, 0.027};
    CHECK(wave_generator_amplitude(cfg, 0.0) == 0.0);

    const auto [amp, profile] = wave_generator_value(cfg, 0.25 * 2.525);
    CHECK(amp == doctest::Approx(0.027).epsilon(1e-12));  // sin peak

    const double gamma_expect = 0.185 * std::sqrt(9.81 / 0.5) * 2.525;
    CHECK(gamma_expect == doctest::Approx(2.0693).epsilon(1e-4));
    int imax;
    profile.maxCoeff(&imax);
    CHECK(std::abs(cfg.grid.node(imax) - 10.0) <= cfg.grid.dx());
    // nearest node sits a fraction of a cell off the center
    CHECK(profile[imax] == doctest::Approx(gamma_expect).epsilon(2e-3));
}

TEST_CASE("solitary wave: celerity condition, small-amplitude limit, symmetry") {
    const Grid1D g = make_grid(-20.0, 30.0, 1000, Bc::Periodic);
    const SolitaryWave sw = solitary_wave_init(0.2, 1.0, 9.81, g, 5.0, 1.0 / 15 + 1.0 / 3, 1.0 / 15);
    CHECK(sw.celerity * sw.celerity / 9.81 == doctest::Approx(1.2068).epsilon(1e-4));
    CHECK(sw.celerity == doctest::Approx(3.4407).epsilon(1e-4));

    const SolitaryWave tiny =
        solitary_wave_init(1e-6, 1.0, 9.81, g, 5.0, 1.0 / 15 + 1.0 / 3, 1.0 / 15);
    CHECK(tiny.celerity * tiny.celerity / 9.81 == doctest::Approx(1.0).epsilon(1e-5));

    int imax;
    CHECK(sw.eta0.maxCoeff(&imax) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(g.node(imax) == doctest::Approx(5.0));
    const int c = imax;
    for (int k = 1; k < 200; ++k)
        CHECK(sw.eta0[c + k] == doctest::Approx(sw.eta0[c - k]).epsilon(1e-10));
    CHECK(rel_err(sw.q0, Vec(sw.celerity * sw.eta0)) == 0.0);
}

TEST_CASE("cfl time step") {
    EbConfig cfg = flat_config(800, Bc::Periodic, 1.0);
    cfg.grid = make_grid(0.0, 20.0, 800, Bc::Periodic);  // dx = 0.025
    const int n = cfg.grid.nh;
    const EbState rest{Vec::Zero(n), Vec::Zero(n), 0.0};
    CHECK(eb_dt(cfg, rest) == doctest::Approx(3.9910e-3).epsilon(1e-4));

    EbConfig c2 = cfg;
    c2.cfl = 0.25;
    CHECK(eb_dt(c2, rest) == doctest::Approx(0.5 * eb_dt(cfg, rest)).epsilon(1e-13));

    const EbState moving{Vec::Zero(n), Vec::Constant(n, 0.4), 0.0};
    CHECK(eb_dt(cfg, moving) < eb_dt(cfg, rest));
}

TEST_CASE("lake at rest is exactly preserved") {
    EbConfig cfg = flat_config(64);
    // non-flat bathymetry but flat free surface
    cfg.bathy = Vec(64);
    for (int i = 0; i < 64; ++i)
        cfg.bathy[i] = 0.2 * std::exp(-std::pow(cfg.grid.node(i), 2));
    const FemMatrices fem = assemble_eb_matrices(cfg);
    EbState s{Vec::Zero(64), Vec::Zero(64), 0.0};
    for (int k = 0; k < 1000; ++k) s = eb_step(cfg, fem, s, 1e-3);
    CHECK(s.eta.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(s.q.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("mass is conserved on periodic domains") {
    const EbBenchmark bm = eb_benchmark("solitary_bar", [] {
        BenchmarkOverrides ov;
        ov.nh = 1000;  // the a0 = 0.2 soliton needs ~10 cells across its width
        return ov;
    }());
    const FemMatrices fem = assemble_eb_matrices(bm.config);
    EbState s = bm.state0;
    const double m0 = fem.mass.apply(s.eta).sum();
    for (int k = 0; k < 1000; ++k) s = eb_step(bm.config, fem, s, eb_dt(bm.config, s));
    const double m1 = fem.mass.apply(s.eta).sum();
    CHECK(std::abs(m1 - m0) <= 1e-10 * std::max(1.0, std::abs(m0)));
}

TEST_CASE("solitary wave crest tracks the analytic celerity") {
    BenchmarkOverrides ov;
    ov.nh = 1000;
    const EbBenchmark bm = eb_benchmark("solitary_bar", ov);
    const FemMatrices fem = assemble_eb_matrices(bm.config);
    const double t_prop = 1.0;  // stays on the flat part of the domain
    Mat eta;
    eb_run(bm.config, fem, bm.state0, t_prop, {0.0, t_prop}, &eta);
    int i0, i1;
    eta.col(0).maxCoeff(&i0);
    eta.col(1).maxCoeff(&i1);
    const double moved = bm.config.grid.node(i1) - bm.config.grid.node(i0);
    CHECK(std::abs(moved - bm.celerity * t_prop) <= 2 * bm.config.grid.dx());
    // amplitude holds
    CHECK(eta.col(1).maxCoeff() == doctest::Approx(0.2).epsilon(5e-3));
}

TEST_CASE("one-step increment scales linearly with dt") {
    const EbBenchmark bm = eb_benchmark("solitary_bar", [] {
        BenchmarkOverrides ov;
        ov.nh = 400;
        return ov;
    }());
    const FemMatrices fem = assemble_eb_matrices(bm.config);
    const Vec e0 = bm.state0.eta, q0 = bm.state0.q;
    const double inc1 = (eb_step(bm.config, fem, bm.state0, 2e-3).eta - e0).norm();
    const double inc2 = (eb_step(bm.config, fem, bm.state0, 1e-3).eta - e0).norm();
    CHECK(inc1 / inc2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("benchmark catalog values") {
    const EbBenchmark sol = eb_benchmark("solitary_bar");
    CHECK(sol.config.t_end == 18.0);
    CHECK(sol.config.a0 == 0.2);
    CHECK(sol.config.h0 == 1.0);
    CHECK(sol.config.cfl == 0.5);
    CHECK(sol.config.grid.bc == Bc::Periodic);

    const EbBenchmark mono = eb_benchmark("monochromatic_bar");
    CHECK(mono.config.generator.has_value());
    CHECK(mono.config.generator->x_iwg == 10.0);
    CHECK(mono.config.t_end == 40.0);
    CHECK(mono.config.h0 == 0.5);
    REQUIRE(mono.config.sponges.size() == 2);
    CHECK(mono.config.sponges[0].n1 == 1e-3);
    CHECK(mono.config.sponges[0].n2 == 10.0);

    CHECK_THROWS_AS(eb_benchmark("nope"), ConfigError);
}

TEST_CASE("B1 > B2 and dry rest states are rejected") {
    EbConfig cfg = flat_config();
    cfg.b1 = 0.01;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    EbConfig dry = flat_config();
    dry.bathy = Vec::Constant(dry.grid.nh, 1.5);
    CHECK_THROWS_AS(dry.validate(), ConfigError);
}
