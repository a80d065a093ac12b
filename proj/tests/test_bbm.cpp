#include <doctest.h>

#include <random>

#include "dwrom/bbm.hpp"
#include "test_util.hpp"

using namespace dwrom;
using namespace dwrom::testutil;

namespace {

BbmProblem small_problem(int nh = 64, Bc bc = Bc::Periodic, double p = 0.0) {
    BbmConfig cfg;
    cfg.h0 = 1.0;
    cfg.g = 9.81;
    cfg.a0 = 0.04;
    cfg.p = p;
    cfg.cfl = 0.2;
    cfg.t_end = 1.0;
    cfg.grid = make_grid(0.0, 20.0 * M_PI, nh, bc);
    if (bc == Bc::DirichletLeftLifted) {
        Vec lift(nh);
        for (int i = 0; i < nh; ++i)
            lift[i] = cfg.a0 * (1.0 - 1.0 / (1.0 + std::exp(-4.0 * (cfg.grid.node(i) - 5.0))));
        return build_bbm_problem(cfg, lift);
    }
    return build_bbm_problem(cfg);
}

}  // namespace

TEST_CASE("coefficients on a flat bottom") {
    const BbmProblem p = small_problem();
    for (int i = 0; i < p.config.grid.nh; ++i) {
        CHECK(p.gamma[i] == doctest::Approx(std::sqrt(9.81)).epsilon(1e-14));
        CHECK(p.nu[i] == 0.0);
        CHECK(p.omega[i] == doctest::Approx(std::sqrt(9.81) / 6.0).epsilon(1e-13));
        CHECK(p.delta[i] == doctest::Approx(1.5 * std::sqrt(9.81)).epsilon(1e-14));
    }
    CHECK(p.alpha == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("p = 1/6 gives an identity elliptic operator and Theta = dx I") {
    const BbmProblem p = small_problem(64, Bc::Periodic, 1.0 / 6.0);
    CHECK(p.alpha == 0.0);
    std::mt19937_64 rng(3);
    const Vec v = random_vec(64, rng);
    CHECK(rel_err(p.elliptic.apply(v), v) == 0.0);
    CHECK(rel_err(p.theta_apply(v), Vec(p.dx * v)) < 1e-15);
}

TEST_CASE("constant nonzero bathymetry still has nu = 0") {
    BbmConfig cfg;
    cfg.grid = make_grid(0.0, 10.0, 32, Bc::Periodic);
    cfg.bathy = Vec::Constant(32, 0.3);
    cfg.t_end = 1.0;
    const BbmProblem p = build_bbm_problem(cfg);
    CHECK(p.nu.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.gamma[0] == doctest::Approx(std::sqrt(9.81 * 0.7)).epsilon(1e-14));

    cfg.bathy = Vec::Constant(32, 1.1);  // dry
    CHECK_THROWS_AS(build_bbm_problem(cfg), ConfigError);
}

TEST_CASE("explicit rhs: fixed points and the term-by-term oracle") {
    const BbmProblem p = small_problem();
    const int n = p.config.grid.nh;
    CHECK(bbm_explicit_rhs(p, Vec::Zero(n)).cwiseAbs().maxCoeff() == 0.0);
    // constant state on a flat periodic bottom: D eta = 0, nu = 0, CIP of const = 0
    CHECK(bbm_explicit_rhs(p, Vec::Constant(n, 0.02)).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(7);
    const Vec eta = random_vec(n, rng, -0.05, 0.05);
    const Vec got = bbm_explicit_rhs(p, eta);
    // independent assembly
    const Vec deta = fd_apply(FdOp::D, eta, p.config.grid);
    Vec lam(n);
    for (int i = 0; i < n; ++i) lam[i] = p.gamma[i] + p.delta[i] * std::abs(eta[i]);
    const Vec want = ((p.gamma.array() + p.delta.array() * eta.array()) * deta.array() +
                      p.nu.array() * eta.array()).matrix() +
                     cip_apply(eta, lam, p.config.d_cip, p.config.grid);
    CHECK(rel_err(got, want) < 1e-12);
}

TEST_CASE("phi solve: constants, p = 1/6 shortcut, dense oracle") {
    const BbmProblem p = small_problem();
    const int n = p.config.grid.nh;
    CHECK(bbm_phi_solve(p, Vec::Constant(n, 0.5)).cwiseAbs().maxCoeff() < 1e-14);

    const BbmProblem pk = small_problem(64, Bc::Periodic, 1.0 / 6.0);
    std::mt19937_64 rng(13);
    const Vec eta = random_vec(n, rng);
    const Vec direct = -(pk.omega.array() * fd_apply(FdOp::D3, eta, pk.config.grid).array());
    CHECK(rel_err(bbm_phi_solve(pk, eta), direct) < 1e-13);

    const Vec rhs = -(p.omega.array() * fd_apply(FdOp::D3, eta, p.config.grid).array());
    const Vec dense = p.elliptic.dense().fullPivLu().solve(rhs);
    CHECK(rel_err(bbm_phi_solve(p, eta), dense) < 1e-11);
}

TEST_CASE("cfl time step") {
    const BbmBenchmark bm = bbm_benchmark("monochromatic");
    const BbmProblem p = build_bbm_problem(bm.config);
    const int n = p.config.grid.nh;
    // test 1 parameters at eta = 0
    CHECK(bbm_dt(p, Vec::Zero(n)) == doctest::Approx(2.0061e-3).epsilon(1e-4));

    BbmConfig c2 = bm.config;
    c2.cfl = 0.4;
    const BbmProblem p2 = build_bbm_problem(c2);
    CHECK(bbm_dt(p2, Vec::Zero(n)) == doctest::Approx(2.0 * bbm_dt(p, Vec::Zero(n))));

    const double dt_small = bbm_dt(p, bm.eta0);
    const double dt_big = bbm_dt(p, Vec(3.0 * bm.eta0));
    CHECK(dt_big < dt_small);
}

TEST_CASE("step: zero fixed point, first-order increment, Shu-Osher composition oracle") {
    const BbmProblem p = small_problem(128);
    const int n = p.config.grid.nh;

    BbmState s{Vec::Zero(n), 0.0, 0};
    for (int k = 0; k < 5; ++k) s = bbm_step(p, s, 1e-3);
    CHECK(s.eta.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(19);
    Vec eta = random_vec(n, rng, -0.02, 0.02);
    const BbmState s0{eta, 0.0, 0};
    const double inc1 = (bbm_step(p, s0, 2e-3).eta - eta).norm();
    const double inc2 = (bbm_step(p, s0, 1e-3).eta - eta).norm();
    CHECK(inc1 / inc2 == doctest::Approx(2.0).epsilon(0.05));

    // hand-rolled composition: u1 = E(u0), u2 = (u0 + E(u1))/2
    auto euler = [&](const Vec& u, double dt) {
        return Vec(u + dt * (bbm_phi_solve(p, u) - bbm_explicit_rhs(p, u)));
    };
    const double dt = 1.5e-3;
    const Vec u1 = euler(eta, dt);
    const Vec u2 = 0.5 * eta + 0.5 * euler(u1, dt);
    CHECK(rel_err(bbm_step(p, s0, dt).eta, u2) < 1e-13);
}

TEST_CASE("energy: constants and the quadrature oracle") {
    const BbmProblem p = small_problem(200);
    const int n = p.config.grid.nh;
    CHECK(bbm_energy(p, Vec::Ones(n)) == doctest::Approx(p.dx * n).epsilon(1e-13));
    CHECK(bbm_energy(p, Vec::Zero(n)) == 0.0);

    std::mt19937_64 rng(23);
    const Vec eta = random_vec(n, rng);
    const Vec deta = p.dmat.apply(eta);
    double want = 0.0;
    for (int i = 0; i < n; ++i) want += p.dx * (eta[i] * eta[i] + p.alpha * deta[i] * deta[i]);
    CHECK(bbm_energy(p, eta) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("benchmark catalog values") {
    const BbmBenchmark mono = bbm_benchmark("monochromatic");
    CHECK(mono.config.a0 == 0.04);
    CHECK(mono.config.t_end == 200.0);
    CHECK(mono.config.grid.nh == 2000);
    CHECK(mono.config.cfl == 0.2);

    const BbmBenchmark bore = bbm_benchmark("undular_bore");
    CHECK(bore.config.cfl == 0.1);
    CHECK(bore.config.t_end == 20.0);
    CHECK(bore.config.grid.bc == Bc::DirichletLeftLifted);

    BenchmarkOverrides ov;
    ov.nh = 1000;
    const BbmBenchmark bar = bbm_benchmark("solitary_bar", ov);
    const Grid1D& g = bar.config.grid;
    auto bathy_at = [&](double x) {
        const int i = static_cast<int>(std::lround((x - g.x0) / g.dx()));
        return bar.config.bathy[i];
    };
    CHECK(bathy_at(55.0) == doctest::Approx(0.07));
    CHECK(bathy_at(44.0) == 0.0);
    CHECK(bar.config.a0 == 0.1);

    CHECK_THROWS_AS(bbm_benchmark("nope"), ConfigError);
}

TEST_CASE("translation equivariance on a flat periodic bottom") {
    const BbmProblem p = small_problem(100);
    const int n = p.config.grid.nh;
    Vec eta(n);
    for (int i = 0; i < n; ++i) eta[i] = 0.04 * std::cos(p.config.grid.node(i) / 10.0);
    const int shift = 7;
    Vec eta_sh(n);
    for (int i = 0; i < n; ++i) eta_sh[(i + shift) % n] = eta[i];

    BbmState a{eta, 0.0, 0}, b{eta_sh, 0.0, 0};
    for (int k = 0; k < 20; ++k) {
        const double dt = bbm_dt(p, a.eta);
        a = bbm_step(p, a, dt);
        b = bbm_step(p, b, dt);
    }
    Vec a_sh(n);
    for (int i = 0; i < n; ++i) a_sh[(i + shift) % n] = a.eta[i];
    CHECK(rel_err(b.eta, a_sh) < 1e-12);
}

TEST_CASE("dirichlet-left lifting pins the boundary node") {
    const BbmProblem p = small_problem(80, Bc::DirichletLeftLifted);
    BbmState s{p.lift, 0.0, 0};
    for (int k = 0; k < 10; ++k) s = bbm_step(p, s, bbm_dt(p, s.eta));
    CHECK(s.eta[0] == p.lift[0]);
    CHECK(std::isfinite(s.eta.cwiseAbs().maxCoeff()));
}

TEST_CASE("nan detection aborts with the step index") {
    const BbmProblem p = small_problem(32);
    Vec eta = Vec::Zero(32);
    eta[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bbm_step(p, {eta, 0.0, 0}, 1e-3), SimulationError);
}
