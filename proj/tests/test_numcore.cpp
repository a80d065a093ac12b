#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "dwrom/grid.hpp"
#include "dwrom/solvers.hpp"
#include "dwrom/stencils.hpp"
#include "dwrom/svd.hpp"
#include "dwrom/time_scheme.hpp"
#include "test_util.hpp"

using namespace dwrom;
using namespace dwrom::testutil;

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 3, Bc::Periodic), ConfigError);
    CHECK_THROWS_AS(make_grid(1.0, 0.0, 10, Bc::Periodic), ConfigError);
    const Grid1D gp = make_grid(0.0, 1.0, 10, Bc::Periodic);
    CHECK(gp.dx() == doctest::Approx(0.1));
    const Grid1D ge = make_grid(0.0, 1.0, 11, Bc::Extrapolated);
    CHECK(ge.dx() == doctest::Approx(0.1));
    CHECK(ge.node(10) == doctest::Approx(1.0));
}

TEST_CASE("fd D is exact on linear data away from the periodic wrap") {
    const Grid1D g = make_grid(0.0, 2.0, 40, Bc::Periodic);
    Vec v(g.nh);
    for (int i = 0; i < g.nh; ++i) v[i] = g.node(i);  // sawtooth across the wrap
    const Vec d = fd_apply(FdOp::D, v, g);
    for (int i = 2; i < g.nh - 2; ++i) CHECK(d[i] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("fd D2 annihilates constants and is exact on quadratics") {
    const Grid1D g = make_grid(0.0, 1.0, 32, Bc::Periodic);
    const Vec c = Vec::Constant(g.nh, 3.7);
    CHECK(fd_apply(FdOp::D2, c, g).cwiseAbs().maxCoeff() == 0.0);

    const Grid1D ge = make_grid(-1.0, 1.0, 33, Bc::Extrapolated);
    Vec v(ge.nh);
    for (int i = 0; i < ge.nh; ++i) v[i] = ge.node(i) * ge.node(i);
    const Vec d2 = fd_apply(FdOp::D2, v, ge);
    for (int i = 1; i < ge.nh - 1; ++i) CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("fd D3 matches a dense stencil-convolution oracle") {
    std::mt19937_64 rng(11);
    const Grid1D g = make_grid(0.0, 1.0, 50, Bc::Periodic);
    const Vec v = random_vec(g.nh, rng);
    const double c = 1.0 / (2.0 * std::pow(g.dx(), 3));
    Mat dense = Mat::Zero(g.nh, g.nh);
    for (int i = 0; i < g.nh; ++i) {
        const auto w = [&](int off) { return ((i + off) % g.nh + g.nh) % g.nh; };
        dense(i, w(2)) += c;
        dense(i, w(1)) -= 2.0 * c;
        dense(i, w(-1)) += 2.0 * c;
        dense(i, w(-2)) -= c;
    }
    CHECK(rel_err(fd_apply(FdOp::D3, v, g), dense * v) < 1e-13);

    CHECK_THROWS_AS(fd_apply(FdOp::D, Vec::Zero(7), g), ConfigError);
}

TEST_CASE("cip vanishes for quadratic data with constant speed, and for d = 0") {
    const Grid1D g = make_grid(0.0, 1.0, 40, Bc::Extrapolated);
    Vec v(g.nh);
    for (int i = 0; i < g.nh; ++i) v[i] = 1.0 + g.node(i) * (2.0 - g.node(i));
    const Vec lam = Vec::Constant(g.nh, 2.5);
    const Vec j = cip_apply(v, lam, 1.0, g);
    // D2 v is constant away from the extrapolated boundary rows
    for (int i = 3; i < g.nh - 3; ++i) CHECK(std::abs(j[i]) < 1e-12);

    std::mt19937_64 rng(5);
    const Vec r = random_vec(g.nh, rng);
    CHECK(cip_apply(r, lam, 0.0, g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cip matches the direct three-term formula") {
    std::mt19937_64 rng(17);
    const Grid1D g = make_grid(0.0, 3.0, 64, Bc::Periodic);
    const Vec v = random_vec(g.nh, rng);
    const Vec lam = random_vec(g.nh, rng, 0.5, 2.0);
    const double d = 0.8;
    const Vec got = cip_apply(v, lam, d, g);
    const Vec d2 = fd_apply(FdOp::D2, v, g);
    const double dx3 = std::pow(g.dx(), 3);
    for (int i = 0; i < g.nh; ++i) {
        const int ip = (i + 1) % g.nh, im = (i + g.nh - 1) % g.nh;
        const double want =
            d * dx3 * (lam[ip] * d2[ip] - 2.0 * lam[i] * d2[i] + lam[im] * d2[im]);
        CHECK(got[i] == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("thomas_solve: identity, forward-multiply oracle, dense oracle") {
    std::mt19937_64 rng(23);
    const Vec rhs = random_vec(17, rng);
    CHECK(rel_err(thomas_solve(TriDiagMatrix::identity(17), rhs), rhs) == 0.0);

    // -1 2 -1 with known solution
    TriDiagMatrix lap = TriDiagMatrix::zero(64);
    lap.diag.setConstant(2.0);
    lap.lower.setConstant(-1.0);
    lap.upper.setConstant(-1.0);
    const Vec x_true = random_vec(64, rng);
    const Vec b = tridiag_apply(lap, x_true);
    CHECK(rel_err(thomas_solve(lap, b), x_true) < 1e-12);

    for (int n : {5, 20, 173}) {
        const TriDiagMatrix m = random_dd_tridiag(n, rng);
        const Vec r = random_vec(n, rng);
        const Vec x_dense = Mat(tridiag_dense(m)).fullPivLu().solve(r);
        CHECK(rel_err(thomas_solve(m, r), x_dense) < 1e-12);
    }

    TriDiagMatrix sing = TriDiagMatrix::identity(6);
    sing.diag[3] = 0.0;
    CHECK_THROWS_AS(thomas_solve(sing, Vec::Ones(6)), SingularMatrixError);
}

TEST_CASE("thomas forward-multiply reproduces rhs across sizes") {
    std::mt19937_64 rng(29);
    for (int n : {5, 64, 1000, 10000}) {
        const TriDiagMatrix m = random_dd_tridiag(n, rng);
        const Vec rhs = random_vec(n, rng);
        const Vec x = thomas_solve(m, rhs);
        CHECK(rel_err(tridiag_apply(m, x), rhs) < 1e-12);
    }
}

TEST_CASE("cyclic_solve: corners zero, dense oracle, scaled identity") {
    std::mt19937_64 rng(31);
    const TriDiagMatrix core = random_dd_tridiag(40, rng);
    const Vec rhs = random_vec(40, rng);
    CHECK(rel_err(cyclic_solve({core, 0.0, 0.0}, rhs), thomas_solve(core, rhs)) == 0.0);

    // periodic -1, 2+eps, -1
    const int n = 50;
    TriDiagMatrix lap = TriDiagMatrix::zero(n);
    lap.diag.setConstant(2.1);
    lap.lower.setConstant(-1.0);
    lap.upper.setConstant(-1.0);
    const CyclicTriDiagMatrix per{lap, -1.0, -1.0};
    const Vec b = random_vec(n, rng);
    const Vec x_dense = Mat(cyclic_dense(per)).fullPivLu().solve(b);
    CHECK(rel_err(cyclic_solve(per, b), x_dense) < 1e-12);

    TriDiagMatrix sc = TriDiagMatrix::zero(12);
    sc.diag.setConstant(4.0);
    const Vec r2 = random_vec(12, rng);
    CHECK(rel_err(cyclic_solve({sc, 0.0, 0.0}, r2), Vec(r2 / 4.0)) < 1e-15);
}

TEST_CASE("cyclic and tridiag factorizations match the one-shot solvers") {
    std::mt19937_64 rng(37);
    const TriDiagMatrix m = random_dd_tridiag(80, rng);
    const Vec rhs = random_vec(80, rng);
    CHECK(rel_err(tridiag_factorize(m).solve(rhs), thomas_solve(m, rhs)) < 1e-13);

    const CyclicTriDiagMatrix c = random_dd_cyclic(80, rng);
    CHECK(rel_err(cyclic_factorize(c).solve(rhs), cyclic_solve(c, rhs)) < 1e-12);
}

TEST_CASE("dense_solve: identity, hand case, residual bound, singular") {
    std::mt19937_64 rng(41);
    const Vec rhs = random_vec(9, rng);
    CHECK(rel_err(dense_solve(Mat::Identity(9, 9), rhs), rhs) < 1e-15);

    Mat a(2, 2);
    a << 2, 1, 1, 3;
    Vec b(2);
    b << 3, 4;
    const Vec x = dense_solve(a, b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));

    const Mat r50 = random_mat(50, 50, rng) + 10.0 * Mat::Identity(50, 50);
    const Vec b50 = random_vec(50, rng);
    const Vec x50 = dense_solve(r50, b50);
    CHECK((r50 * x50 - b50).norm() <= 1e-10 * b50.norm());

    Mat sing = Mat::Ones(4, 4);
    CHECK_THROWS_AS(dense_solve(sing, Vec::Ones(4)), SingularMatrixError);
}

TEST_CASE("thin_svd: rank-one, identity, Gram oracle, orthonormality, reconstruction") {
    std::mt19937_64 rng(43);
    const int n = 30, k = 7;
    const Vec col = random_vec(n, rng);
    Mat s(n, k);
    for (int j = 0; j < k; ++j) s.col(j) = col;
    const ThinSvd r1 = thin_svd(s);
    CHECK(r1.sigma[0] == doctest::Approx(col.norm() * std::sqrt(double(k))).epsilon(1e-12));
    for (int i = 1; i < r1.sigma.size(); ++i) CHECK(r1.sigma[i] <= 1e-12 * r1.sigma[0]);

    const ThinSvd rid = thin_svd(Mat::Identity(12, 12));
    for (int i = 0; i < 12; ++i) CHECK(rid.sigma[i] == doctest::Approx(1.0).epsilon(1e-13));

    // independent oracle: eigen-decomposition of the Gram matrix
    const Mat m = random_mat(40, 25, rng);
    const ThinSvd r = thin_svd(m);
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(m.transpose() * m));
    Vec sig_oracle(25);
    for (int i = 0; i < 25; ++i)
        sig_oracle[i] = std::sqrt(std::max(es.eigenvalues()[24 - i], 0.0));
    for (int i = 0; i < 25; ++i)
        CHECK(r.sigma[i] == doctest::Approx(sig_oracle[i]).epsilon(1e-10));
    for (int i = 1; i < 25; ++i) CHECK(r.sigma[i] <= r.sigma[i - 1]);

    CHECK((r.u.transpose() * r.u - Mat::Identity(25, 25)).cwiseAbs().maxCoeff() <= 1e-10);
    const Mat rec = r.u * r.sigma.asDiagonal() * r.v.transpose();
    CHECK((m - rec).norm() <= 1e-9 * m.norm());
}

TEST_CASE("ssprk22 coefficients are consistent") {
    const TimeScheme ts = ssprk22();
    CHECK(ts.stages() == 2);
    CHECK(ts.rho[1][0] == doctest::Approx(0.5));
    CHECK(ts.theta[1][1] == doctest::Approx(0.5));

    TimeScheme bad = ts;
    bad.rho[1][0] = 0.7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // stage abscissae: both stages target t + dt
    std::vector<double> tau{10.0};
    const double t1 = ts.stage_time(0, tau, 0.5);
    tau.push_back(t1);
    CHECK(t1 == doctest::Approx(10.5));
    CHECK(ts.stage_time(1, tau, 0.5) == doctest::Approx(10.5));
}
