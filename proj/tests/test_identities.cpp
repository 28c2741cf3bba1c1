#include <doctest.h>

#include <cmath>

#include "pshrink/error.h"
#include "pshrink/identities.h"
#include "pshrink/randgen.h"

using namespace pshrink;

TEST_CASE("dS/dY closed form") {
    Matrix y(1, 2);
    y << 3, 5;
    Matrix expect(2, 2);
    expect << 6, 5, 5, 0;
    CHECK((dS_dY_analytic(y, 0, 0) - expect).norm() == 0.0);
    CHECK(dS_dY_analytic(Matrix::Zero(3, 4), 1, 2).norm() == 0.0);

    const FdConfig c = random_fd_config(5, 3, 1, 0);
    const Matrix d = dS_dY_analytic(c.y, 2, 4);
    CHECK((d - d.transpose()).norm() == 0.0);
    CHECK_THROWS_AS(dS_dY_analytic(c.y, 3, 0), Error);
    CHECK_THROWS_AS(dS_dY_analytic(c.y, 0, 5), Error);
}

TEST_CASE("dF/dY and dM/dY against finite differences") {
    for (auto [p, n] : {std::pair{5, 3}, {6, 4}, {4, 6}, {5, 5}}) {
        for (int k = 0; k < 5; ++k) {
            const FdConfig c = random_fd_config(p, n, 77, k);
            const YDerivatives d(c.x, c.y);
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = 0; b < p; ++b) {
                    const double fd = dF_dY_fd(c.x, c.y, a, b);
                    CHECK(std::abs(d.df(a, b) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
                    const Matrix mfd = dM_dY_fd(c.x, c.y, a, b);
                    CHECK((d.dm(a, b) - mfd).norm() <= 1e-5 * std::max(1.0, mfd.norm()));
                }
            }
        }
    }
}

TEST_CASE("zero x gives zero derivatives") {
    const FdConfig c = random_fd_config(5, 3, 2, 0);
    CHECK(dF_dY_analytic(Vector::Zero(5), c.y, 1, 1) == 0.0);
    CHECK(dM_dY_analytic(Vector::Zero(5), c.y, 1, 1).norm() == 0.0);
}

TEST_CASE("complement terms vanish when n >= p") {
    const FdConfig c = random_fd_config(4, 6, 3, 0);
    const YDerivatives d(c.x, c.y);
    CHECK(d.complement().norm() < 1e-12);
    const Matrix& sp = d.s_pinv();
    for (Eigen::Index a = 0; a < 6; ++a) {
        for (Eigen::Index b = 0; b < 4; ++b) {
            const double first = -2.0 * (c.y * sp * c.x)(a) * (sp * c.x)(b);
            CHECK(d.df(a, b) == doctest::Approx(first).epsilon(1e-10));
        }
    }
}

TEST_CASE("rank-degenerate Y is rejected") {
    Matrix y = Matrix::Zero(3, 5);
    y.row(0) << 1, 2, 3, 4, 5;
    y.row(1) = 2.0 * y.row(0);
    y.row(2) << 0, 1, 0, 1, 0;
    try {
        YDerivatives d(Vector::Ones(5), y);
        FAIL("expected rank error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RankDegenerate);
    }
}

TEST_CASE("trace identity") {
    const FdConfig c = random_fd_config(5, 3, 4, 1);
    CHECK(trace_grad_analytic(c.x, c.y, ShrinkageFunction::constant(0.0)) == 0.0);
    CHECK(trace_grad_fd(c.x, c.y, ShrinkageFunction::constant(0.0)) == 0.0);

    const double a = 0.8;
    const double f = YDerivatives(c.x, c.y).f();
    CHECK(trace_grad_analytic(c.x, c.y, ShrinkageFunction::constant(a)) ==
          doctest::Approx(a * a * (5 - 6 + 3) / f));
    CHECK(trace_grad_identity(c.x, c.y, ShrinkageFunction::constant(a)).pass);

    // min(t, 1) away from the kink
    for (int k = 0; k < 30; ++k) {
        const FdConfig cc = random_fd_config(6, 4, 5, k);
        const double ff = YDerivatives(cc.x, cc.y).f();
        if (std::abs(ff - 1.0) < 0.05) continue;
        const IdentityReport rep = trace_grad_identity(cc.x, cc.y, ShrinkageFunction::capped_linear(1.0));
        CHECK(rep.pass);
        CHECK(rep.rel_err <= 1e-5);
    }
}

TEST_CASE("trace identity from analytic derivatives and combined form") {
    for (int k = 0; k < 10; ++k) {
        const FdConfig c = random_fd_config(6, 4, 6, k);
        const ShrinkageFunction r = ShrinkageFunction::saturating(1.1);
        CHECK(trace_grad_from_derivatives(c.x, c.y, r) ==
              doctest::Approx(trace_grad_analytic(c.x, c.y, r)).epsilon(1e-8));
        CHECK(haff_combined_identity(c.x, c.y, r).pass);
    }
}

TEST_CASE("divergence identity") {
    const Vector x = (Vector(3) << 1, 0, 0).finished();
    const SymMatrix s = SymMatrix::identity(3);
    const IdentityReport zero = div_x_identity(x, s, ShrinkageFunction::constant(0.0));
    CHECK(zero.analytic_value() == 0.0);
    CHECK(zero.pass);
    const IdentityReport rep = div_x_identity(x, s, ShrinkageFunction::constant(0.7));
    CHECK(rep.analytic_value() == doctest::Approx(0.7));
    CHECK(rep.pass);

    for (std::uint64_t k = 0; k < 20; ++k) {
        RngStream rng(12, k);
        const Vector xx = rng.normals(6);
        const WishartDraw w = sample_wishart(4, SymMatrix::identity(6), rng);
        const IdentityReport r = div_x_identity(xx, w.s, ShrinkageFunction::saturating(0.9));
        CHECK(r.pass);
        CHECK(r.rel_err <= 1e-6);
    }
    CHECK_THROWS_AS(div_x_identity(Vector::Zero(3), s, ShrinkageFunction::constant(0.5)), Error);
}

TEST_CASE("report bookkeeping") {
    const IdentityReport r = make_report("x", 2.0, 2.5, 0.1);
    CHECK(r.abs_err == doctest::Approx(0.5));
    CHECK(r.rel_err == doctest::Approx(0.2));
    CHECK_FALSE(r.pass);
    const IdentityReport small = make_report("y", 0.1, 0.2, 0.2);
    CHECK(small.rel_err == doctest::Approx(0.1));
    CHECK(small.pass);
    const IdentityReport mc = make_mc_report("z", 1.0, 0.0001, 1.0005, 0.0001);
    CHECK(mc.tolerance == doctest::Approx(1e-3));
    CHECK(mc.pass);
}

TEST_CASE("Monte-Carlo identities at small scale") {
    McOptions opts;
    opts.replicates = 20000;
    opts.seed = 4;
    const SymMatrix sigma = SymMatrix::identity(6);
    const Vector theta = Vector::Zero(6);
    CHECK(stein_identity_mc(theta, sigma, 4, JamesStein{0.3}, opts).pass);
    const IdentityReport zero = stein_identity_mc(theta, sigma, 4, JamesStein{0.0}, opts);
    CHECK(zero.analytic_value() == 0.0);
    CHECK(zero.oracle_value() == 0.0);
    CHECK(stein_identity_mc(Vector::Zero(4), SymMatrix::identity(4), 6, JamesStein{0.3}, opts).pass);

    const IdentityReport id = stein_haff_mc(3, build_covariance(Autoregressive{0.5}, 5),
                                            Vector::Zero(5), haff_identity_g(), opts);
    CHECK(id.analytic_value() == doctest::Approx(15.0));
    CHECK(id.pass);
    const IdentityReport z = stein_haff_mc(3, sigma, theta, haff_zero_g(), opts);
    CHECK(z.analytic_value() == 0.0);
    CHECK(z.oracle_value() == 0.0);

    opts.replicates = 10;
    CHECK_THROWS_AS(stein_identity_mc(theta, sigma, 4, JamesStein{0.3}, opts), Error);
}

TEST_CASE("finiteness probe") {
    McOptions opts;
    opts.replicates = 10000;
    opts.seed = 9;
    for (auto [p, n] : {std::pair{5, 3}, {3, 3}}) {
        const FinitenessSummary s = finiteness_probe(p, n, SymMatrix::identity(p), Vector::Zero(p),
                                                     ShrinkageFunction::constant(0.5), opts);
        CHECK(s.all_finite);
        CHECK(s.replicates == 10000);
        CHECK(s.q50 <= s.q90);
        CHECK(s.q99 <= s.max_inv_f);
    }
    opts.replicates = 200;
    const FinitenessSummary a = finiteness_probe(5, 3, SymMatrix::identity(5), Vector::Zero(5),
                                                 ShrinkageFunction::constant(0.5), opts, 1.0, true);
    const FinitenessSummary b = finiteness_probe(5, 3, SymMatrix::identity(5), Vector::Zero(5),
                                                 ShrinkageFunction::constant(0.5), opts, 10.0, true);
    REQUIRE(a.inv_f.size() == b.inv_f.size());
    for (std::size_t i = 0; i < a.inv_f.size(); ++i) {
        CHECK(b.inv_f[i] == doctest::Approx(a.inv_f[i] / 100.0).epsilon(1e-12));
    }
}

TEST_CASE("suite selection") {
    SuiteOptions opts;
    opts.only = "dF_dY";
    opts.configs_per_pair = 10;
    const auto reports = verify_suite(opts);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].name == "dF_dY");
    CHECK(reports[0].pass);
    opts.only = "nope";
    CHECK_THROWS_AS(verify_suite(opts), Error);
}
