#include <doctest.h>

#include <cmath>

#include "pshrink/error.h"
#include "pshrink/risk.h"

using namespace pshrink;

namespace {

ScenarioConfig small(int p, int n, CovarianceModel cov = IdentityCov{}) {
    ScenarioConfig cfg;
    cfg.name = "t";
    cfg.p = p;
    cfg.n = n;
    cfg.cov = cov;
    cfg.replicates = 4000;
    cfg.master_seed = 31;
    return cfg;
}

}  // namespace

TEST_CASE("invariant_loss") {
    const Vector t = (Vector(2) << 1, 2).finished();
    CHECK(invariant_loss(t, t, SymMatrix::identity(2)) == 0.0);
    CHECK(invariant_loss((Vector(2) << 1, 0).finished(), Vector::Zero(2), SymMatrix::identity(2)) ==
          doctest::Approx(1.0));
    const SymMatrix w = SymMatrix::diagonal((Vector(2) << 2, 0.5).finished());
    CHECK(invariant_loss(Vector::Ones(2), Vector::Zero(2), w) == doctest::Approx(2.5));
    CHECK_THROWS_AS(invariant_loss(Vector::Ones(3), Vector::Zero(2), w), Error);
}

TEST_CASE("summarize") {
    const std::vector<double> v = {1, 2, 3, 4};
    const RiskEstimate r = summarize(v, true);
    CHECK(r.mean_loss == doctest::Approx(2.5));
    CHECK(r.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(r.replicates == 4);
    CHECK(r.losses.size() == 4);
    CHECK(summarize(v).losses.empty());
}

TEST_CASE("unbiased_risk_difference examples") {
    // p = 5, n = 3, S with rank 3 and F = 1.
    const SymMatrix s = SymMatrix::diagonal((Vector(5) << 1, 1, 1, 0, 0).finished());
    const Vector x = (Vector(5) << 1, 0, 0, 0, 0).finished();
    CHECK(unbiased_risk_difference(x, s, 3, ShrinkageFunction::constant(0.0)) == 0.0);
    CHECK(unbiased_risk_difference(x, s, 3, ShrinkageFunction::constant(0.25)) ==
          doctest::Approx(-0.1875));

    // Constant r: derivative term vanishes.
    const Vector x2 = (Vector(5) << 2, 1, 0.5, 3, 1).finished();
    const double f = 4.0 + 1.0 + 0.25;
    const double a = 0.4;
    CHECK(unbiased_risk_difference(x2, s, 3, ShrinkageFunction::constant(a)) ==
          doctest::Approx(a * a * (3 + 5 - 6 + 3) / f - 2 * a * (3 - 2) / f));

    const Vector null = (Vector(5) << 0, 0, 0, 1, 1).finished();
    CHECK_THROWS_AS(unbiased_risk_difference(null, s, 3, ShrinkageFunction::constant(a)), Error);
}

TEST_CASE("scenario validation") {
    ScenarioConfig ok = small(10, 5);
    ok.estimators = {UsualEstimator{}};
    CHECK_NOTHROW(validate_scenario(ok));

    auto expect_field = [](ScenarioConfig cfg, const std::string& field) {
        try {
            validate_scenario(cfg);
            FAIL("expected validation error for " << field);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Validation);
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    ScenarioConfig c = ok;
    c.n = 2;
    expect_field(c, "n");
    c = ok;
    c.replicates = 0;
    expect_field(c, "replicates");
    c = ok;
    c.theta_norms = {1.0, 0.5};
    expect_field(c, "theta_norms");
    c = ok;
    c.theta_norms = {-1.0};
    expect_field(c, "theta_norms");
    c = ok;
    c.cov = Spiked{};
    c.p = 9;
    expect_field(c, "p");
    c = ok;
    c.theta_direction = Vector::Zero(10);
    expect_field(c, "theta_direction");
    c = ok;
    c.cov = Autoregressive{1.5};
    expect_field(c, "rho");
}

TEST_CASE("default theta grid and direction") {
    const std::vector<double> g = default_theta_norms(4);
    CHECK(g.size() == 13);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(12.0));
    const Vector d = theta_direction(small(4, 3));
    CHECK(d.norm() == doctest::Approx(1.0));
    CHECK(d(0) == doctest::Approx(0.5));
}

TEST_CASE("usual estimator risk is p") {
    ScenarioConfig cfg = small(10, 5, Spiked{});
    cfg.replicates = 10000;
    for (double norm : {0.0, std::sqrt(10.0)}) {
        const RiskEstimate r = mc_risk(cfg, UsualEstimator{}, norm);
        CHECK(r.replicates == 10000);
        CHECK(std::abs(r.mean_loss - 10.0) <= 3.0 * r.std_error);
    }
}

TEST_CASE("zero shrinkage reproduces usual losses") {
    ScenarioConfig cfg = small(6, 4, Autoregressive{0.5});
    cfg.replicates = 500;
    RunOptions opts;
    opts.keep_losses = true;
    const RiskEstimate u = mc_risk(cfg, UsualEstimator{}, 1.0, opts);
    const RiskEstimate z = mc_risk(cfg, JamesStein{0.0}, 1.0, opts);
    CHECK(u.losses == z.losses);
    for (double l : u.losses) CHECK(l >= 0.0);
}

TEST_CASE("James-Stein beats usual at p=10 n=5") {
    ScenarioConfig cfg = small(10, 5);
    cfg.replicates = 10000;
    const RiskEstimate js = mc_risk(cfg, JamesStein{js_default_constant(10, 5)}, 0.0);
    CHECK(js.mean_loss < 10.0 - 3.0 * js.std_error);
}

TEST_CASE("SURE agrees with simulated risk difference") {
    ScenarioConfig cfg = small(8, 4, BlockDiagonal{0.5});
    cfg.replicates = 20000;
    const double a = js_default_constant(8, 4);
    RunOptions opts;
    opts.keep_losses = true;
    const ScenarioSimulation sim = simulate_scenario(cfg, {0.0, 2.0}, {UsualEstimator{}, JamesStein{a}},
                                                     {ShrinkageFunction::constant(a)}, opts);
    for (std::size_t k = 0; k < 2; ++k) {
        const RiskEstimate& u = sim.risk[k][0];
        const RiskEstimate& js = sim.risk[k][1];
        std::vector<double> diff(u.losses.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = js.losses[i] - u.losses[i];
        const RiskEstimate d = summarize(diff);
        const RiskEstimate& sure = sim.risk_difference[k][0];
        CHECK(std::abs(sure.mean_loss - d.mean_loss) <= 3.0 * std::hypot(sure.std_error, d.std_error));
        CHECK(sure.mean_loss < 0.0);
    }
}

TEST_CASE("determinism across thread counts") {
    ScenarioConfig cfg = small(6, 3, Spiked{});
    cfg.replicates = 3000;
    cfg.estimators = {UsualEstimator{}, JamesStein{js_default_constant(6, 3)},
                      PositivePartJS{js_default_constant(6, 3)}};
    cfg.theta_norms = {0.0, 1.0, 3.0};
    RunOptions one, four;
    one.jobs = 1;
    four.jobs = 4;
    const auto a = risk_curve(cfg, one);
    const auto b = risk_curve(cfg, four);
    REQUIRE(a.size() == 9);
    REQUIRE(b.size() == 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].estimator == b[i].estimator);
        CHECK(a[i].risk.mean_loss == b[i].risk.mean_loss);
        CHECK(a[i].risk.std_error == b[i].risk.std_error);
    }
    // estimator-major ordering
    CHECK(a[0].estimator == "usual");
    CHECK(a[2].estimator == "usual");
    CHECK(a[3].theta_norm == 0.0);
}

TEST_CASE("risk_curve edge cases") {
    ScenarioConfig cfg = small(10, 5);
    cfg.replicates = 2000;
    cfg.theta_norms = {0.0, 1.0};
    cfg.estimators = {UsualEstimator{}};
    const auto rows = risk_curve(cfg);
    REQUIRE(rows.size() == 2);
    for (const RiskRow& r : rows) {
        CHECK(std::abs(r.risk.mean_loss - 10.0) <= 3.0 * r.risk.std_error);
        CHECK(r.p == 10);
        CHECK(r.n == 5);
        CHECK(r.cov_model == "identity");
    }
    cfg.estimators.clear();
    CHECK(risk_curve(cfg).empty());
}

TEST_CASE("replicate failures carry the index") {
    ScenarioConfig cfg = small(4, 3);
    cfg.replicates = 50;
    cfg.estimators = {UsualEstimator{}};
    cfg.theta_norms = {0.0};
    // r with a throwing derivative makes every replicate fail in SURE evaluation.
    ShrinkageFunction bad{[](double) { return 0.1; },
                          [](double) -> double { throw Error(ErrorKind::InvalidArgument, "boom"); },
                          0.1, 0.0, "bad"};
    try {
        mc_risk_difference(cfg, bad, 0.0);
        FAIL("expected failure");
    } catch (const ScenarioError& e) {
        CHECK(e.replicate() == 0);
        CHECK(e.scenario() == "t");
    }
}
