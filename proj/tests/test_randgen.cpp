#include <doctest.h>

#include <cmath>

#include "pshrink/error.h"
#include "pshrink/linalg.h"
#include "pshrink/randgen.h"
#include "pshrink/risk.h"

using namespace pshrink;

TEST_CASE("build_covariance structures") {
    const Matrix spiked = build_covariance(Spiked{}, 4).matrix();
    CHECK(spiked.isApprox(Vector((Vector(4) << 1, 1, 10, 10).finished()).asDiagonal().toDenseMatrix()));

    Matrix ar(3, 3);
    ar << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
    CHECK((build_covariance(Autoregressive{0.5}, 3).matrix() - ar).norm() < 1e-15);

    Matrix block = Matrix::Zero(4, 4);
    block << 1, 0.5, 0, 0, 0.5, 1, 0, 0, 0, 0, 1, 0.5, 0, 0, 0.5, 1;
    CHECK((build_covariance(BlockDiagonal{0.5}, 4).matrix() - block).norm() == 0.0);

    CHECK(build_covariance(IdentityCov{}, 3).matrix() == Matrix::Identity(3, 3));

    for (int p : {4, 10, 20, 50}) {
        for (const CovarianceModel& m :
             {CovarianceModel{Spiked{}}, CovarianceModel{Autoregressive{0.5}},
              CovarianceModel{BlockDiagonal{0.5}}}) {
            CHECK(require_pd(build_covariance(m, p), "sigma") > 0.0);
        }
    }
}

TEST_CASE("build_covariance errors") {
    CHECK_THROWS_AS(build_covariance(Spiked{}, 3), Error);
    CHECK_THROWS_AS(build_covariance(BlockDiagonal{0.5}, 5), Error);
    CHECK_THROWS_AS(build_covariance(Autoregressive{1.0}, 4), Error);
    CHECK_THROWS_AS(build_covariance(BlockDiagonal{-1.2}, 4), Error);
    CHECK_THROWS_AS(build_covariance(IdentityCov{}, 0), Error);
    Matrix singular = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(build_covariance(CustomCov{SymMatrix(singular)}, 2), Error);
    CHECK_THROWS_AS(build_covariance(CustomCov{SymMatrix::identity(3)}, 2), Error);
    CHECK(covariance_label(Autoregressive{0.5}) == "ar(0.5)");
    CHECK(covariance_label(Spiked{}) == "spiked");
}

TEST_CASE("RngStream determinism and independence") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    const Matrix za = a.normals(5, 4);
    const Matrix zb = b.normals(5, 4);
    CHECK(za == zb);
    CHECK(za != c.normals(5, 4));
    CHECK(za != d.normals(5, 4));

    RngStream u(1, 0);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }

    // Correlation between neighbouring streams is negligible.
    const std::size_t count = 20000;
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < count; ++i) {
        RngStream s0(5, 2 * i), s1(5, 2 * i + 1);
        const double x = s0.normal(), y = s1.normal();
        sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
    }
    const double n = static_cast<double>(count);
    const double corr = (sxy / n - sx / n * sy / n) /
                        std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
    CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
}

TEST_CASE("standard normal moments") {
    RngStream rng(99, 0);
    const Vector z = rng.normals(200000);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    CHECK(std::abs(mean) < 3.0 / std::sqrt(200000.0));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / 200000.0));
}

TEST_CASE("sample_normal") {
    const SymMatrix sigma = build_covariance(Autoregressive{0.3}, 3);
    const NormalSampler sampler(sigma);
    const Vector theta = (Vector(3) << 1, -2, 3).finished();
    CHECK(sampler.transform(theta, Vector::Zero(3)) == theta);

    RngStream a(3, 1), b(3, 1);
    CHECK(sample_normal(theta, sigma, a) == sample_normal(theta, sigma, b));

    // Sample mean of 1e5 draws, theta = (1, 1), Sigma = I.
    const Vector t2 = Vector::Ones(2);
    const SymMatrix id = SymMatrix::identity(2);
    Vector acc = Vector::Zero(2);
    const int count = 100000;
    for (int i = 0; i < count; ++i) {
        RngStream rng(11, i);
        acc += sample_normal(t2, id, rng);
    }
    acc /= count;
    CHECK((acc - t2).cwiseAbs().maxCoeff() < 0.02);

    RngStream rng(1, 1);
    CHECK_THROWS_AS(sample_normal(Vector::Ones(2), sigma, rng), Error);
    CHECK_THROWS_AS(NormalSampler{SymMatrix(Matrix::Ones(2, 2))}, Error);
}

TEST_CASE("sample_wishart") {
    RngStream rng(5, 0);
    const WishartDraw w = sample_wishart(3, SymMatrix::identity(5), rng);
    CHECK(w.y.rows() == 3);
    CHECK(w.y.cols() == 5);
    CHECK((w.s.matrix() - w.y.transpose() * w.y).norm() <= 1e-10 * w.s.matrix().norm());
    CHECK(pseudo_inverse(w.s).rank == 3);

    RngStream r1(5, 1);
    const WishartDraw one = sample_wishart(1, SymMatrix::identity(2), r1);
    const Vector y1 = one.y.row(0).transpose();
    CHECK((one.s.matrix() - y1 * y1.transpose()).norm() < 1e-14);
    CHECK(pseudo_inverse(one.s).rank == 1);

    CHECK_THROWS_AS(sample_wishart(0, SymMatrix::identity(2), r1), Error);
}

TEST_CASE("Wishart first moment and trace statistic") {
    const int count = 100000;
    std::vector<double> s00(count), s01(count), s11(count);
    for (int i = 0; i < count; ++i) {
        RngStream rng(8, i);
        const WishartDraw w = sample_wishart(4, SymMatrix::identity(2), rng);
        s00[i] = w.s(0, 0), s01[i] = w.s(0, 1), s11[i] = w.s(1, 1);
    }
    const RiskEstimate a = summarize(s00), b = summarize(s01), c = summarize(s11);
    CHECK(std::abs(a.mean_loss - 4.0) < 3.0 * a.std_error);
    CHECK(std::abs(b.mean_loss) < 3.0 * b.std_error);
    CHECK(std::abs(c.mean_loss - 4.0) < 3.0 * c.std_error);

    // tr(S Sigma^-1) / (n p) has mean 1.
    const SymMatrix sigma = build_covariance(Spiked{}, 6);
    const Matrix sinv = spd_inverse(sigma).matrix();
    std::vector<double> t(20000);
    for (std::size_t i = 0; i < t.size(); ++i) {
        RngStream rng(9, i);
        t[i] = (sample_wishart(3, sigma, rng).s.matrix() * sinv).trace() / 18.0;
    }
    const RiskEstimate tr = summarize(t);
    CHECK(std::abs(tr.mean_loss - 1.0) < 3.0 * tr.std_error);
}
