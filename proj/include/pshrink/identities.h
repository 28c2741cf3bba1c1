#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pshrink/estimators.h"
#include "pshrink/linalg.h"
#include "pshrink/randgen.h"

namespace pshrink {

/**
 * One analytic-vs-oracle comparison. Scalars are stored as 1x1 matrices.
 *
 * rel_err = abs_err / max(1, |oracle|) with Frobenius norms, and
 * pass == (rel_err <= tolerance). For Monte-Carlo identities the tolerance
 * is max(3 * combined_se, 1e-3) expressed on that relative scale.
 */
struct IdentityReport {
    std::string name;
    Matrix analytic;
    Matrix oracle;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double combined_se = 0.0;  // Monte-Carlo identities only
    std::string detail;        // configuration of the reported case

    double analytic_value() const { return analytic(0, 0); }
    double oracle_value() const { return oracle(0, 0); }
};

IdentityReport make_report(std::string name, Matrix analytic, Matrix oracle, double tolerance);
IdentityReport make_report(std::string name, double analytic, double oracle, double tolerance);

/// Fixed-tolerance MC comparison: tolerance max(3 * combined_se, 1e-3).
IdentityReport make_mc_report(std::string name, double analytic, double analytic_se,
                              double oracle, double oracle_se);

/// Central-difference step for a coordinate with value v: 1e-5 * max(1, |v|).
double fd_step(double v);

/**
 * Quantities of Y (n x p), S = Y'Y and x shared by the matrix-derivative
 * formulas. The pseudoinverse keeps exactly min(n, p) eigenvalues; construction
 * throws ErrorKind::RankDegenerate when the min(n,p)-th eigenvalue is not
 * positive relative to the largest (1e-12).
 */
class YDerivatives {
public:
    YDerivatives(const Vector& x, const Matrix& y);

    Eigen::Index n() const { return y_.rows(); }
    Eigen::Index p() const { return y_.cols(); }
    double f() const { return f_; }
    const Matrix& s_pinv() const { return sp_; }
    const Matrix& complement() const { return q_; }
    /// S+ x x' S S+
    const Matrix& m() const { return m_; }

    /// d S / d Y(alpha, beta), p x p.
    Matrix ds(Eigen::Index alpha, Eigen::Index beta) const;
    /// d F / d Y(alpha, beta).
    double df(Eigen::Index alpha, Eigen::Index beta) const;
    /// d (S+ x x' S S+) / d Y(alpha, beta), p x p (nine-term expansion).
    Matrix dm(Eigen::Index alpha, Eigen::Index beta) const;

private:
    void check_index(Eigen::Index alpha, Eigen::Index beta) const;

    Vector x_;
    Matrix y_;
    Matrix s_, sp_, q_, m_;
    double f_ = 0.0;
    // Cached products used by df/dm.
    Vector spx_, qx_, xt_sp_yt_, xt_spsp_yt_;
    Matrix spsp_yt_, sp_yt_, y_sp_, qxx_s_sp_, y_sp_m_, y_spsp_m_, sp_xx_, sp_xx_yt_,
        sp_xx_sp_yt_, m_yt_;
};

Matrix dS_dY_analytic(const Matrix& y, Eigen::Index alpha, Eigen::Index beta);
double dF_dY_analytic(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta);
Matrix dM_dY_analytic(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta);

/// Central-difference oracles. The pseudoinverse rank is held at min(n, p).
Matrix dS_dY_fd(const Matrix& y, Eigen::Index alpha, Eigen::Index beta);
double dF_dY_fd(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta);
Matrix dM_dY_fd(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta);

/// r(F)^2 S S+ x x' S+ / F^2, the transpose of the shrinkage G.
Matrix g_transpose(const Vector& x, const Matrix& y, const ShrinkageFunction& r);

/// -4 r(F) r'(F) + r(F)^2 (p - 2 tr(S S+) + 3) / F.
double trace_grad_analytic(const Vector& x, const Matrix& y, const ShrinkageFunction& r);

/// tr(Y' grad_Y G') by central differences of g_transpose.
double trace_grad_fd(const Vector& x, const Matrix& y, const ShrinkageFunction& r);

/// tr(Y' grad_Y G') assembled from the analytic dF and dM expressions.
double trace_grad_from_derivatives(const Vector& x, const Matrix& y, const ShrinkageFunction& r);

IdentityReport trace_grad_identity(const Vector& x, const Matrix& y, const ShrinkageFunction& r,
                                   double tolerance = 1e-5);

/**
 * n tr(G) + (trace identity) against the combined closed form
 * r^2 (n + p - 2m + 3)/F - 4 r r'. No randomness; tolerance 1e-12.
 */
IdentityReport haff_combined_identity(const Vector& x, const Matrix& y,
                                      const ShrinkageFunction& r);

/// 2 r'(F) + r(F)(tr(S S+) - 2)/F.
double div_x_analytic(const Vector& x, const PseudoinverseResult& pinv,
                      const ShrinkageFunction& r);
/// sum_i d/dx_i [r(F) S S+ x / F]_i by central differences.
double div_x_fd(const Vector& x, const PseudoinverseResult& pinv, const ShrinkageFunction& r);

IdentityReport div_x_identity(const Vector& x, const SymMatrix& s, const ShrinkageFunction& r,
                              double tolerance = 1e-6);

struct McOptions {
    std::size_t replicates = 100000;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
};

/**
 * E[2 g' Sigma^-1 (X - theta)] against E[2 div_X g] for g = delta - X of a
 * Baranchik-type spec, with X ~ N(theta, Sigma) and S ~ Wishart(n, Sigma).
 */
IdentityReport stein_identity_mc(const Vector& theta, const SymMatrix& sigma, int n,
                                 const EstimatorSpec& spec, const McOptions& opts);

/// G(S) together with tr(Y' grad_Y G') for one draw.
struct HaffTerm {
    Matrix g;
    double trace_grad = 0.0;
};

using HaffBuilder = std::function<HaffTerm(const WishartDraw&, const Vector& x)>;

HaffBuilder haff_identity_g();
HaffBuilder haff_zero_g();
/// G = r^2(F) S+ x x' S+ S / F^2 with the trace identity for its gradient term.
HaffBuilder haff_shrinkage_g(ShrinkageFunction r);

/**
 * E[tr(Sigma^-1 S G)] against E[n tr(G) + tr(Y' grad_Y G')]. X is drawn from
 * N(theta, Sigma) per replicate for builders that depend on it.
 */
IdentityReport stein_haff_mc(int n, const SymMatrix& sigma, const Vector& theta,
                             const HaffBuilder& builder, const McOptions& opts,
                             std::string name = "stein_haff");

struct FinitenessSummary {
    std::size_t replicates = 0;
    bool all_finite = false;
    double mean_inv_f = 0.0;
    double max_inv_f = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0, q999 = 0.0;
    double mean_r2_over_f = 0.0;  // E[r(F)^2 / F], the risk-relevant moment
    std::vector<double> inv_f;    // filled when keep_samples
};

/// Samples 1/F, F = X' S+ X, with X scaled by x_scale.
FinitenessSummary finiteness_probe(int p, int n, const SymMatrix& sigma, const Vector& theta,
                                   const ShrinkageFunction& r, const McOptions& opts,
                                   double x_scale = 1.0, bool keep_samples = false);

struct SuiteOptions {
    std::uint64_t seed = 20130101;
    unsigned jobs = 0;
    std::optional<std::string> only;  // run a single identity by name
    int configs_per_pair = 100;
    std::size_t mc_replicates = 100000;
};

/// Names accepted by SuiteOptions::only, in suite order.
const std::vector<std::string>& identity_names();

/// Full identity suite; one report per identity name (the worst case).
std::vector<IdentityReport> verify_suite(const SuiteOptions& opts);

/// Random (x, Y) with F >= 1e-6 and a relative spectral gap >= 1e-3 at rank
/// min(n,p). Deterministic in (seed, index).
struct FdConfig {
    Vector x;
    Matrix y;
};
FdConfig random_fd_config(int p, int n, std::uint64_t seed, std::uint64_t index);

}  // namespace pshrink
