#include "pshrink/identities.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "pshrink/error.h"
#include "pshrink/parallel.h"
#include "pshrink/risk.h"

namespace pshrink {

IdentityReport make_report(std::string name, Matrix analytic, Matrix oracle, double tolerance) {
    if (analytic.rows() != oracle.rows() || analytic.cols() != oracle.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "make_report: shapes differ for " + name);
    }
    IdentityReport rep;
    rep.name = std::move(name);
    rep.abs_err = (analytic - oracle).norm();
    rep.rel_err = rep.abs_err / std::max(1.0, oracle.norm());
    if (!std::isfinite(rep.rel_err)) rep.rel_err = std::numeric_limits<double>::infinity();
    rep.tolerance = tolerance;
    rep.pass = rep.rel_err <= tolerance;
    rep.analytic = std::move(analytic);
    rep.oracle = std::move(oracle);
    return rep;
}

IdentityReport make_report(std::string name, double analytic, double oracle, double tolerance) {
    return make_report(std::move(name), Matrix::Constant(1, 1, analytic),
                       Matrix::Constant(1, 1, oracle), tolerance);
}

IdentityReport make_mc_report(std::string name, double analytic, double analytic_se,
                              double oracle, double oracle_se) {
    const double combined = std::hypot(analytic_se, oracle_se);
    const double abs_tol = std::max(3.0 * combined, 1e-3);
    IdentityReport rep =
        make_report(std::move(name), analytic, oracle, abs_tol / std::max(1.0, std::abs(oracle)));
    rep.combined_se = combined;
    return rep;
}

double fd_step(double v) {
    return 1e-5 * std::max(1.0, std::abs(v));
}

namespace {

Eigen::Index locked_rank(const Matrix& y) {
    return std::min(y.rows(), y.cols());
}

// S+ of Y'Y with rank held at min(n, p).
Matrix locked_pinv(const Matrix& y) {
    const SymMatrix s(y.transpose() * y);
    return pseudo_inverse_fixed_rank(s, locked_rank(y)).pinv.matrix();
}

double f_of(const Vector& x, const Matrix& y) {
    return x.dot(locked_pinv(y) * x);
}

Matrix m_of(const Vector& x, const Matrix& y) {
    const Matrix s = y.transpose() * y;
    const Matrix sp = locked_pinv(y);
    return sp * x * (x.transpose() * s * sp);
}

template <typename Fn>
auto central_difference(const Matrix& y, Eigen::Index alpha, Eigen::Index beta, Fn&& fn)
    -> std::decay_t<decltype(fn(y))> {
    const double h = fd_step(y(alpha, beta));
    Matrix plus = y;
    Matrix minus = y;
    plus(alpha, beta) += h;
    minus(alpha, beta) -= h;
    return (fn(plus) - fn(minus)) / (2.0 * h);
}

void require_nondegenerate_f(double f, const Vector& x, const Matrix& sp, const char* what) {
    const double lambda_max = sp.norm();  // upper bound on the spectral norm
    if (!(f > 1e-12 * x.squaredNorm() * lambda_max) || !(f > 0.0)) {
        throw Error(ErrorKind::DegenerateF, std::string(what) + ": degenerate F = " +
                                                std::to_string(f));
    }
}

}  // namespace

YDerivatives::YDerivatives(const Vector& x, const Matrix& y) : x_(x), y_(y) {
    if (x.size() != y.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "YDerivatives: x has length " +
                                                      std::to_string(x.size()) + ", Y has " +
                                                      std::to_string(y.cols()) + " columns");
    }
    s_ = y_.transpose() * y_;
    const SymMatrix s(s_);
    const SpectralDecomposition eig = sym_eigen(s);
    const Eigen::Index rank = locked_rank(y_);
    if (!(eig.eigenvalues(rank - 1) > 1e-12 * eig.eigenvalues(0))) {
        throw Error(ErrorKind::RankDegenerate,
                    "YDerivatives: Y'Y has rank below min(n, p) = " + std::to_string(rank));
    }
    const PseudoinverseResult pinv =
        pseudo_inverse_from(eig, rank, rank < s.dim() ? std::max(0.0, eig.eigenvalues(rank)) : 0.0);
    sp_ = pinv.pinv.matrix();
    q_ = pinv.complement.matrix();
    f_ = x_.dot(sp_ * x_);

    const Matrix ssp = s_ * sp_;
    const Matrix xx = x_ * x_.transpose();
    m_ = sp_ * xx * ssp;

    spx_ = sp_ * x_;
    qx_ = q_ * x_;
    xt_sp_yt_ = y_ * spx_;
    xt_spsp_yt_ = y_ * (sp_ * spx_);
    sp_yt_ = sp_ * y_.transpose();
    spsp_yt_ = sp_ * sp_yt_;
    y_sp_ = y_ * sp_;
    qxx_s_sp_ = q_ * xx * ssp;
    y_sp_m_ = y_sp_ * xx * ssp;
    y_spsp_m_ = y_ * sp_ * m_;
    sp_xx_ = sp_ * xx;
    sp_xx_yt_ = sp_xx_ * y_.transpose();
    sp_xx_sp_yt_ = sp_xx_ * sp_yt_;
    m_yt_ = m_ * y_.transpose();
}

void YDerivatives::check_index(Eigen::Index alpha, Eigen::Index beta) const {
    if (alpha < 0 || alpha >= n() || beta < 0 || beta >= p()) {
        throw Error(ErrorKind::InvalidArgument,
                    "index (" + std::to_string(alpha) + ", " + std::to_string(beta) +
                        ") out of range for a " + std::to_string(n()) + "x" +
                        std::to_string(p()) + " matrix");
    }
}

Matrix YDerivatives::ds(Eigen::Index alpha, Eigen::Index beta) const {
    check_index(alpha, beta);
    Matrix out = Matrix::Zero(p(), p());
    out.row(beta) += y_.row(alpha);
    out.col(beta) += y_.row(alpha).transpose();
    return out;
}

double YDerivatives::df(Eigen::Index alpha, Eigen::Index beta) const {
    check_index(alpha, beta);
    return -2.0 * xt_sp_yt_(alpha) * spx_(beta) + 2.0 * xt_spsp_yt_(alpha) * qx_(beta);
}

Matrix YDerivatives::dm(Eigen::Index alpha, Eigen::Index beta) const {
    check_index(alpha, beta);
    Matrix out = spsp_yt_.col(alpha) * qxx_s_sp_.row(beta);
    out.noalias() -= sp_.col(beta) * y_sp_m_.row(alpha);
    out.noalias() -= sp_yt_.col(alpha) * m_.row(beta);
    out.noalias() += q_.col(beta) * y_spsp_m_.row(alpha);
    out.noalias() += sp_xx_.col(beta) * y_sp_.row(alpha);
    out.noalias() += sp_xx_yt_.col(alpha) * sp_.row(beta);
    out.noalias() += sp_xx_sp_yt_.col(alpha) * q_.row(beta);
    out.noalias() -= m_.col(beta) * y_sp_.row(alpha);
    out.noalias() -= m_yt_.col(alpha) * sp_.row(beta);
    return out;
}

Matrix dS_dY_analytic(const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    if (alpha < 0 || alpha >= y.rows() || beta < 0 || beta >= y.cols()) {
        throw Error(ErrorKind::InvalidArgument, "dS_dY_analytic: index out of range");
    }
    const Eigen::Index p = y.cols();
    Matrix out = Matrix::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        for (Eigen::Index l = 0; l < p; ++l) {
            out(k, l) = (beta == k ? y(alpha, l) : 0.0) + (beta == l ? y(alpha, k) : 0.0);
        }
    }
    return out;
}

double dF_dY_analytic(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    return YDerivatives(x, y).df(alpha, beta);
}

Matrix dM_dY_analytic(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    return YDerivatives(x, y).dm(alpha, beta);
}

Matrix dS_dY_fd(const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    return central_difference(y, alpha, beta,
                              [](const Matrix& yy) -> Matrix { return yy.transpose() * yy; });
}

double dF_dY_fd(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    return central_difference(y, alpha, beta, [&](const Matrix& yy) { return f_of(x, yy); });
}

Matrix dM_dY_fd(const Vector& x, const Matrix& y, Eigen::Index alpha, Eigen::Index beta) {
    return central_difference(y, alpha, beta, [&](const Matrix& yy) { return m_of(x, yy); });
}

Matrix g_transpose(const Vector& x, const Matrix& y, const ShrinkageFunction& r) {
    // SS+ as the spectral projector
    const SymMatrix s(y.transpose() * y);
    const PseudoinverseResult pinv = pseudo_inverse_fixed_rank(s, locked_rank(y));
    const Matrix& sp = pinv.pinv.matrix();
    const double f = x.dot(sp * x);
    const double rf = r(f);
    return (rf * rf / (f * f)) * (pinv.projector.matrix() * x) * (x.transpose() * sp);
}

double trace_grad_analytic(const Vector& x, const Matrix& y, const ShrinkageFunction& r) {
    const YDerivatives d(x, y);
    require_nondegenerate_f(d.f(), x, d.s_pinv(), "trace_grad_analytic");
    const double m = static_cast<double>(locked_rank(y));
    const double p = static_cast<double>(y.cols());
    const double f = d.f();
    const double rf = r(f);
    return -4.0 * rf * r.deriv(f) + rf * rf * (p - 2.0 * m + 3.0) / f;
}

double trace_grad_fd(const Vector& x, const Matrix& y, const ShrinkageFunction& r) {
    double total = 0.0;
    for (Eigen::Index alpha = 0; alpha < y.rows(); ++alpha) {
        for (Eigen::Index beta = 0; beta < y.cols(); ++beta) {
            const Matrix dg = central_difference(
                y, alpha, beta, [&](const Matrix& yy) { return g_transpose(x, yy, r); });
            // sum_i Y(alpha, i) * dG'(beta, i)
            total += y.row(alpha).dot(dg.row(beta));
        }
    }
    return total;
}

double trace_grad_from_derivatives(const Vector& x, const Matrix& y, const ShrinkageFunction& r) {
    const YDerivatives d(x, y);
    const double f = d.f();
    require_nondegenerate_f(f, x, d.s_pinv(), "trace_grad_from_derivatives");
    const double rf = r(f);
    const double drf = r.deriv(f);
    const Matrix ym = y * d.m();
    double total = 0.0;
    for (Eigen::Index alpha = 0; alpha < y.rows(); ++alpha) {
        for (Eigen::Index beta = 0; beta < y.cols(); ++beta) {
            const double df = d.df(alpha, beta);
            const double scale = 2.0 * rf * drf * df / (f * f) - 2.0 * rf * rf * df / (f * f * f);
            // G'(beta, i) = r^2 M(i, beta) / F^2
            const double ydm = y.row(alpha).dot(d.dm(alpha, beta).col(beta));
            total += scale * ym(alpha, beta) + rf * rf / (f * f) * ydm;
        }
    }
    return total;
}

IdentityReport trace_grad_identity(const Vector& x, const Matrix& y, const ShrinkageFunction& r,
                                   double tolerance) {
    return make_report("trace_grad", trace_grad_analytic(x, y, r), trace_grad_fd(x, y, r),
                       tolerance);
}

IdentityReport haff_combined_identity(const Vector& x, const Matrix& y,
                                      const ShrinkageFunction& r) {
    const Matrix gt = g_transpose(x, y, r);
    const double n = static_cast<double>(y.rows());
    const double p = static_cast<double>(y.cols());
    const double m = static_cast<double>(locked_rank(y));
    const double f = f_of(x, y);
    const double rf = r(f);
    const double assembled = n * gt.trace() + trace_grad_analytic(x, y, r);
    const double closed = rf * rf * (n + p - 2.0 * m + 3.0) / f - 4.0 * rf * r.deriv(f);
    return make_report("haff_combined", assembled, closed, 1e-12);
}

double div_x_analytic(const Vector& x, const PseudoinverseResult& pinv,
                      const ShrinkageFunction& r) {
    const double f = quad_form(x, pinv.pinv);
    if (is_degenerate_f(f, x, pinv)) {
        throw Error(ErrorKind::DegenerateF, "div_x_analytic: degenerate F = " + std::to_string(f));
    }
    const double m = pinv.projector.matrix().trace();
    return 2.0 * r.deriv(f) + r(f) * (m - 2.0) / f;
}

double div_x_fd(const Vector& x, const PseudoinverseResult& pinv, const ShrinkageFunction& r) {
    const Matrix& sp = pinv.pinv.matrix();
    const Matrix& ps = pinv.projector.matrix();
    auto component = [&](const Vector& xx, Eigen::Index i) {
        const double f = xx.dot(sp * xx);
        return r(f) * ps.row(i).dot(xx) / f;
    };
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = fd_step(x(i));
        Vector plus = x;
        Vector minus = x;
        plus(i) += h;
        minus(i) -= h;
        total += (component(plus, i) - component(minus, i)) / (2.0 * h);
    }
    return total;
}

IdentityReport div_x_identity(const Vector& x, const SymMatrix& s, const ShrinkageFunction& r,
                              double tolerance) {
    if (x.size() != s.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "div_x_identity: dimension mismatch");
    }
    const PseudoinverseResult pinv = pseudo_inverse(s);
    return make_report("div_x", div_x_analytic(x, pinv, r), div_x_fd(x, pinv, r), tolerance);
}

namespace {

void require_replicates(std::size_t reps, std::size_t min_reps, const char* what) {
    if (reps < min_reps) {
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": needs at least " +
                                                    std::to_string(min_reps) + " replicates");
    }
}

}  // namespace

IdentityReport stein_identity_mc(const Vector& theta, const SymMatrix& sigma, int n,
                                 const EstimatorSpec& spec, const McOptions& opts) {
    require_replicates(opts.replicates, 1000, "stein_identity_mc");
    if (theta.size() != sigma.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "stein_identity_mc: theta and sigma disagree");
    }
    validate_estimator(spec);
    const ShrinkageFunction r = equivalent_shrinkage(spec);
    const NormalSampler sampler(sigma);
    const SymMatrix sigma_inv = spd_inverse(sigma);
    const Eigen::Index p = sigma.dim();

    std::vector<double> lhs(opts.replicates), rhs(opts.replicates);
    parallel_for(opts.replicates, opts.jobs, [&](std::size_t i) {
        RngStream rng(opts.seed, i);
        const Vector x = sampler.transform(theta, rng.normals(p));
        const WishartDraw w = sample_wishart(n, sampler, rng);
        const PseudoinverseResult pinv = pseudo_inverse(w.s);
        const EstimateOutput est = estimate(spec, x, pinv);
        if (est.degenerate) {
            throw Error(ErrorKind::DegenerateF,
                        "stein_identity_mc: degenerate F at replicate " + std::to_string(i));
        }
        const Vector g = est.delta - x;
        lhs[i] = 2.0 * g.dot(sigma_inv.matrix() * (x - theta));
        rhs[i] = std::holds_alternative<UsualEstimator>(spec) ? 0.0
                                                              : -2.0 * div_x_analytic(x, pinv, r);
    });
    const RiskEstimate l = summarize(lhs);
    const RiskEstimate rr = summarize(rhs);
    IdentityReport rep =
        make_mc_report("stein_identity", rr.mean_loss, rr.std_error, l.mean_loss, l.std_error);
    rep.detail = "p=" + std::to_string(p) + " n=" + std::to_string(n) + " " +
                 estimator_label(spec);
    return rep;
}

HaffBuilder haff_identity_g() {
    return [](const WishartDraw& w, const Vector&) {
        return HaffTerm{Matrix::Identity(w.p, w.p), 0.0};
    };
}

HaffBuilder haff_zero_g() {
    return [](const WishartDraw& w, const Vector&) {
        return HaffTerm{Matrix::Zero(w.p, w.p), 0.0};
    };
}

HaffBuilder haff_shrinkage_g(ShrinkageFunction r) {
    return [r = std::move(r)](const WishartDraw& w, const Vector& x) {
        const PseudoinverseResult pinv = pseudo_inverse(w.s);
        const Matrix& sp = pinv.pinv.matrix();
        const double f = quad_form(x, pinv.pinv);
        if (is_degenerate_f(f, x, pinv)) {
            throw Error(ErrorKind::DegenerateF, "haff_shrinkage_g: degenerate F");
        }
        const double rf = r(f);
        const double m = pinv.projector.matrix().trace();
        const double p = static_cast<double>(w.p);
        HaffTerm term;
        term.g = (rf * rf / (f * f)) * (sp * x) * (x.transpose() * sp * w.s.matrix());
        term.trace_grad = -4.0 * rf * r.deriv(f) + rf * rf * (p - 2.0 * m + 3.0) / f;
        return term;
    };
}

IdentityReport stein_haff_mc(int n, const SymMatrix& sigma, const Vector& theta,
                             const HaffBuilder& builder, const McOptions& opts,
                             std::string name) {
    require_replicates(opts.replicates, 2, "stein_haff_mc");
    if (theta.size() != sigma.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "stein_haff_mc: theta and sigma disagree");
    }
    const NormalSampler sampler(sigma);
    const SymMatrix sigma_inv = spd_inverse(sigma);
    const Eigen::Index p = sigma.dim();

    std::vector<double> lhs(opts.replicates), rhs(opts.replicates);
    parallel_for(opts.replicates, opts.jobs, [&](std::size_t i) {
        RngStream rng(opts.seed, i);
        const Vector x = sampler.transform(theta, rng.normals(p));
        const WishartDraw w = sample_wishart(n, sampler, rng);
        const HaffTerm term = builder(w, x);
        if (term.g.rows() != p || term.g.cols() != p) {
            throw Error(ErrorKind::DimensionMismatch,
                        "stein_haff_mc: builder returned a " + std::to_string(term.g.rows()) +
                            "x" + std::to_string(term.g.cols()) + " matrix, expected " +
                            std::to_string(p) + "x" + std::to_string(p));
        }
        // tr(A B) = sum(A .* B')
        lhs[i] = (sigma_inv.matrix() * w.s.matrix()).cwiseProduct(term.g.transpose()).sum();
        rhs[i] = n * term.g.trace() + term.trace_grad;
    });
    const RiskEstimate l = summarize(lhs);
    const RiskEstimate rr = summarize(rhs);
    IdentityReport rep =
        make_mc_report(std::move(name), rr.mean_loss, rr.std_error, l.mean_loss, l.std_error);
    rep.detail = "p=" + std::to_string(p) + " n=" + std::to_string(n);
    return rep;
}

FinitenessSummary finiteness_probe(int p, int n, const SymMatrix& sigma, const Vector& theta,
                                   const ShrinkageFunction& r, const McOptions& opts,
                                   double x_scale, bool keep_samples) {
    if (std::min(p, n) < 1) {
        throw Error(ErrorKind::InvalidArgument, "finiteness_probe: p and n must be >= 1");
    }
    if (sigma.dim() != p || theta.size() != p) {
        throw Error(ErrorKind::DimensionMismatch, "finiteness_probe: dimension mismatch");
    }
    require_replicates(opts.replicates, 1, "finiteness_probe");
    const NormalSampler sampler(sigma);

    std::vector<double> inv_f(opts.replicates), r2f(opts.replicates);
    parallel_for(opts.replicates, opts.jobs, [&](std::size_t i) {
        RngStream rng(opts.seed, i);
        const Vector x = x_scale * sampler.transform(theta, rng.normals(p));
        const WishartDraw w = sample_wishart(n, sampler, rng);
        const double f = quad_form(x, pseudo_inverse(w.s).pinv);
        inv_f[i] = 1.0 / f;
        const double rf = r(f);
        r2f[i] = rf * rf / f;
    });

    FinitenessSummary out;
    out.replicates = opts.replicates;
    out.all_finite = std::all_of(inv_f.begin(), inv_f.end(), [](double v) {
        return std::isfinite(v) && v > 0.0;
    });
    out.mean_inv_f = summarize(inv_f).mean_loss;
    out.mean_r2_over_f = summarize(r2f).mean_loss;
    std::vector<double> sorted = inv_f;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
        return sorted[idx];
    };
    out.max_inv_f = sorted.back();
    out.q50 = quantile(0.5);
    out.q90 = quantile(0.9);
    out.q99 = quantile(0.99);
    out.q999 = quantile(0.999);
    if (keep_samples) out.inv_f = std::move(inv_f);
    return out;
}

// min relative gap (lambda_m - lambda_{m+1}) / lambda_1 for FD draws
constexpr double kMinRelativeGap = 1e-3;

FdConfig random_fd_config(int p, int n, std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t key = splitmix64(seed ^ (static_cast<std::uint64_t>(p) << 32) ^
                                         static_cast<std::uint64_t>(n));
    RngStream rng(key, index);
    const Eigen::Index m = std::min(p, n);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        FdConfig cfg{rng.normals(p), rng.normals(n, p)};
        const SpectralDecomposition eig = sym_eigen(SymMatrix(cfg.y.transpose() * cfg.y));
        const double next = m < p ? std::max(0.0, eig.eigenvalues(m)) : 0.0;
        if ((eig.eigenvalues(m - 1) - next) / eig.eigenvalues(0) < kMinRelativeGap) continue;
        if (f_of(cfg.x, cfg.y) < 1e-6) continue;
        return cfg;
    }
    throw Error(ErrorKind::RankDegenerate, "random_fd_config: no acceptable draw");
}

const std::vector<std::string>& identity_names() {
    static const std::vector<std::string> names = {
        "dS_dY",          "dF_dY",          "dM_dY",
        "trace_grad",     "trace_grad_assembled", "div_x",
        "haff_combined",  "stein_identity", "stein_haff_identity",
        "stein_haff_shrinkage", "finiteness",
    };
    return names;
}

namespace {

constexpr double kFdTolerance = 1e-5;

struct PairDim {
    int p;
    int n;
};

const std::vector<PairDim> kFdPairs = {{5, 3}, {6, 4}, {4, 6}, {5, 5}};
const std::vector<PairDim> kMcPairs = {{5, 3}, {3, 5}};

std::string describe(const PairDim& d, int config) {
    return "p=" + std::to_string(d.p) + " n=" + std::to_string(d.n) +
           " config=" + std::to_string(config);
}

// Keeps the report that is furthest from passing; all must pass.
class WorstCase {
public:
    explicit WorstCase(std::string name) : name_(std::move(name)) {}

    void add(IdentityReport rep) {
        rep.name = name_;
        ++count_;
        all_pass_ = all_pass_ && rep.pass;
        const double score =
            rep.tolerance > 0.0 ? rep.rel_err / rep.tolerance
                                : (rep.rel_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (!worst_ || score > worst_score_) {
            worst_ = std::move(rep);
            worst_score_ = score;
        }
    }

    IdentityReport finish() {
        IdentityReport rep = std::move(*worst_);
        rep.pass = all_pass_;
        rep.detail += " (worst of " + std::to_string(count_) + ")";
        return rep;
    }

private:
    std::string name_;
    std::optional<IdentityReport> worst_;
    double worst_score_ = 0.0;
    bool all_pass_ = true;
    int count_ = 0;
};

// Shrinkage functions cycled through the derivative checks. The capped
// function is only used when F sits clear of its kink at 1.
ShrinkageFunction shrinkage_for(int config, double f) {
    switch (config % 3) {
        case 0: return ShrinkageFunction::constant(0.7);
        case 1: return ShrinkageFunction::saturating(1.3);
        default:
            if (std::abs(f - 1.0) > 0.05) return ShrinkageFunction::capped_linear(1.0);
            return ShrinkageFunction::saturating(1.3);
    }
}

template <typename Fn>
IdentityReport over_fd_configs(const std::string& name, const SuiteOptions& opts, Fn&& check) {
    WorstCase worst(name);
    for (const PairDim& d : kFdPairs) {
        for (int c = 0; c < opts.configs_per_pair; ++c) {
            const FdConfig cfg = random_fd_config(d.p, d.n, opts.seed, static_cast<std::uint64_t>(c));
            IdentityReport rep = check(cfg, c);
            rep.detail = describe(d, c);
            worst.add(std::move(rep));
        }
    }
    return worst.finish();
}

IdentityReport suite_entry(const std::string& name, const SuiteOptions& opts) {
    if (name == "dS_dY") {
        return over_fd_configs(name, opts, [&](const FdConfig& cfg, int) {
            double worst = 0.0;
            IdentityReport out;
            for (Eigen::Index a = 0; a < cfg.y.rows(); ++a) {
                for (Eigen::Index b = 0; b < cfg.y.cols(); ++b) {
                    IdentityReport rep = make_report(name, dS_dY_analytic(cfg.y, a, b),
                                                     dS_dY_fd(cfg.y, a, b), kFdTolerance);
                    if (rep.rel_err >= worst) {
                        worst = rep.rel_err;
                        out = std::move(rep);
                    }
                }
            }
            return out;
        });
    }
    if (name == "dF_dY") {
        return over_fd_configs(name, opts, [&](const FdConfig& cfg, int) {
            const YDerivatives d(cfg.x, cfg.y);
            double worst = 0.0;
            IdentityReport out;
            for (Eigen::Index a = 0; a < cfg.y.rows(); ++a) {
                for (Eigen::Index b = 0; b < cfg.y.cols(); ++b) {
                    IdentityReport rep = make_report(name, d.df(a, b),
                                                     dF_dY_fd(cfg.x, cfg.y, a, b), kFdTolerance);
                    if (rep.rel_err >= worst) {
                        worst = rep.rel_err;
                        out = std::move(rep);
                    }
                }
            }
            return out;
        });
    }
    if (name == "dM_dY") {
        return over_fd_configs(name, opts, [&](const FdConfig& cfg, int) {
            const YDerivatives d(cfg.x, cfg.y);
            double worst = 0.0;
            IdentityReport out;
            for (Eigen::Index a = 0; a < cfg.y.rows(); ++a) {
                for (Eigen::Index b = 0; b < cfg.y.cols(); ++b) {
                    IdentityReport rep = make_report(name, d.dm(a, b),
                                                     dM_dY_fd(cfg.x, cfg.y, a, b), kFdTolerance);
                    if (rep.rel_err >= worst) {
                        worst = rep.rel_err;
                        out = std::move(rep);
                    }
                }
            }
            return out;
        });
    }
    if (name == "trace_grad") {
        return over_fd_configs(name, opts, [](const FdConfig& cfg, int c) {
            const ShrinkageFunction r = shrinkage_for(c, f_of(cfg.x, cfg.y));
            return trace_grad_identity(cfg.x, cfg.y, r, kFdTolerance);
        });
    }
    if (name == "trace_grad_assembled") {
        return over_fd_configs(name, opts, [&](const FdConfig& cfg, int c) {
            const ShrinkageFunction r = shrinkage_for(c, f_of(cfg.x, cfg.y));
            return make_report(name, trace_grad_analytic(cfg.x, cfg.y, r),
                               trace_grad_from_derivatives(cfg.x, cfg.y, r), 1e-8);
        });
    }
    if (name == "div_x") {
        return over_fd_configs(name, opts, [](const FdConfig& cfg, int c) {
            const SymMatrix s(cfg.y.transpose() * cfg.y);
            const ShrinkageFunction r = shrinkage_for(c, f_of(cfg.x, cfg.y));
            return div_x_identity(cfg.x, s, r, kFdTolerance);
        });
    }
    if (name == "haff_combined") {
        return over_fd_configs(name, opts, [](const FdConfig& cfg, int c) {
            return haff_combined_identity(cfg.x, cfg.y, shrinkage_for(c, f_of(cfg.x, cfg.y)));
        });
    }

    // Monte-Carlo identities on Sigma = AR(0.5), theta = 0.5 * (1, ..., 1).
    WorstCase worst(name);
    std::uint64_t tag = 0;
    for (const std::string& n2 : identity_names()) {
        if (n2 == name) break;
        ++tag;
    }
    const std::vector<PairDim> pairs =
        name == "finiteness" ? std::vector<PairDim>{{5, 3}, {3, 3}} : kMcPairs;
    for (const PairDim& d : pairs) {
        const SymMatrix sigma = build_covariance(Autoregressive{0.5}, d.p);
        const Vector theta = Vector::Constant(d.p, 0.5);
        McOptions mc{opts.mc_replicates, splitmix64(opts.seed + 1000 * tag + d.p * 10 + d.n),
                     opts.jobs};
        const double a = js_default_constant(d.p, d.n);
        IdentityReport rep;
        if (name == "stein_identity") {
            rep = stein_identity_mc(theta, sigma, d.n, JamesStein{a}, mc);
        } else if (name == "stein_haff_identity") {
            rep = stein_haff_mc(d.n, sigma, theta, haff_identity_g(), mc);
        } else if (name == "stein_haff_shrinkage") {
            rep = stein_haff_mc(d.n, sigma, theta, haff_shrinkage_g(ShrinkageFunction::constant(a)),
                                mc);
        } else if (name == "finiteness") {
            mc.replicates = std::min<std::size_t>(mc.replicates, 10000);
            const FinitenessSummary fs =
                finiteness_probe(d.p, d.n, sigma, theta, ShrinkageFunction::constant(a), mc);
            rep = make_report(name, fs.mean_inv_f, fs.max_inv_f, 0.0);
            rep.abs_err = rep.rel_err = fs.all_finite ? 0.0 : std::numeric_limits<double>::infinity();
            rep.pass = fs.all_finite;
        } else {
            throw Error(ErrorKind::InvalidArgument, "unknown identity '" + name + "'");
        }
        rep.detail = "p=" + std::to_string(d.p) + " n=" + std::to_string(d.n);
        worst.add(std::move(rep));
    }
    return worst.finish();
}

}  // namespace

std::vector<IdentityReport> verify_suite(const SuiteOptions& opts) {
    const auto& names = identity_names();
    if (opts.only && std::find(names.begin(), names.end(), *opts.only) == names.end()) {
        throw Error(ErrorKind::InvalidArgument, "unknown identity '" + *opts.only + "'");
    }
    std::vector<IdentityReport> out;
    for (const std::string& name : names) {
        if (opts.only && *opts.only != name) continue;
        out.push_back(suite_entry(name, opts));
    }
    return out;
}

}  // namespace pshrink
