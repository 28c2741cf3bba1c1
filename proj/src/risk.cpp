#include "pshrink/risk.h"

#include <cmath>

#include "pshrink/parallel.h"

namespace pshrink {

RiskEstimate summarize(std::span<const double> values, bool keep_values) {
    RiskEstimate out;
    out.replicates = values.size();
    if (values.empty()) return out;

    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());

    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.mean_loss = mean;
    if (values.size() > 1) {
        const double var = ss / static_cast<double>(values.size() - 1);
        out.std_error = std::sqrt(var / static_cast<double>(values.size()));
    }
    if (keep_values) out.losses.assign(values.begin(), values.end());
    return out;
}

std::vector<double> default_theta_norms(int p) {
    std::vector<double> out;
    const double scale = std::sqrt(static_cast<double>(p));
    for (int k = 0; k <= 12; ++k) out.push_back(0.5 * k * scale);
    return out;
}

void validate_scenario(const ScenarioConfig& cfg) {
    auto fail = [&](const std::string& field, const std::string& msg) {
        throw Error(ErrorKind::Validation, "scenario '" + cfg.name + "': " + field + ": " + msg);
    };
    if (cfg.p < 1) fail("p", "must be >= 1");
    if (cfg.n < 1) fail("n", "must be >= 1");
    if (std::min(cfg.p, cfg.n) < 3) fail("p/n", "min(p, n) must be >= 3");
    if (cfg.p > kMaxDim) fail("p", "exceeds dimension cap " + std::to_string(kMaxDim));
    if (cfg.replicates < 1) fail("replicates", "must be >= 1");
    try {
        validate_covariance_model(cfg.cov);
    } catch (const Error& e) {
        fail("cov", e.what());
    }
    const bool needs_even =
        std::holds_alternative<Spiked>(cfg.cov) || std::holds_alternative<BlockDiagonal>(cfg.cov);
    if (needs_even && cfg.p % 2 != 0) fail("cov", covariance_label(cfg.cov) + " requires even p");
    if (const auto* custom = std::get_if<CustomCov>(&cfg.cov); custom && custom->matrix.dim() != cfg.p) {
        fail("cov", "custom matrix dimension must equal p");
    }
    for (std::size_t i = 0; i < cfg.theta_norms.size(); ++i) {
        const double t = cfg.theta_norms[i];
        if (!(t >= 0.0) || !std::isfinite(t)) fail("theta_norms", "values must be finite and >= 0");
        if (i > 0 && !(t > cfg.theta_norms[i - 1])) fail("theta_norms", "values must be ascending");
    }
    if (cfg.theta_direction) {
        if (cfg.theta_direction->size() != cfg.p) fail("theta_direction", "length must equal p");
        if (!(cfg.theta_direction->norm() > 0.0) || !cfg.theta_direction->allFinite()) {
            fail("theta_direction", "must be a finite nonzero vector");
        }
    }
    for (const auto& e : cfg.estimators) {
        try {
            validate_estimator(e);
        } catch (const Error& err) {
            fail("estimators", err.what());
        }
    }
}

Vector theta_direction(const ScenarioConfig& cfg) {
    if (cfg.theta_direction) return cfg.theta_direction->normalized();
    return Vector::Constant(cfg.p, 1.0 / std::sqrt(static_cast<double>(cfg.p)));
}

double invariant_loss(const Vector& delta, const Vector& theta, const SymMatrix& sigma_inv) {
    if (delta.size() != theta.size() || delta.size() != sigma_inv.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "invariant_loss: dimension mismatch");
    }
    const Vector d = delta - theta;
    return d.dot(sigma_inv.matrix() * d);
}

double unbiased_risk_difference(const Vector& x, const PseudoinverseResult& pinv, int n,
                                const ShrinkageFunction& r) {
    if (x.size() != pinv.pinv.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "unbiased_risk_difference: dimension mismatch");
    }
    const double f = quad_form(x, pinv.pinv);
    if (is_degenerate_f(f, x, pinv)) {
        throw Error(ErrorKind::DegenerateF, "unbiased_risk_difference: degenerate F = " +
                                                std::to_string(f));
    }
    const double p = static_cast<double>(x.size());
    const double m = pinv.projector.matrix().trace();  // tr(S S+)
    const double rf = r(f);
    const double dr = r.deriv(f);
    return rf * rf * (n + p - 2.0 * m + 3.0) / f - 2.0 * rf * (m - 2.0) / f -
           4.0 * dr * (1.0 + rf);
}

double unbiased_risk_difference(const Vector& x, const SymMatrix& s, int n,
                                const ShrinkageFunction& r, std::optional<double> rel_tol) {
    if (x.size() != s.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "unbiased_risk_difference: dimension mismatch");
    }
    return unbiased_risk_difference(x, pseudo_inverse(s, rel_tol.value_or(default_rel_tol(s.dim()))),
                                    n, r);
}

ScenarioSimulation simulate_scenario(const ScenarioConfig& cfg,
                                     const std::vector<double>& theta_norms,
                                     const std::vector<EstimatorSpec>& estimators,
                                     const std::vector<ShrinkageFunction>& sure,
                                     const RunOptions& opts) {
    validate_scenario(cfg);
    for (const auto& e : estimators) validate_estimator(e);

    const SymMatrix sigma = build_covariance(cfg.cov, cfg.p);
    const SymMatrix sigma_inv = spd_inverse(sigma);
    const NormalSampler sampler(sigma);
    const Vector direction = theta_direction(cfg);
    const double rel_tol = opts.rel_tol.value_or(default_rel_tol(cfg.p));

    const std::size_t reps = cfg.replicates;
    const std::size_t n_theta = theta_norms.size();
    const std::size_t n_est = estimators.size();
    const std::size_t n_sure = sure.size();
    // values[(k * width + j) * reps + i]
    const std::size_t width = n_est + n_sure;
    std::vector<double> values(n_theta * width * reps);

    parallel_for(reps, opts.jobs, [&](std::size_t i) {
        try {
            RngStream rng(cfg.master_seed, i);
            const Vector z = rng.normals(cfg.p);
            const WishartDraw w = sample_wishart(cfg.n, sampler, rng);
            const PseudoinverseResult pinv = pseudo_inverse(w.s, rel_tol);
            for (std::size_t k = 0; k < n_theta; ++k) {
                const Vector theta = theta_norms[k] * direction;
                const Vector x = sampler.transform(theta, z);
                double* slot = values.data() + k * width * reps + i;
                for (std::size_t j = 0; j < n_est; ++j) {
                    const EstimateOutput est = estimate(estimators[j], x, pinv);
                    slot[j * reps] = invariant_loss(est.delta, theta, sigma_inv);
                }
                for (std::size_t l = 0; l < n_sure; ++l) {
                    slot[(n_est + l) * reps] = unbiased_risk_difference(x, pinv, cfg.n, sure[l]);
                }
            }
        } catch (const Error& e) {
            throw ScenarioError(e.kind(), cfg.name, i,
                                "scenario '" + cfg.name + "', replicate " + std::to_string(i) +
                                    ": " + e.what());
        }
    });

    ScenarioSimulation out;
    out.theta_norms = theta_norms;
    out.risk.resize(n_theta);
    out.risk_difference.resize(n_theta);
    for (std::size_t k = 0; k < n_theta; ++k) {
        for (std::size_t j = 0; j < width; ++j) {
            const std::span<const double> col(values.data() + (k * width + j) * reps, reps);
            RiskEstimate est = summarize(col, opts.keep_losses);
            (j < n_est ? out.risk[k] : out.risk_difference[k]).push_back(std::move(est));
        }
    }
    return out;
}

RiskEstimate mc_risk(const ScenarioConfig& cfg, const EstimatorSpec& spec, double theta_norm,
                     const RunOptions& opts) {
    ScenarioSimulation sim = simulate_scenario(cfg, {theta_norm}, {spec}, {}, opts);
    return std::move(sim.risk[0][0]);
}

RiskEstimate mc_risk_difference(const ScenarioConfig& cfg, const ShrinkageFunction& r,
                                double theta_norm, const RunOptions& opts) {
    ScenarioSimulation sim = simulate_scenario(cfg, {theta_norm}, {}, {r}, opts);
    return std::move(sim.risk_difference[0][0]);
}

std::vector<RiskRow> risk_curve(const ScenarioConfig& cfg, const RunOptions& opts) {
    const std::vector<double> norms =
        cfg.theta_norms.empty() ? default_theta_norms(cfg.p) : cfg.theta_norms;
    std::vector<RiskRow> rows;
    if (cfg.estimators.empty()) {
        validate_scenario(cfg);
        return rows;
    }
    ScenarioSimulation sim = simulate_scenario(cfg, norms, cfg.estimators, {}, opts);
    const std::string cov = covariance_label(cfg.cov);
    for (std::size_t j = 0; j < cfg.estimators.size(); ++j) {
        const std::string label = estimator_label(cfg.estimators[j]);
        for (std::size_t k = 0; k < norms.size(); ++k) {
            rows.push_back(RiskRow{cfg.name, cfg.p, cfg.n, cov, label, norms[k],
                                   std::move(sim.risk[k][j])});
        }
    }
    return rows;
}

}  // namespace pshrink
