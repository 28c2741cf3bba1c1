#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pshrink/error.h"
#include "pshrink/estimators.h"
#include "pshrink/randgen.h"

namespace pshrink {

struct RiskEstimate {
    double mean_loss = 0.0;
    double std_error = 0.0;  // sample sd / sqrt(replicates)
    std::size_t replicates = 0;
    std::vector<double> losses;  // per replicate, only when requested
};

/// Mean and standard error, accumulated in index order.
RiskEstimate summarize(std::span<const double> values, bool keep_values = false);

struct ScenarioConfig {
    std::string name = "scenario";
    int p = 0;
    int n = 0;
    CovarianceModel cov = IdentityCov{};
    std::optional<Vector> theta_direction;  // default (1,...,1)/sqrt(p)
    std::vector<double> theta_norms;        // default {0, 0.5, ..., 6} * sqrt(p)
    std::vector<EstimatorSpec> estimators;
    std::size_t replicates = 10000;
    std::uint64_t master_seed = 0;
};

/// {0, 0.5, ..., 6} * sqrt(p).
std::vector<double> default_theta_norms(int p);

/// Throws ErrorKind::Validation naming the offending field.
void validate_scenario(const ScenarioConfig& cfg);

/// Unit-norm mean direction for the scenario.
Vector theta_direction(const ScenarioConfig& cfg);

struct RunOptions {
    unsigned jobs = 0;  // 0: hardware concurrency
    bool keep_losses = false;
    std::optional<double> rel_tol;  // pseudoinverse rank tolerance override
};

/// A replicate failed; carries its index.
class ScenarioError : public Error {
public:
    ScenarioError(ErrorKind kind, std::string scenario, std::size_t replicate,
                  const std::string& what)
        : Error(kind, what), scenario_(std::move(scenario)), replicate_(replicate) {}

    const std::string& scenario() const { return scenario_; }
    std::size_t replicate() const { return replicate_; }

private:
    std::string scenario_;
    std::size_t replicate_;
};

/// (delta - theta)' Sigma^-1 (delta - theta).
double invariant_loss(const Vector& delta, const Vector& theta, const SymMatrix& sigma_inv);

/**
 * Per-draw statistic whose expectation is R(delta_r, theta) - R(X, theta):
 *
 *   r(F)^2 (n + p - 2m + 3)/F - 2 r(F)(m - 2)/F - 4 r'(F)(1 + r(F)),
 *
 * with F = x' S+ x and m = tr(S S+). Throws ErrorKind::DegenerateF when F is
 * degenerate.
 */
double unbiased_risk_difference(const Vector& x, const SymMatrix& s, int n,
                                const ShrinkageFunction& r,
                                std::optional<double> rel_tol = std::nullopt);
double unbiased_risk_difference(const Vector& x, const PseudoinverseResult& pinv, int n,
                                const ShrinkageFunction& r);

/**
 * Joint Monte-Carlo pass over one scenario. Replicate i draws from stream
 * (master_seed, i): first the p normals for X, then the n x p normals for Y.
 * All theta norms, estimators and risk-difference statistics share those
 * draws. risk[k][j] belongs to theta_norms[k] and estimators[j];
 * risk_difference[k][l] to theta_norms[k] and sure[l].
 */
struct ScenarioSimulation {
    std::vector<double> theta_norms;
    std::vector<std::vector<RiskEstimate>> risk;
    std::vector<std::vector<RiskEstimate>> risk_difference;
};

ScenarioSimulation simulate_scenario(const ScenarioConfig& cfg,
                                     const std::vector<double>& theta_norms,
                                     const std::vector<EstimatorSpec>& estimators,
                                     const std::vector<ShrinkageFunction>& sure,
                                     const RunOptions& opts = {});

RiskEstimate mc_risk(const ScenarioConfig& cfg, const EstimatorSpec& spec, double theta_norm,
                     const RunOptions& opts = {});

/// Monte-Carlo mean of unbiased_risk_difference for shrinkage function r.
RiskEstimate mc_risk_difference(const ScenarioConfig& cfg, const ShrinkageFunction& r,
                                double theta_norm, const RunOptions& opts = {});

struct RiskRow {
    std::string scenario;
    int p = 0;
    int n = 0;
    std::string cov_model;
    std::string estimator;
    double theta_norm = 0.0;
    RiskEstimate risk;
};

/// One row per (estimator, theta_norm), estimator-major.
std::vector<RiskRow> risk_curve(const ScenarioConfig& cfg, const RunOptions& opts = {});

}  // namespace pshrink
