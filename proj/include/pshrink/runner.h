#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pshrink/config.h"
#include "pshrink/identities.h"
#include "pshrink/risk.h"

namespace pshrink {

inline constexpr const char* kRiskCsvHeader =
    "scenario,p,n,cov_model,estimator,theta_norm,replicates,risk,std_err";
inline constexpr const char* kIdentityCsvHeader =
    "identity,analytic,oracle,abs_err,rel_err,tolerance,pass,detail";

/// Rows in the fixed risk CSV schema, 10 significant digits.
std::string risk_csv(const std::vector<RiskRow>& rows);

/// Risk-vs-theta-norm chart with a reference line at y = p.
std::string risk_svg(const ScenarioConfig& cfg, const std::vector<RiskRow>& rows);

std::string identity_csv(const std::vector<IdentityReport>& reports);
std::string identity_table(const std::vector<IdentityReport>& reports);

struct RunOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::size_t> replicates;
    unsigned jobs = 0;
    std::optional<bool> emit_svg;
};

/**
 * Runs every scenario and writes <output_dir>/<scenario>.csv (and .svg).
 * Returns 0 on success. On failure writes a JSON error record to `err` and
 * to <output_dir>/error.json and returns 1.
 */
int run_manifest(RunManifest manifest, const RunOverrides& overrides, std::ostream& log,
                 std::ostream& err);

/// Runs the identity suite, prints the report table; 0 iff all pass.
int run_verify(const SuiteOptions& opts, std::ostream& out, std::ostream& err,
               const std::optional<std::string>& csv_path = std::nullopt);

}  // namespace pshrink
