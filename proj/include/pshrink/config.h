#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pshrink/risk.h"

namespace pshrink {

struct RunManifest {
    std::vector<ScenarioConfig> scenarios;
    std::string output_dir = "results";
    bool emit_svg = true;
    std::uint64_t master_seed = 20130101;
};

/**
 * Parses the INI-style experiment config.
 *
 *   # comment
 *   master_seed = 42          global keys come before the first section
 *   replicates  = 10000
 *   output_dir  = results
 *   emit_svg    = true
 *   estimators  = usual, js, js+
 *
 *   [spiked_p10_n5]           one section per scenario
 *   p = 10
 *   n = 5
 *   cov = spiked              identity | spiked | ar | block
 *   rho = 0.5                 ar / block only (default 0.5)
 *
 * Optional scenario keys: estimators, theta_norms, theta_direction,
 * replicates, seed. Estimator tokens: usual, js, js:A, js+, js+:A,
 * baranchik:const:A, baranchik:min:A, baranchik:sat:A; bare js and js+
 * take the midpoint constant for (p, n).
 *
 * Syntax errors throw ErrorKind::Parse with the line number; invalid
 * values throw ErrorKind::Validation naming the field.
 */
RunManifest parse_config(const std::string& text);

RunManifest load_config(const std::string& path);

/// Parses one estimator token for a scenario of dimensions (p, n).
EstimatorSpec parse_estimator(const std::string& token, int p, int n);

}  // namespace pshrink
