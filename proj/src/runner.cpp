#include "pshrink/runner.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pshrink/svg.h"

namespace pshrink {

namespace fs = std::filesystem;

namespace {

std::string g10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace

std::string risk_csv(const std::vector<RiskRow>& rows) {
    std::ostringstream o;
    o << kRiskCsvHeader << '\n';
    for (const RiskRow& r : rows) {
        o << r.scenario << ',' << r.p << ',' << r.n << ',' << r.cov_model << ',' << r.estimator
          << ',' << g10(r.theta_norm) << ',' << r.risk.replicates << ',' << g10(r.risk.mean_loss)
          << ',' << g10(r.risk.std_error) << '\n';
    }
    return o.str();
}

std::string risk_svg(const ScenarioConfig& cfg, const std::vector<RiskRow>& rows) {
    svg::LineChart chart;
    chart.title = cfg.name + " (p=" + std::to_string(cfg.p) + ", n=" + std::to_string(cfg.n) +
                  ", " + covariance_label(cfg.cov) + ")";
    chart.x_label = "||theta||";
    chart.y_label = "invariant risk";
    chart.reference_y = static_cast<double>(cfg.p);
    chart.reference_label = "p = " + std::to_string(cfg.p);

    std::map<std::string, std::size_t> index;
    for (const RiskRow& r : rows) {
        auto [it, inserted] = index.emplace(r.estimator, chart.series.size());
        if (inserted) chart.series.push_back(svg::Series{r.estimator, {}, {}});
        chart.series[it->second].x.push_back(r.theta_norm);
        chart.series[it->second].y.push_back(r.risk.mean_loss);
    }
    return chart.render();
}

std::string identity_csv(const std::vector<IdentityReport>& reports) {
    std::ostringstream o;
    o << kIdentityCsvHeader << '\n';
    for (const IdentityReport& r : reports) {
        o << r.name << ',' << g10(r.analytic.norm()) << ',' << g10(r.oracle.norm()) << ','
          << g10(r.abs_err) << ',' << g10(r.rel_err) << ',' << g10(r.tolerance) << ','
          << (r.pass ? "true" : "false") << ',' << r.detail << '\n';
    }
    return o.str();
}

std::string identity_table(const std::vector<IdentityReport>& reports) {
    std::ostringstream o;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %14s %14s %11s %11s  %-4s  %s\n", "identity",
                  "analytic", "oracle", "rel_err", "tolerance", "pass", "case");
    o << line;
    for (const IdentityReport& r : reports) {
        // Matrix-valued reports show Frobenius norms.
        const double a = r.analytic.size() == 1 ? r.analytic_value() : r.analytic.norm();
        const double b = r.oracle.size() == 1 ? r.oracle_value() : r.oracle.norm();
        std::snprintf(line, sizeof line, "%-20s %14.7g %14.7g %11.3e %11.3e  %-4s  %s\n",
                      r.name.c_str(), a, b, r.rel_err, r.tolerance, r.pass ? "ok" : "FAIL",
                      r.detail.c_str());
        o << line;
    }
    return o.str();
}

int run_manifest(RunManifest manifest, const RunOverrides& overrides, std::ostream& log,
                 std::ostream& err) {
    if (overrides.output_dir) manifest.output_dir = *overrides.output_dir;
    if (overrides.emit_svg) manifest.emit_svg = *overrides.emit_svg;
    const fs::path out_dir(manifest.output_dir);

    std::string current;
    try {
        fs::create_directories(out_dir);
        RunOptions opts;
        opts.jobs = overrides.jobs;
        for (ScenarioConfig cfg : manifest.scenarios) {
            current = cfg.name;
            if (overrides.replicates) cfg.replicates = *overrides.replicates;
            const std::vector<RiskRow> rows = risk_curve(cfg, opts);
            write_file(out_dir / (cfg.name + ".csv"), risk_csv(rows));
            if (manifest.emit_svg) write_file(out_dir / (cfg.name + ".svg"), risk_svg(cfg, rows));
            log << "wrote " << cfg.name << " (" << rows.size() << " rows, " << cfg.replicates
                << " replicates)\n";
        }
    } catch (const std::exception& e) {
        nlohmann::json record = {{"status", "error"}, {"scenario", current}, {"message", e.what()}};
        if (const auto* se = dynamic_cast<const ScenarioError*>(&e)) {
            record["replicate"] = se->replicate();
        }
        if (const auto* pe = dynamic_cast<const Error*>(&e)) record["kind"] = to_string(pe->kind());
        err << record.dump() << '\n';
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        std::ofstream(out_dir / "error.json") << record.dump(2) << '\n';
        return 1;
    }
    return 0;
}

int run_verify(const SuiteOptions& opts, std::ostream& out, std::ostream& err,
               const std::optional<std::string>& csv_path) {
    std::vector<IdentityReport> reports;
    try {
        reports = verify_suite(opts);
        if (csv_path) write_file(*csv_path, identity_csv(reports));
    } catch (const std::exception& e) {
        nlohmann::json record = {{"status", "error"}, {"message", e.what()}};
        if (const auto* pe = dynamic_cast<const Error*>(&e)) record["kind"] = to_string(pe->kind());
        err << record.dump() << '\n';
        return 2;
    }
    out << identity_table(reports);
    bool ok = true;
    for (const IdentityReport& r : reports) {
        if (!r.pass) {
            ok = false;
            err << "FAILED: " << r.name << " (" << r.detail << ")\n";
        }
    }
    return ok ? 0 : 1;
}

}  // namespace pshrink
