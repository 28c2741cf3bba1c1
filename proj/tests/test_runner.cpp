#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pshrink/runner.h"
#include "pshrink/svg.h"

using namespace pshrink;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pshrink_test_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST_CASE("run writes CSV and SVG") {
    const fs::path out = scratch("run");
    RunManifest m = parse_config(
        "replicates = 2000\n[u]\np = 10\nn = 5\ncov = spiked\nestimators = usual, js\n"
        "theta_norms = 0, 2\n");
    RunOverrides ov;
    ov.output_dir = out.string();
    std::ostringstream log, err;
    REQUIRE(run_manifest(m, ov, log, err) == 0);
    const std::string csv = slurp(out / "u.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == kRiskCsvHeader);
    int rows = 0;
    for (std::string line; std::getline(lines, line);) {
        ++rows;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 9);
        if (f[4] == "usual") {
            const double risk = std::stod(f[7]);
            const double se = std::stod(f[8]);
            CHECK(std::abs(risk - 10.0) <= 3.0 * se);
        }
        CHECK(f[6] == "2000");
    }
    CHECK(rows == 4);

    const std::string svg = slurp(out / "u.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);

    // Same seed, different jobs: byte-identical.
    const fs::path out2 = scratch("run2");
    ov.output_dir = out2.string();
    ov.jobs = 3;
    ov.emit_svg = false;
    REQUIRE(run_manifest(m, ov, log, err) == 0);
    CHECK(slurp(out2 / "u.csv") == csv);
    CHECK_FALSE(fs::exists(out2 / "u.svg"));

    ov.replicates = 100;
    REQUIRE(run_manifest(m, ov, log, err) == 0);
    CHECK(slurp(out2 / "u.csv").find(",100,") != std::string::npos);
}

TEST_CASE("run failure produces a JSON error record") {
    const fs::path out = scratch("fail");
    RunManifest m;
    ScenarioConfig cfg;
    cfg.name = "broken";
    cfg.p = 10;
    cfg.n = 2;  // invalid: min(p, n) < 3
    cfg.estimators = {UsualEstimator{}};
    m.scenarios = {cfg};
    RunOverrides ov;
    ov.output_dir = out.string();
    std::ostringstream log, err;
    CHECK(run_manifest(m, ov, log, err) != 0);
    const auto record = nlohmann::json::parse(err.str());
    CHECK(record["status"] == "error");
    CHECK(record["scenario"] == "broken");
    CHECK(record.contains("message"));
    CHECK(fs::exists(out / "error.json"));
}

TEST_CASE("verify table and CSV") {
    SuiteOptions opts;
    opts.only = "div_x";
    opts.configs_per_pair = 5;
    const fs::path out = scratch("verify");
    fs::create_directories(out);
    std::ostringstream o, e;
    CHECK(run_verify(opts, o, e, (out / "v.csv").string()) == 0);
    CHECK(o.str().find("div_x") != std::string::npos);
    const std::string csv = slurp(out / "v.csv");
    CHECK(csv.rfind(kIdentityCsvHeader, 0) == 0);
    CHECK(csv.find("div_x,") != std::string::npos);
}

TEST_CASE("svg helpers") {
    CHECK(svg::escape_xml("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
    const auto t = svg::nice_ticks(0, 10, 5);
    CHECK(t.front() == 0.0);
    CHECK(t.back() >= 10.0);
    svg::LineChart chart;
    chart.series = {{"a", {0, 1}, {1, 2}}};
    const std::string a = chart.render();
    CHECK(a == chart.render());
    chart.series.push_back({"bad", {0}, {}});
    CHECK_THROWS(chart.render());
}
