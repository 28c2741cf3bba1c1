#include "pshrink/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace pshrink {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void validation_error(const std::string& where, const std::string& field,
                                   const std::string& msg) {
    throw Error(ErrorKind::Validation, where + ": " + field + ": " + msg);
}

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::map<std::string, Entry> keys;
};

double to_double(const Entry& e, const std::string& key) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        parse_error(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
    }
    return v;
}

long long to_integer(const Entry& e, const std::string& key) {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        parse_error(e.line, "'" + key + "' expects an integer, got '" + e.value + "'");
    }
    return v;
}

std::uint64_t to_seed(const Entry& e, const std::string& key) {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        parse_error(e.line, "'" + key + "' expects an unsigned integer, got '" + e.value + "'");
    }
    return v;
}

bool to_bool(const Entry& e, const std::string& key) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    parse_error(e.line, "'" + key + "' expects true or false, got '" + e.value + "'");
}

std::vector<double> to_doubles(const Entry& e, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(e.value)) {
        out.push_back(to_double(Entry{item, e.line}, key));
    }
    return out;
}

bool valid_name(const std::string& name) {
    return !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

const std::set<std::string> kGlobalKeys = {"master_seed", "replicates", "output_dir", "emit_svg",
                                           "estimators"};
const std::set<std::string> kScenarioKeys = {"p",          "n",               "cov",
                                             "rho",        "estimators",      "theta_norms",
                                             "theta_direction", "replicates", "seed"};

}  // namespace

EstimatorSpec parse_estimator(const std::string& token, int p, int n) {
    std::vector<std::string> parts;
    std::stringstream ss(token);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));

    auto number = [&](const std::string& s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw Error(ErrorKind::Validation, "estimators: bad constant in '" + token + "'");
        }
        return v;
    };

    const std::string& kind = parts.at(0);
    EstimatorSpec spec = UsualEstimator{};
    if (kind == "usual" && parts.size() == 1) {
        spec = UsualEstimator{};
    } else if ((kind == "js" || kind == "js+") && parts.size() <= 2) {
        double a = 0.0;
        if (parts.size() == 2) {
            a = number(parts[1]);
        } else {
            try {
                a = js_default_constant(p, n);
            } catch (const Error& e) {
                throw Error(ErrorKind::Validation, std::string("estimators: ") + e.what());
            }
        }
        spec = kind == "js" ? EstimatorSpec{JamesStein{a}} : EstimatorSpec{PositivePartJS{a}};
    } else if (kind == "baranchik" && parts.size() == 3) {
        const double a = number(parts[2]);
        if (parts[1] == "const") {
            spec = Baranchik{ShrinkageFunction::constant(a)};
        } else if (parts[1] == "min") {
            spec = Baranchik{ShrinkageFunction::capped_linear(a)};
        } else if (parts[1] == "sat") {
            spec = Baranchik{ShrinkageFunction::saturating(a)};
        } else {
            throw Error(ErrorKind::Validation, "estimators: unknown shrinkage function '" +
                                                   parts[1] + "'");
        }
    } else {
        throw Error(ErrorKind::Validation, "estimators: unknown estimator '" + token + "'");
    }
    try {
        validate_estimator(spec);
    } catch (const Error& e) {
        throw Error(ErrorKind::Validation, std::string("estimators: ") + e.what());
    }
    return spec;
}

RunManifest parse_config(const std::string& text) {
    Section global{"", 0, {}};
    std::vector<Section> sections;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') parse_error(line_no, "unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_name(name)) {
                parse_error(line_no, "scenario name '" + name +
                                         "' must use letters, digits, '_', '-' or '.'");
            }
            for (const Section& s : sections) {
                if (s.name == name) {
                    parse_error(line_no, "duplicate scenario name '" + name + "'");
                }
            }
            sections.push_back(Section{name, line_no, {}});
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) parse_error(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) parse_error(line_no, "missing key");
        if (value.empty()) parse_error(line_no, "missing value for '" + key + "'");

        Section& target = sections.empty() ? global : sections.back();
        const auto& allowed = sections.empty() ? kGlobalKeys : kScenarioKeys;
        if (!allowed.count(key)) {
            parse_error(line_no, "unknown key '" + key + "'" +
                                     (sections.empty() ? " in global section"
                                                       : " in scenario '" + target.name + "'"));
        }
        if (target.keys.count(key)) parse_error(line_no, "duplicate key '" + key + "'");
        target.keys[key] = Entry{value, line_no};
    }

    RunManifest manifest;
    std::size_t default_reps = 10000;
    std::optional<Entry> default_estimators;
    const auto& g = global.keys;
    if (auto it = g.find("master_seed"); it != g.end()) {
        manifest.master_seed = to_seed(it->second, "master_seed");
    }
    if (auto it = g.find("replicates"); it != g.end()) {
        const long long r = to_integer(it->second, "replicates");
        if (r < 1) validation_error("global", "replicates", "must be >= 1");
        default_reps = static_cast<std::size_t>(r);
    }
    if (auto it = g.find("output_dir"); it != g.end()) manifest.output_dir = it->second.value;
    if (auto it = g.find("emit_svg"); it != g.end()) {
        manifest.emit_svg = to_bool(it->second, "emit_svg");
    }
    if (auto it = g.find("estimators"); it != g.end()) default_estimators = it->second;

    for (const Section& sec : sections) {
        const std::string where = "scenario '" + sec.name + "' (line " + std::to_string(sec.line) + ")";
        const auto& k = sec.keys;
        ScenarioConfig cfg;
        cfg.name = sec.name;
        cfg.master_seed = manifest.master_seed;
        cfg.replicates = default_reps;

        for (const char* required : {"p", "n", "cov"}) {
            if (!k.count(required)) validation_error(where, required, "is required");
        }
        cfg.p = static_cast<int>(to_integer(k.at("p"), "p"));
        cfg.n = static_cast<int>(to_integer(k.at("n"), "n"));

        const std::string cov = k.at("cov").value;
        const auto rho_it = k.find("rho");
        const double rho = rho_it != k.end() ? to_double(rho_it->second, "rho") : 0.5;
        if (cov == "identity") {
            cfg.cov = IdentityCov{};
        } else if (cov == "spiked") {
            cfg.cov = Spiked{};
        } else if (cov == "ar") {
            cfg.cov = Autoregressive{rho};
        } else if (cov == "block") {
            cfg.cov = BlockDiagonal{rho};
        } else {
            validation_error(where, "cov", "unknown covariance '" + cov +
                                               "' (expected identity, spiked, ar or block)");
        }
        if (rho_it != k.end() && cov != "ar" && cov != "block") {
            validation_error(where, "rho", "only applies to cov = ar or block");
        }

        if (auto it = k.find("replicates"); it != k.end()) {
            const long long r = to_integer(it->second, "replicates");
            if (r < 1) validation_error(where, "replicates", "must be >= 1");
            cfg.replicates = static_cast<std::size_t>(r);
        }
        if (auto it = k.find("seed"); it != k.end()) cfg.master_seed = to_seed(it->second, "seed");
        if (auto it = k.find("theta_norms"); it != k.end()) {
            cfg.theta_norms = to_doubles(it->second, "theta_norms");
            if (cfg.theta_norms.empty()) validation_error(where, "theta_norms", "is empty");
        } else if (cfg.p >= 1) {
            cfg.theta_norms = default_theta_norms(cfg.p);
        }
        if (auto it = k.find("theta_direction"); it != k.end()) {
            const std::vector<double> d = to_doubles(it->second, "theta_direction");
            cfg.theta_direction = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
        }

        const auto est_it = k.find("estimators");
        const std::optional<Entry> est_entry =
            est_it != k.end() ? std::optional<Entry>(est_it->second) : default_estimators;
        if (!est_entry) validation_error(where, "estimators", "is required");

        try {
            validate_scenario(cfg);
        } catch (const Error& e) {
            std::string msg = e.what();
            const std::string own = "scenario '" + cfg.name + "': ";
            if (msg.rfind(own, 0) == 0) msg.erase(0, own.size());
            throw Error(ErrorKind::Validation, where + ": " + msg);
        }
        for (const std::string& token : split_list(est_entry->value)) {
            try {
                cfg.estimators.push_back(parse_estimator(token, cfg.p, cfg.n));
            } catch (const Error& e) {
                validation_error(where, "estimators", e.what());
            }
        }
        if (cfg.estimators.empty()) validation_error(where, "estimators", "is empty");
        manifest.scenarios.push_back(std::move(cfg));
    }
    if (manifest.scenarios.empty()) {
        throw Error(ErrorKind::Validation, "config defines no scenario sections");
    }
    return manifest;
}

RunManifest load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace pshrink
