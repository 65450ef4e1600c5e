#include "hjh/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hjh {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, kv] : sections_) {
        if (!first) out << "\n";
        first = false;
        out << "[" << section << "]\n";
        for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    }
    return out.str();
}

void Config::save(const std::string& path, const std::string& header_comment) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    if (!header_comment.empty()) {
        std::istringstream hc(header_comment);
        std::string line;
        while (std::getline(hc, line)) out << "# " << line << "\n";
    }
    out << serialize();
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key))
        throw std::invalid_argument("missing config key [" + section + "] " + key);
    return it->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) {
    if (!has(section, key)) set(section, key, fallback);
    return get(section, key);
}

double Config::get_double(const std::string& section, const std::string& key) {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config key [" + section + "] " + key +
                                    " is not a number: " + v);
    }
}

double Config::get_double_or(const std::string& section, const std::string& key, double fallback) {
    if (!has(section, key)) set_double(section, key, fallback);
    return get_double(section, key);
}

int Config::get_int_or(const std::string& section, const std::string& key, int fallback) {
    if (!has(section, key)) set_int(section, key, fallback);
    return static_cast<int>(get_double(section, key));
}

std::uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) {
    if (!has(section, key)) set(section, key, std::to_string(fallback));
    return std::stoull(get(section, key));
}

std::vector<double> Config::get_list_or(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) {
    if (!has(section, key)) set_list(section, key, fallback);
    std::vector<double> out;
    std::istringstream in(get(section, key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}
void Config::set_double(const std::string& section, const std::string& key, double value) {
    set(section, key, format_double(value));
}
void Config::set_int(const std::string& section, const std::string& key, long long value) {
    set(section, key, std::to_string(value));
}
void Config::set_list(const std::string& section, const std::string& key,
                      const std::vector<double>& values) {
    std::string s;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) s += ",";
        s += format_double(values[k]);
    }
    set(section, key, s);
}

std::vector<std::string> Config::validate_model_section() const {
    std::vector<std::string> problems;
    if (!has("model", "kind")) {
        problems.push_back("[model] kind: missing");
        return problems;
    }
    const std::string kind = get("model", "kind");
    static const char* kinds[] = {"h1_potential", "h2_speed", "deterministic",
                                  "periodic_potential", "slow_rate"};
    bool known = false;
    for (auto* k : kinds) known = known || kind == k;
    if (!known) problems.push_back("[model] kind: unknown value '" + kind + "'");
    if (has("model", "dimension")) {
        const std::string d = get("model", "dimension");
        if (d != "1" && d != "2") problems.push_back("[model] dimension: must be 1 or 2");
    }
    for (const char* key : {"intensity", "bump_height", "bump_radius", "a_min", "a_max"}) {
        if (!has("model", key)) continue;
        try {
            (void)std::stod(get("model", key));
        } catch (...) {
            problems.push_back(std::string("[model] ") + key + ": not a number");
        }
    }
    return problems;
}

HamiltonianModel model_from_config(Config& cfg) {
    auto problems = cfg.validate_model_section();
    if (!problems.empty()) {
        std::string msg = "invalid model configuration:";
        for (auto& p : problems) msg += "\n  " + p;
        throw std::invalid_argument(msg);
    }

    ModelSpec spec;
    const std::string kind = cfg.get("model", "kind");
    if (kind == "h1_potential") spec.kind = ModelKind::h1_potential;
    else if (kind == "h2_speed") spec.kind = ModelKind::h2_speed;
    else if (kind == "deterministic") spec.kind = ModelKind::deterministic;
    else if (kind == "periodic_potential") spec.kind = ModelKind::periodic_potential;
    else spec.kind = ModelKind::slow_rate;

    spec.dimension = cfg.get_int_or("model", "dimension", 2);
    const std::string pot = cfg.get_or("model", "potential",
                                       spec.kind == ModelKind::periodic_potential ? "periodic"
                                                                                  : "poisson");
    if (pot == "zero") spec.potential = PotentialKind::zero;
    else if (pot == "poisson") spec.potential = PotentialKind::poisson;
    else if (pot == "checker_uniform") spec.potential = PotentialKind::checker_uniform;
    else if (pot == "periodic") spec.potential = PotentialKind::periodic;
    else if (pot == "quasiperiodic") spec.potential = PotentialKind::quasiperiodic;
    else throw std::invalid_argument("[model] potential: unknown value '" + pot + "'");

    spec.intensity = cfg.get_double_or("model", "intensity", 1.0);
    spec.bump_height = cfg.get_double_or("model", "bump_height", 1.0);
    spec.bump_radius = cfg.get_double_or("model", "bump_radius", 0.35);
    spec.amp = cfg.get_double_or("model", "amp", 1.0);
    spec.amp2 = cfg.get_double_or("model", "amp2", 1.0);
    spec.period = cfg.get_double_or("model", "period", 1.0);
    spec.a_min = cfg.get_double_or("model", "a_min", 1.0);
    spec.a_max = cfg.get_double_or("model", "a_max", 1.0);
    spec.a_random = cfg.get_int_or("model", "a_random", 0) != 0;
    spec.one_homogeneous = cfg.get_int_or("model", "one_homogeneous", 0) != 0;
    spec.a0 = cfg.get_double_or("model", "a0", 1.0);

    if (spec.kind == ModelKind::slow_rate) {
        auto rho_d = cfg.get_list_or("model", "rho_delta", {0.0, 0.25, 0.5, 0.75, 1.0});
        auto rho_v = cfg.get_list_or("model", "rho_value", {0.0, 0.25, 0.5, 0.75, 1.0});
        return build_slow_rate_model(rho_d, rho_v, spec);
    }
    return build_model(spec);
}

}  // namespace hjh
