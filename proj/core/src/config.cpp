#include "sbs/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sbs/errors.hpp"

namespace sbs {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        throw input_error("config: bad number for " + key + ": '" + value + "'");
    return v;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void RunConfig::validate() const {
    if (degree < 1) throw input_error("config: degree must be at least 1");
    if (!(integrator_rtol > 0.0)) throw input_error("config: integrator_rtol must be positive");
    if (!(bs_tol > 0.0)) throw input_error("config: bs_tol must be positive");
    if (!(arg_tol > 0.0)) throw input_error("config: arg_tol must be positive");
    if (!(hausdorff_tol > 0.0)) throw input_error("config: hausdorff_tol must be positive");
    if (!(epsilon_zero > 0.0)) throw input_error("config: epsilon_zero must be positive");
    if (out_dir.empty()) throw input_error("config: out_dir must not be empty");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw input_error("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            throw input_error("config: empty value for " + key);

        if (key == "degree") {
            cfg.degree = int(parse_double(key, value));
        } else if (key == "integrator_rtol") {
            cfg.integrator_rtol = parse_double(key, value);
        } else if (key == "bs_tol") {
            cfg.bs_tol = parse_double(key, value);
        } else if (key == "arg_tol") {
            cfg.arg_tol = parse_double(key, value);
        } else if (key == "hausdorff_tol") {
            cfg.hausdorff_tol = parse_double(key, value);
        } else if (key == "epsilon_zero") {
            cfg.epsilon_zero = parse_double(key, value);
        } else if (key == "seed") {
            errno = 0;
            char* end = nullptr;
            cfg.seed = std::strtoull(value.c_str(), &end, 10);
            if (end == value.c_str() || *end != '\0' || errno == ERANGE)
                throw input_error("config: bad seed '" + value + "'");
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            throw input_error("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

std::string format_config(const RunConfig& cfg) {
    std::string out;
    out += "# tolerances are dimensionless; phases in radians\n";
    out += "degree = " + std::to_string(cfg.degree) + "\n";
    out += "integrator_rtol = " + fmt_double(cfg.integrator_rtol) + "  # ODE controller, relative\n";
    out += "bs_tol = " + fmt_double(cfg.bs_tol) + "  # holonomy phase defect\n";
    out += "arg_tol = " + fmt_double(cfg.arg_tol) + "  # arg(alpha) deviation\n";
    out += "hausdorff_tol = " + fmt_double(cfg.hausdorff_tol) + "  # chordal loop comparison\n";
    out += "epsilon_zero = " + fmt_double(cfg.epsilon_zero) + "  # chordal exclusion around zeros of s\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "out_dir = " + cfg.out_dir + "\n";
    return out;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write config file: " + path);
    out << format_config(cfg);
}

} // namespace sbs
