#pragma once

#include <cstdint>
#include <string>

namespace sbs {

// Tolerances and seeds are the identity of an experiment: two runs with the
// same RunConfig must produce byte-identical primary outputs.
struct RunConfig {
    int degree = 2;
    double integrator_rtol = 1e-10;
    double bs_tol = 1e-6;
    double arg_tol = 1e-5;
    double hausdorff_tol = 1e-3;
    double epsilon_zero = 1e-4;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    void validate() const;  // throws on nonpositive tolerances or bad degree

    bool operator==(const RunConfig&) const = default;
};

// Flat key = value text, '#' comments, unknown keys rejected. Formatting
// uses enough digits that parse(format(c)) == c exactly.
RunConfig parse_config(const std::string& text);
std::string format_config(const RunConfig& cfg);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

} // namespace sbs
