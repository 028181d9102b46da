// Command line front end: verify one (section, loop) pair, find the special
// cycles of a section, or scan a family of sections into a report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sbs/config.hpp"
#include "sbs/errors.hpp"
#include "sbs/foliation_tracer.hpp"
#include "sbs/io.hpp"
#include "sbs/moduli_scanner.hpp"
#include "sbs/ode.hpp"
#include "sbs/transport.hpp"
#include "sbs/variational_oracle.hpp"

namespace {

using namespace sbs;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int degree = 0;
    bool degree_set = false;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (args.degree_set) cfg.degree = args.degree;
    cfg.validate();
    default_integrator_rtol() = cfg.integrator_rtol;
    return cfg;
}

void emit(const std::string& out_path, const std::string& text,
          const std::string& status_line) {
    if (out_path.empty()) {
        std::cerr << status_line << "\n";
        std::cout << text << "\n";
    } else {
        write_text_file(out_path, text);
        std::cout << status_line << " -> " << out_path << "\n";
    }
}

double fiber_agreement(const std::vector<SpecialCycleCertificate>& certs,
                       const std::vector<LoopSample>& oracle) {
    if (certs.empty() || oracle.empty()) return -1.0;
    double worst = 0.0;
    for (const auto& c : certs) {
        double best = 2.0;
        for (const auto& o : oracle) best = std::min(best, loop_hausdorff(c.loop, o));
        worst = std::max(worst, best);
    }
    for (const auto& o : oracle) {
        double best = 2.0;
        for (const auto& c : certs) best = std::min(best, loop_hausdorff(c.loop, o));
        worst = std::max(worst, best);
    }
    return worst;
}

int cmd_verify(const CommonArgs& args, const std::string& section_path,
               const std::string& loop_path) {
    RunConfig cfg = resolve_config(args);
    PolynomialSection s = section_from_json(read_text_file(section_path));
    if (args.degree_set && args.degree != s.degree)
        throw input_error("--degree disagrees with the section file");
    LoopSample loop = loop_from_json(read_text_file(loop_path));

    VerifyOutcome v;
    v.degree = s.degree;
    try {
        v.bs = is_bohr_sommerfeld(s.degree, loop, cfg.bs_tol);
        v.have_bs = true;
        v.trace = alpha_trace_unchecked(s, loop);
        v.have_trace = true;
        v.winding_area_residual = winding_area_check(s, loop, cfg.bs_tol);

        CertifyOptions co;
        co.arg_tol = cfg.arg_tol;
        co.bs_tol = cfg.bs_tol;
        co.area_tol = cfg.bs_tol;
        co.zero_exclusion = cfg.epsilon_zero;
        v.certificate = certify_loop(s, loop, co);
        v.have_certificate = true;
        v.certified = true;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::rejection) throw;
        v.certified = false;
        v.reason = e.what();
    }

    emit(args.out_path, verify_report_json(v),
         v.certified ? "certified" : "rejected: " + v.reason);
    return v.certified ? 0 : 1;
}

int cmd_find(const CommonArgs& args, const std::string& section_path,
             const std::string& svg_path) {
    RunConfig cfg = resolve_config(args);
    PolynomialSection s = section_from_json(read_text_file(section_path));
    if (args.degree_set && args.degree != s.degree)
        throw input_error("--degree disagrees with the section file");

    auto certs = find_special_cycles(s);
    auto oracle = oracle_find_special(s, 3, cfg.seed);
    double agreement = fiber_agreement(certs, oracle);

    char line[160];
    std::snprintf(line, sizeof(line),
                  "fiber size %zu (oracle found %zu, agreement %.3g)", certs.size(),
                  oracle.size(), agreement);
    emit(args.out_path, find_report_json(certs, oracle.size(), agreement, cfg.seed),
         line);

    if (!svg_path.empty()) {
        std::vector<LoopSample> loops;
        for (const auto& c : certs) loops.push_back(c.loop);
        write_text_file(svg_path, render_svg(s, loops));
        std::cout << "svg -> " << svg_path << "\n";
    }
    return 0;
}

int cmd_scan(const CommonArgs& args, const std::string& spec_path, bool svg_gallery) {
    RunConfig cfg = resolve_config(args);
    ScanSpec spec = spec_path.empty() ? ScanSpec{} : scan_spec_from_text(read_text_file(spec_path));
    if (args.seed_set) spec.seed = args.seed;

    ScanReport report = scan(spec, cfg.degree);
    std::string dir = args.out_path.empty() ? cfg.out_dir : args.out_path;
    write_report(report, dir, svg_gallery);

    std::cout << "scanned " << report.records.size() << " sections -> " << dir << "\n";
    for (std::size_t k = 0; k < report.fiber_histogram.size(); ++k)
        if (report.fiber_histogram[k] > 0)
            std::cout << "  fiber " << k << ": " << report.fiber_histogram[k]
                      << " records\n";
    int failures = 0;
    for (const auto& r : report.records)
        if (!r.failure.empty()) ++failures;
    if (failures > 0) std::cout << "  " << failures << " records flagged\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file");
    cmd->add_option("--out", args.out_path, "output file (or directory for scan)");
    auto* seed = cmd->add_option("--seed", args.seed, "override the config seed");
    seed->each([&args](const std::string&) { args.seed_set = true; });
    auto* deg = cmd->add_option("--degree", args.degree, "override the config degree");
    deg->each([&args](const std::string&) { args.degree_set = true; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"special Bohr-Sommerfeld cycles on the sphere"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string section_path, loop_path, spec_path, svg_path;
    bool svg_gallery = false;

    auto* verify = app.add_subcommand("verify", "certify one (section, loop) pair");
    add_common(verify, args);
    verify->add_option("--section", section_path, "section JSON file")->required();
    verify->add_option("--loop", loop_path, "loop JSON file")->required();

    auto* find = app.add_subcommand("find", "find the special cycles of a section");
    add_common(find, args);
    find->add_option("--section", section_path, "section JSON file")->required();
    find->add_option("--svg", svg_path, "also draw the result to this SVG file");

    auto* scan_cmd = app.add_subcommand("scan", "scan a family of sections");
    add_common(scan_cmd, args);
    scan_cmd->add_option("--spec", spec_path, "scan spec file (defaults apply if omitted)");
    scan_cmd->add_flag("--svg", svg_gallery, "write an SVG per record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(args, section_path, loop_path);
        if (find->parsed()) return cmd_find(args, section_path, svg_path);
        return cmd_scan(args, spec_path, svg_gallery);
    } catch (const sbs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case sbs::ErrorKind::rejection: return 1;
        case sbs::ErrorKind::bad_input: return 2;
        case sbs::ErrorKind::numeric: return 3;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
