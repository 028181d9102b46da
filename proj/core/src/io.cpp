#include "sbs/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sbs/errors.hpp"
#include "sbs/su2.hpp"

namespace sbs {

namespace {

using json = nlohmann::ordered_json;

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx cplx_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw input_error(std::string(what) + ": expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const char* chart_name(Chart c) { return c == Chart::Z ? "Z" : "W"; }

Chart chart_from(const std::string& s) {
    if (s == "Z") return Chart::Z;
    if (s == "W") return Chart::W;
    throw input_error("chart must be \"Z\" or \"W\", got \"" + s + "\"");
}

json point_json(const SpherePoint& p) {
    json j;
    j["chart"] = chart_name(p.chart);
    j["re"] = p.coord.real();
    j["im"] = p.coord.imag();
    return j;
}

SpherePoint point_from(const json& j) {
    if (!j.is_object() || !j.contains("chart") || !j.contains("re") || !j.contains("im"))
        throw input_error("loop point needs chart, re, im");
    return SpherePoint(chart_from(j["chart"].get<std::string>()),
                       cplx(j["re"].get<double>(), j["im"].get<double>()));
}

json parse_checked(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed ") + what + ": " + e.what());
    }
}

json loop_json_value(const LoopSample& loop) {
    json arr = json::array();
    for (const auto& p : loop.points) arr.push_back(point_json(p));
    json orient;
    orient["orientation"] = loop.orientation == Orientation::positive ? "+" : "-";
    arr.push_back(orient);
    return arr;
}

LoopSample loop_from_value(const json& arr) {
    if (!arr.is_array()) throw input_error("loop file must be a JSON array");
    LoopSample loop;
    loop.orientation = Orientation::positive;
    for (const auto& el : arr) {
        if (el.is_object() && el.contains("orientation")) {
            std::string o = el["orientation"].get<std::string>();
            if (o == "+") loop.orientation = Orientation::positive;
            else if (o == "-") loop.orientation = Orientation::negative;
            else throw input_error("orientation must be \"+\" or \"-\"");
            continue;
        }
        loop.points.push_back(point_from(el));
    }
    if (loop.points.size() < 3) throw input_error("loop needs at least 3 points");
    return loop;
}

json zero_json(const SectionZero& z) {
    json j = point_json(z.position);
    j["multiplicity"] = z.multiplicity;
    return j;
}

json certificate_json_value(const SpecialCycleCertificate& c) {
    json j;
    j["loop"] = loop_json_value(c.loop);
    j["arg_deviation"] = c.arg_deviation;
    j["phase_defect"] = c.phase_defect;
    j["area"] = c.area;
    j["winding"] = c.winding;
    j["min_zero_distance"] = c.min_zero_distance;
    j["separates"] = json::array();
    for (const auto& [zero, side] : c.separates) {
        json e;
        e["zero"] = zero_json(zero);
        e["side"] = side == Side::left ? "left" : "right";
        j["separates"].push_back(e);
    }
    j["junction_angles"] = c.junction_angles;
    j["provenance"] = {{"trace_ids", c.seed_traces},
                       {"from_zero_curve", c.from_zero_curve}};
    return j;
}

json section_json_value(const PolynomialSection& s) {
    PolynomialSection n = normalize_section(s);
    json coeffs = json::array();
    for (const auto& c : n.coeffs) coeffs.push_back(cplx_json(c));
    json j;
    j["degree"] = n.degree;
    j["coeffs"] = coeffs;
    return j;
}

json record_json_value(const ModuliRecord& r) {
    json j;
    j["section"] = section_json_value(r.section);
    j["zeros"] = json::array();
    for (const auto& z : r.zeros) j["zeros"].push_back(zero_json(z));
    j["discriminant"] = r.discriminant;
    j["cycles"] = json::array();
    for (const auto& c : r.cycles) j["cycles"].push_back(certificate_json_value(c));
    j["fiber_size"] = r.fiber_size;
    j["method_agreement"] = r.method_agreement;
    j["near_discriminant"] = r.near_discriminant;
    j["failure"] = r.failure;
    return j;
}

std::string fmt_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

std::string loop_to_json(const LoopSample& loop) {
    return loop_json_value(loop).dump();
}

LoopSample loop_from_json(const std::string& text) {
    return loop_from_value(parse_checked(text, "loop JSON"));
}

std::string loop_to_csv(const LoopSample& loop) {
    std::string out = "chart,re,im\n";
    char buf[96];
    for (const auto& p : loop.points) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", chart_name(p.chart),
                      p.coord.real(), p.coord.imag());
        out += buf;
    }
    return out;
}

std::string section_to_json(const PolynomialSection& s) {
    return section_json_value(s).dump();
}

PolynomialSection section_from_json(const std::string& text) {
    json j = parse_checked(text, "section JSON");
    if (!j.is_object() || !j.contains("degree") || !j.contains("coeffs"))
        throw input_error("section JSON needs degree and coeffs");
    int degree = j["degree"].get<int>();
    std::vector<cplx> coeffs;
    for (const auto& c : j["coeffs"]) coeffs.push_back(cplx_from(c, "coefficient"));
    return PolynomialSection(degree, std::move(coeffs));
}

std::string transport_to_json(const TransportResult& r) {
    json j;
    j["holonomy"] = cplx_json(r.holonomy);
    j["phase_defect"] = r.phase_defect;
    j["norm_drift"] = r.norm_drift;
    j["sigma_samples"] = json::array();
    for (const auto& v : r.sigma_samples) j["sigma_samples"].push_back(cplx_json(v));
    return j.dump(2);
}

std::string alpha_trace_to_json(const AlphaTrace& t) {
    json j;
    j["alpha"] = json::array();
    for (const auto& v : t.alpha) j["alpha"].push_back(cplx_json(v));
    j["arg_deviation"] = t.arg_deviation;
    j["winding"] = t.winding;
    j["min_modulus"] = t.min_modulus;
    return j.dump(2);
}

std::string certificate_to_json(const SpecialCycleCertificate& c) {
    return certificate_json_value(c).dump(2);
}

std::string certificates_to_json(const std::vector<SpecialCycleCertificate>& cs,
                                 std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["count"] = cs.size();
    j["certificates"] = json::array();
    for (const auto& c : cs) j["certificates"].push_back(certificate_json_value(c));
    return j.dump(2);
}

std::string verify_report_json(const VerifyOutcome& v) {
    json j;
    j["status"] = v.certified ? "certified" : "rejected";
    if (!v.certified) j["reason"] = v.reason;
    j["degree"] = v.degree;
    if (v.have_bs) {
        j["bohr_sommerfeld"] = {{"satisfied", v.bs.satisfied},
                                {"phase_defect", v.bs.phase_defect},
                                {"area", v.bs.area},
                                {"holonomy", cplx_json(v.bs.holonomy)}};
    }
    if (v.have_trace) {
        json t;
        t["arg_deviation"] = v.trace.arg_deviation;
        t["winding"] = v.trace.winding;
        t["min_modulus"] = v.trace.min_modulus;
        j["alpha_trace"] = t;
    }
    if (v.winding_area_residual >= 0.0)
        j["winding_area_residual"] = v.winding_area_residual;
    if (v.have_certificate) j["certificate"] = certificate_json_value(v.certificate);
    return j.dump(2);
}

std::string find_report_json(const std::vector<SpecialCycleCertificate>& certs,
                             std::size_t oracle_count, double agreement,
                             std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["fiber_size"] = certs.size();
    j["oracle_count"] = oracle_count;
    j["method_agreement"] = agreement;
    j["certificates"] = json::array();
    for (const auto& c : certs) j["certificates"].push_back(certificate_json_value(c));
    return j.dump(2);
}

ScanSpec scan_spec_from_text(const std::string& text) {
    ScanSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r\n");
            if (a == std::string::npos) return std::string();
            std::size_t b = s.find_last_not_of(" \t\r\n");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw input_error("scan spec line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (key == "kind") {
            if (value == "random") spec.kind = ScanKind::random;
            else if (value == "veronese") spec.kind = ScanKind::veronese;
            else if (value == "grid") spec.kind = ScanKind::grid;
            else throw input_error("scan spec: unknown kind '" + value + "'");
        } else if (key == "count") {
            spec.count = std::atoi(value.c_str());
        } else if (key == "seed") {
            spec.seed = std::strtoull(value.c_str(), nullptr, 10);
        } else if (key == "min_zero_separation") {
            spec.min_zero_separation = std::atof(value.c_str());
        } else if (key == "oracle_starts") {
            spec.oracle_starts = std::atoi(value.c_str());
        } else if (key == "with_oracle") {
            spec.with_oracle = value == "1" || value == "true";
        } else if (key == "grid_points") {
            spec.grid_points = std::atoi(value.c_str());
        } else {
            throw input_error("scan spec: unknown key '" + key + "'");
        }
    }
    if (spec.count < 1) throw input_error("scan spec: count must be positive");
    return spec;
}

std::string scan_spec_to_text(const ScanSpec& spec) {
    std::string out;
    out += "kind = ";
    switch (spec.kind) {
    case ScanKind::random: out += "random"; break;
    case ScanKind::veronese: out += "veronese"; break;
    case ScanKind::grid: out += "grid"; break;
    }
    out += "\ncount = " + std::to_string(spec.count);
    out += "\nseed = " + std::to_string(spec.seed);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", spec.min_zero_separation);
    out += "\nmin_zero_separation = ";
    out += buf;
    out += "\noracle_starts = " + std::to_string(spec.oracle_starts);
    out += std::string("\nwith_oracle = ") + (spec.with_oracle ? "1" : "0");
    out += "\ngrid_points = " + std::to_string(spec.grid_points);
    out += "\n";
    return out;
}

std::string record_to_jsonl(const ModuliRecord& r) {
    return record_json_value(r).dump();
}

std::string report_summary_json(const ScanReport& rep) {
    json j;
    j["degree"] = rep.degree;
    switch (rep.spec.kind) {
    case ScanKind::random: j["kind"] = "random"; break;
    case ScanKind::veronese: j["kind"] = "veronese"; break;
    case ScanKind::grid: j["kind"] = "grid"; break;
    }
    j["count"] = rep.spec.count;
    j["seed"] = rep.spec.seed;
    j["min_zero_separation"] = rep.spec.min_zero_separation;
    j["oracle_starts"] = rep.spec.oracle_starts;
    j["with_oracle"] = rep.spec.with_oracle;
    json hist;
    for (std::size_t k = 0; k < rep.fiber_histogram.size(); ++k)
        hist[std::to_string(k)] = rep.fiber_histogram[k];
    j["fiber_histogram"] = hist;
    json curve = json::array();
    for (const auto& [disc, fiber] : rep.discriminant_curve)
        curve.push_back(json::array({disc, fiber}));
    j["discriminant_curve"] = curve;
    int failures = 0;
    for (const auto& r : rep.records)
        if (!r.failure.empty()) ++failures;
    j["failures"] = failures;
    return j.dump(2);
}

std::string report_summary_csv(const ScanReport& rep) {
    std::string out = "section,discriminant,fiber_size,agreement\n";
    char buf[160];
    for (const auto& r : rep.records) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g\n", r.discriminant,
                      r.fiber_size, r.method_agreement);
        out += "\"" + section_key(r.section) + "\",";
        out += buf;
    }
    return out;
}

void write_report(const ScanReport& rep, const std::string& dir, bool svg_gallery) {
    std::filesystem::create_directories(dir);
    auto path = [&](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };

    std::string jsonl;
    for (const auto& r : rep.records) {
        jsonl += record_to_jsonl(r);
        jsonl += '\n';
    }
    write_text_file(path("records.jsonl"), jsonl);
    write_text_file(path("summary.json"), report_summary_json(rep));
    write_text_file(path("summary.csv"), report_summary_csv(rep));

    // timing sits outside the deterministic set on purpose
    std::string timing = "section,wall_time_seconds\n";
    char buf[64];
    for (const auto& r : rep.records) {
        std::snprintf(buf, sizeof(buf), "%.6f\n", r.wall_time);
        timing += "\"" + section_key(r.section) + "\"," + buf;
    }
    write_text_file(path("timings.csv"), timing);

    if (svg_gallery) {
        for (std::size_t i = 0; i < rep.records.size(); ++i) {
            const auto& r = rep.records[i];
            std::vector<LoopSample> loops;
            for (const auto& c : r.cycles) loops.push_back(c.loop);
            char name[48];
            std::snprintf(name, sizeof(name), "record_%04zu.svg", i);
            write_text_file(path(name), render_svg(r.section, loops));
        }
    }
}

std::string optimize_log_csv(const OptimizeResult& result) {
    std::string out = "iteration,J,gradient_norm\n";
    char buf[96];
    for (const auto& row : result.history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", int(row[0]), row[1],
                      row[2]);
        out += buf;
    }
    return out;
}

std::string render_svg(const PolynomialSection& s,
                       const std::vector<LoopSample>& cycles) {
    auto zeros = section_zeros(s);

    Vec3 centroid{0.0, 0.0, 0.0};
    double total = 0.0;
    for (const auto& z : zeros) {
        centroid = centroid + z.position.unit_vec() * double(z.multiplicity);
        total += double(z.multiplicity);
    }
    if (total > 0.0) centroid = centroid * (1.0 / total);
    Vec3 view_pole = centroid.norm() > 1e-9 ? (centroid * -1.0).normalized()
                                            : Vec3{0.0, 0.0, 1.0};
    // rotate the projection point to the chart Z pole, then chart Z
    // coordinates are exactly the projection we want
    SU2 rot = SU2::rotation_taking(view_pole, Vec3{0.0, 0.0, 1.0});

    auto project = [&](const SpherePoint& p) {
        SpherePoint q = rot.apply(p);
        // points at the projection pole clamp to the rim instead of failing
        if (q.chart == Chart::W && std::abs(q.coord) < 1e-12) return cplx(8.0, 0.0);
        SpherePoint zq = q.chart == Chart::Z ? q : chart_transition(q);
        cplx z = zq.coord;
        double r = std::abs(z);
        if (!std::isfinite(r)) z = cplx(8.0, 0.0);
        else if (r > 8.0) z *= 8.0 / r;
        return z;
    };

    const double scale = 60.0, half = 300.0;
    auto px = [&](cplx z) {
        return std::pair<double, double>(half + scale * z.real(),
                                         half - scale * z.imag());
    };

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
        "viewBox=\"0 0 600 600\">\n"
        "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n"
        "<circle cx=\"300\" cy=\"300\" r=\"60\" fill=\"none\" stroke=\"#ccc\" "
        "stroke-dasharray=\"4 3\"/>\n";

    for (const auto& loop : cycles) {
        std::string d;
        for (std::size_t i = 0; i < loop.points.size(); ++i) {
            auto [x, y] = px(project(loop.points[i]));
            d += (i == 0 ? "M" : "L") + fmt_coord(x) + " " + fmt_coord(y);
        }
        d += "Z";
        svg += "<path d=\"" + d +
               "\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1.5\"/>\n";
    }

    for (const auto& z : zeros) {
        auto [x, y] = px(project(z.position));
        svg += "<circle cx=\"" + fmt_coord(x) + "\" cy=\"" + fmt_coord(y) +
               "\" r=\"5\" fill=\"#c62828\"/>\n";
        if (z.multiplicity > 1)
            svg += "<circle cx=\"" + fmt_coord(x) + "\" cy=\"" + fmt_coord(y) +
                   "\" r=\"8\" fill=\"none\" stroke=\"#c62828\"/>\n";
    }

    try {
        for (const auto& sing : g_zeros(s)) {
            auto [x, y] = px(project(sing.position));
            svg += "<rect x=\"" + fmt_coord(x - 3.5) + "\" y=\"" + fmt_coord(y - 3.5) +
                   "\" width=\"7\" height=\"7\" fill=\"none\" stroke=\"#2e7d32\" "
                   "stroke-width=\"1.5\"/>\n";
        }
    } catch (const Error&) {
        // sections whose singular set defies the finder still get a picture
    }

    svg += "</svg>\n";
    return svg;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write file: " + path);
    out << text;
    if (!out.flush()) throw numeric_error("short write: " + path);
}

} // namespace sbs
