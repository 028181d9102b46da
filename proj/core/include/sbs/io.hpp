#pragma once

#include <string>
#include <vector>

#include "sbs/foliation_tracer.hpp"
#include "sbs/moduli_scanner.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/sphere_geometry.hpp"
#include "sbs/transport.hpp"
#include "sbs/variational_oracle.hpp"

namespace sbs {

// Loop exchange: JSON array of {chart, re, im} records with one
// {"orientation": "+"|"-"} element appended; CSV with columns chart,re,im.
std::string loop_to_json(const LoopSample& loop);
LoopSample loop_from_json(const std::string& text);
std::string loop_to_csv(const LoopSample& loop);

// Sections are stored normalized: {"degree": d, "coeffs": [[re, im], ...]}.
std::string section_to_json(const PolynomialSection& s);
PolynomialSection section_from_json(const std::string& text);

std::string transport_to_json(const TransportResult& r);
std::string alpha_trace_to_json(const AlphaTrace& t);
std::string certificate_to_json(const SpecialCycleCertificate& c);
std::string certificates_to_json(const std::vector<SpecialCycleCertificate>& cs,
                                 std::uint64_t seed);

// Aggregated verify output: whatever phases ran before certification
// succeeded or a rejection stopped the pipeline.
struct VerifyOutcome {
    bool certified = false;
    std::string reason;  // empty when certified
    int degree = 0;
    bool have_bs = false;
    BohrSommerfeld bs;
    bool have_trace = false;
    AlphaTrace trace;
    double winding_area_residual = -1.0;  // negative when the check never ran
    bool have_certificate = false;
    SpecialCycleCertificate certificate;
};
std::string verify_report_json(const VerifyOutcome& v);

std::string find_report_json(const std::vector<SpecialCycleCertificate>& certs,
                             std::size_t oracle_count, double agreement,
                             std::uint64_t seed);

// Scan spec files share the flat key = value format of RunConfig.
ScanSpec scan_spec_from_text(const std::string& text);
std::string scan_spec_to_text(const ScanSpec& spec);

// Scan persistence. The canonical files (records.jsonl, summary.json,
// summary.csv) carry no timing data so reruns compare byte for byte;
// wall times go to a separate timings.csv.
std::string record_to_jsonl(const ModuliRecord& r);
std::string report_summary_json(const ScanReport& rep);
std::string report_summary_csv(const ScanReport& rep);
void write_report(const ScanReport& rep, const std::string& dir,
                  bool svg_gallery = false);

// Descent history of one optimizer run, one row per iteration.
std::string optimize_log_csv(const OptimizeResult& result);

// Stereographic picture of one section: zeros of s, zeros of g, and the
// given cycles, projected from the point antipodal to the zero centroid.
std::string render_svg(const PolynomialSection& s,
                       const std::vector<LoopSample>& cycles);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace sbs
