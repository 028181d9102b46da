#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbs/foliation_tracer.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/sphere_geometry.hpp"
#include "sbs/su2.hpp"

namespace sbs {

// How sections are generated for a scan. Random and veronese kinds draw zero
// configurations from the per-record rng stream; grid pairs points of a
// Fibonacci sphere lattice, so it needs no seed at all.
enum class ScanKind { random, veronese, grid };

struct ScanSpec {
    ScanKind kind = ScanKind::random;
    int count = 100;
    std::uint64_t seed = 1;
    double min_zero_separation = 0.1;  // chordal, between distinct zeros
    int oracle_starts = 3;
    bool with_oracle = true;
    int grid_points = 24;  // Fibonacci lattice size for ScanKind::grid
};

struct ModuliRecord {
    PolynomialSection section;  // normalized representative
    std::vector<SectionZero> zeros;
    double discriminant = 0.0;  // scale-invariant, 0 on the degenerate locus
    std::vector<SpecialCycleCertificate> cycles;
    int fiber_size = 0;
    // worst Hausdorff distance between a traced cycle and its nearest
    // oracle match; -1 when either side found nothing
    double method_agreement = -1.0;
    double wall_time = 0.0;
    bool near_discriminant = false;
    std::string failure;  // nonempty when this record aborted
};

struct ScanReport {
    ScanSpec spec;
    int degree = 2;
    std::vector<ModuliRecord> records;           // sorted by section key
    std::vector<std::size_t> fiber_histogram;    // index = fiber size
    std::vector<std::pair<double, int>> discriminant_curve;  // (disc, fiber) sorted
};

// Stable identity of a record inside a report, built from the normalized
// coefficients. Report assembly sorts by this key.
std::string section_key(const PolynomialSection& s);

// Runs every generated section through the tracer (and optionally the
// oracle), one record each. Failures are captured per record.
ScanReport scan(const ScanSpec& spec, int degree = 2);

// Single-section version of the scan body, exposed for tests and the CLI.
ModuliRecord scan_section(const PolynomialSection& s, const ScanSpec& spec,
                          std::uint64_t record_seed);

struct ContinuityProbe {
    std::vector<double> distances;  // consecutive fiber Hausdorff distances
    double slope = 0.0;             // max distance / h
    bool truncated = false;         // path hit the degenerate band or lost its fiber
    int steps_completed = 0;
};

// Walks s0 + k*h*direction through coefficient space and measures how far
// the certified cycles move between consecutive steps.
ContinuityProbe continuity_probe(const PolynomialSection& s0,
                                 const std::vector<cplx>& direction, int steps,
                                 double h);

// Hausdorff mismatch between cycles(R.s) and R.cycles(s).
double equivariance_check(const PolynomialSection& s, const SU2& r);

// Degree-2 section with the prescribed zero pair.
PolynomialSection veronese_map(const SpherePoint& a, const SpherePoint& b);

} // namespace sbs
