#pragma once

#include <vector>

#include "sbs/conventions.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/rng.hpp"
#include "sbs/sphere_geometry.hpp"
#include "sbs/transport.hpp"

namespace sbs {

// Traces the singular line field ker Im(g dz) and assembles closed
// trajectories into independently certified cycles.

enum class TraceEvent {
    reached_singularity,
    left_domain,
    hit_section_zero_zone,
    closed_onto_start,
    step_limit,
};

struct SeparatrixPath {
    std::vector<SpherePoint> points;  // open sampled path, launch point first
    int start_singularity = -1;       // index into the singularity list, -1 for ring seeds
    int end_singularity = -1;         // set when end_event == reached_singularity
    TraceEvent end_event = TraceEvent::step_limit;
    double length = 0.0;              // chordal arc length
};

struct SingularityClassification {
    enum class Type { saddle, node, degenerate };
    Type type = Type::degenerate;
    // unit tangents of the invariant rays, in the singularity's chart; four
    // rays (two orthogonal lines) in the generic case, a fan when degenerate
    std::vector<cplx> directions;
    GDerivatives linearization;
};

SingularityClassification classify_singularity(const PolynomialSection& s,
                                               const FoliationSingularity& sing);

SeparatrixPath trace_separatrix(const PolynomialSection& s, const SpherePoint& start,
                                cplx dir);

struct ZeroCurve {
    std::vector<SpherePoint> points;
    bool closed = false;
};

// Predictor-corrector continuation of a one dimensional component of
// {g = 0} from a seed on (or near) the curve.
ZeroCurve trace_zero_curve(const PolynomialSection& s, const SpherePoint& seed);

struct SpecialCycleCertificate {
    LoopSample loop;
    double arg_deviation = 0.0;
    double phase_defect = 0.0;
    double area = 0.0;
    int winding = 0;
    double min_zero_distance = 0.0;
    std::vector<std::pair<SectionZero, Side>> separates;
    std::vector<double> junction_angles;  // radians, empty for zero-curve cycles
    std::vector<int> seed_traces;         // indices of the traces that built the loop
    bool from_zero_curve = false;
};

struct CertifyOptions {
    double arg_tol = 1e-5;
    double bs_tol = 1e-6;
    double area_tol = 1e-6;
    double zero_exclusion = kDefaultZeroExclusion;
};

// Re-checks a candidate loop with the transport and geometry layers only;
// throws a rejection error naming the first failed gate.
SpecialCycleCertificate certify_loop(const PolynomialSection& s, const LoopSample& loop,
                                     const CertifyOptions& opts = {});

// Full pipeline: singularities -> separatrix graph / zero curves -> closed
// assemblies -> certification -> deduplication. Empty result is valid.
std::vector<SpecialCycleCertificate> find_special_cycles(const PolynomialSection& s);

// Displaces every sample along the in-sphere normal by a smooth random
// profile of the given peak amplitude. Used by the isolatedness probes.
LoopSample perturb_loop_normal(const LoopSample& loop, double amplitude, Rng& rng);

} // namespace sbs
