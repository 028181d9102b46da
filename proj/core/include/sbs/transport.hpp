#pragma once

#include <complex>
#include <vector>

#include "sbs/prequantum.hpp"
#include "sbs/sphere_geometry.hpp"

namespace sbs {

// Parallel transport of the Chern connection along sampled loops, the
// induced covariantly constant frame, and the alpha trace of a section
// against that frame.

struct TransportResult {
    cplx holonomy;                    // unit modulus
    double phase_defect = 0.0;        // |arg holonomy|, folded into [0, pi]
    double norm_drift = 0.0;          // max relative drift of the h-norm
    std::vector<cplx> sigma_samples;  // frame coefficient at each input sample,
                                      // traversal order, in the sample's chart
    double loop_length = 0.0;         // chordal length of the interpolant
};

// Integrates v' = -theta(gamma')v around the loop starting from coefficient
// v0 in the first traversal sample's chart. Chart switches multiply the
// coefficient by the transition frame factor.
TransportResult parallel_transport(int degree, const LoopSample& loop, cplx v0);

struct BohrSommerfeld {
    bool satisfied = false;
    double phase_defect = 0.0;
    double area = 0.0;   // left-side enclosed area
    cplx holonomy{1.0, 0.0};
};

// Trivial-holonomy test with an independent cross-check against the
// enclosed-area distance to the nearest integer.
BohrSommerfeld is_bohr_sommerfeld(int degree, const LoopSample& loop, double tol = 1e-6);

// Unit h-norm covariantly constant frame along a Bohr-Sommerfeld loop,
// base phase 0 at the first chart-Z sample. Rejects non-BS loops.
std::vector<cplx> covariant_constant_section(int degree, const LoopSample& loop,
                                             double tol = 1e-6);

struct AlphaTrace {
    std::vector<cplx> alpha;      // section value over frame coefficient per sample
    double arg_deviation = 0.0;   // max angular distance from the circular mean
    int winding = 0;              // net turning of arg alpha around the loop
    double min_modulus = 0.0;
    double closure_defect = 0.0;  // holonomy defect of the underlying frame
};

AlphaTrace alpha_trace(const PolynomialSection& s, const LoopSample& loop,
                       double bs_tol = 1e-6);

// Same trace with no Bohr-Sommerfeld gate; the frame is then multivalued
// around the loop and closure_defect reports the mismatch.
AlphaTrace alpha_trace_unchecked(const PolynomialSection& s, const LoopSample& loop);

// Residual of the winding law: winding(alpha) against (zeros enclosed on the
// left minus left area), with the frozen calibration sign.
double winding_area_check(const PolynomialSection& s, const LoopSample& loop,
                          double bs_tol = 1e-6);

} // namespace sbs
