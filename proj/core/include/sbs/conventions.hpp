#pragma once

namespace sbs {

// Global sign conventions, fixed once by the calibration cases in
// tests/conventions_test.cpp and used consistently everywhere else.
//
// kHolonomySign: holonomy of the chart trivialization around a positively
// oriented loop equals exp(kHolonomySign * 2*pi*i * area(left region)),
// with area measured against the degree-d form (total mass d).
// Calibrated on small circles about the origin of chart Z.
inline constexpr double kHolonomySign = +1.0;

// kWindingSign: for a loop avoiding the zeros of a section,
// winding(alpha) = kWindingSign * (zeros enclosed on the left - area(left)).
// Calibrated on the equator with the degree 2 section z^2 (winding +1).
inline constexpr double kWindingSign = +1.0;

// Points closer than this (chordal) to a zero of the active section are
// treated as inside the zero zone by tracing and certification.
inline constexpr double kDefaultZeroExclusion = 1e-4;

} // namespace sbs
