#ifndef SBS_PREQUANTUM_HPP
#define SBS_PREQUANTUM_HPP

#include <array>
#include <optional>
#include <vector>

#include "sbs/sphere_geometry.hpp"
#include "sbs/su2.hpp"

namespace sbs {

// Holomorphic section of the degree d bundle, stored as the chart Z
// polynomial f(z) = sum coeffs[k] z^k with coeffs.size() == d + 1.
// The chart W representative is w^d f(1/w), i.e. the reversed coefficient
// vector evaluated at w.
struct PolynomialSection {
    int degree = 0;
    std::vector<cplx> coeffs;

    PolynomialSection() = default;
    PolynomialSection(int d, std::vector<cplx> c);

    bool is_zero() const;

    // value of the chart representative at the coordinate of p's chart
    cplx chart_value(const SpherePoint& p) const;

    // derivative of the chart representative
    cplx chart_derivative(const SpherePoint& p) const;
    cplx chart_second_derivative(const SpherePoint& p) const;
};

// Metric and connection data of the degree d prequantum bundle in the
// affine charts.  The weight of the Hermitian metric on the chart frame is
// h(z) = (1 + |z|^2)^(-d), the Chern connection form is
// theta = -d conj(z) / (1 + |z|^2) dz, and the symplectic area of the whole
// sphere is d.  Identical formulas hold in chart W.
struct PrequantumData {
    int degree = 0;

    explicit PrequantumData(int d);

    double metric_weight(cplx z) const;          // h(z)
    cplx connection_coef(cplx z) const;          // theta = connection_coef dz
    double curvature_density(cplx z) const;      // omega as a dx^dy density
    double area_form_total() const { return double(degree); }
};

// value of the section in p's chart frame
cplx evaluate_section(const PolynomialSection& s, const SpherePoint& p);

// pointwise Hermitian norm |s|_h, chart independent
double section_h_norm(const PolynomialSection& s, const SpherePoint& p);

// logarithmic covariant derivative: (nabla s / s) = g dz in the chart of p
cplx log_derivative_g(const PolynomialSection& s, const SpherePoint& p);

// Wirtinger derivatives of g in the chart of p: dg = A dz + B dconj(z).
// B is real for these charts; it is returned as a complex for uniformity.
struct GDerivatives {
    cplx A;
    cplx B;
};
GDerivatives log_derivative_g_derivatives(const PolynomialSection& s, const SpherePoint& p);

// speciality one-form beta = Im(g dz); components act on (dx, dy)
std::array<double, 2> beta_covector(const PolynomialSection& s, const SpherePoint& p);

struct SectionZero {
    SpherePoint position;
    int multiplicity = 1;
};

// all d zeros counted with multiplicity, including the zero at the chart Z
// pole when the polynomial degree drops
std::vector<SectionZero> section_zeros(const PolynomialSection& s);

// chordal distance from p to the zero set of s
double distance_to_zeros(const std::vector<SectionZero>& zeros, const SpherePoint& p);

// Scale free multiple-zero test.  For d = 2 this is
// |a1^2 - 4 a0 a2| / sum |a_k|^2; in general the product of chordal
// distances between the projective zeros, which vanishes exactly on
// sections with a repeated zero.
struct VeroneseTest {
    bool on_locus = false;
    double normalized_discriminant = 0.0;
};
VeroneseTest is_on_veronese(const PolynomialSection& s, double tol = 1e-12);

// Transport around a small coordinate square against the pointwise
// curvature density.  residual = |holonomy - exp(sign * 2 pi i * omega(p) eps^2)|,
// which decays at least cubically in eps for the correct sign convention.
struct CurvatureCheck {
    double residual = 0.0;
    cplx holonomy;
    double predicted_phase = 0.0;
};
CurvatureCheck curvature_check(int degree, const SpherePoint& p, double eps);

// Zero set of g away from the zeros of s: the foliation singularities.
enum class SingularityKind { isolated, curve_of_zeros, near_section_zero };

struct FoliationSingularity {
    SpherePoint position;
    SingularityKind kind = SingularityKind::isolated;
    double g_residual = 0.0;
};

// Multistart Newton over both chart discs.  Isolated singularities are
// deduplicated at chordal 1e-6; when the converged points accumulate along
// a one dimensional set the representatives are flagged curve_of_zeros.
// Throws a diagnostic error when nothing converges for a nonzero section.
std::vector<FoliationSingularity> g_zeros(const PolynomialSection& s,
                                          int grid_per_chart = 40);

// weight d action of SU(2) on sections: zeros move by the Moebius map
PolynomialSection rotate_section(const SU2& r, const PolynomialSection& s);

// coefficient normalization used for storage: unit norm, first coefficient
// above threshold rotated to the positive real axis
PolynomialSection normalize_section(const PolynomialSection& s);

// section with prescribed zeros (degree = number of zeros, counted with
// multiplicity; zeros at the chart Z pole drop the polynomial degree)
PolynomialSection section_from_zeros(int degree, const std::vector<SpherePoint>& zeros);

} // namespace sbs

#endif
