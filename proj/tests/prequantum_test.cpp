#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "sbs/errors.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/rng.hpp"
#include "sbs/su2.hpp"

using namespace sbs;

namespace {

PolynomialSection sec_z() { return PolynomialSection(2, {{0, 0}, {1, 0}, {0, 0}}); }
PolynomialSection sec_z2() { return PolynomialSection(2, {{0, 0}, {0, 0}, {1, 0}}); }
PolynomialSection sec_z2m1() { return PolynomialSection(2, {{-1, 0}, {0, 0}, {1, 0}}); }
PolynomialSection sec_zzm1() { return PolynomialSection(2, {{0, 0}, {-1, 0}, {1, 0}}); }

PolynomialSection random_section(int d, Rng& rng) {
    std::vector<cplx> c;
    for (int k = 0; k <= d; ++k) c.push_back(rng.gaussian_complex());
    return PolynomialSection(d, c);
}

} // namespace

TEST_CASE("section construction guards") {
    CHECK_THROWS_AS(PolynomialSection(0, {{1, 0}}), Error);
    CHECK_THROWS_AS(PolynomialSection(2, {{1, 0}, {0, 0}}), Error);
    CHECK(PolynomialSection(2, {{0, 0}, {0, 0}, {0, 0}}).is_zero());
    CHECK_FALSE(sec_z().is_zero());
}

TEST_CASE("section evaluation examples") {
    CHECK(std::abs(evaluate_section(sec_z(), SpherePoint(Chart::Z, {2.0, 0.0})) -
                   cplx(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(evaluate_section(sec_z2m1(), SpherePoint(Chart::Z, {0.0, 1.0})) -
                   cplx(-2.0, 0.0)) < 1e-15);
    // chart W representative of s = z at w = 0.5 is w^2 (1/w) = w
    CHECK(std::abs(evaluate_section(sec_z(), SpherePoint(Chart::W, {0.5, 0.0})) -
                   cplx(0.5, 0.0)) < 1e-15);
}

TEST_CASE("chart W representative is consistent on the overlap") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        PolynomialSection s = random_section(2 + trial % 3, rng);
        cplx z = std::polar(rng.uniform(0.7, 1.4), rng.uniform(0.0, kTwoPi));
        cplx fz = evaluate_section(s, SpherePoint(Chart::Z, z));
        cplx fw = evaluate_section(s, SpherePoint(Chart::W, 1.0 / z));
        cplx expect = fz * std::pow(1.0 / z, double(s.degree));
        CHECK(std::abs(fw - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("h-norm examples and chart independence") {
    CHECK(std::abs(section_h_norm(sec_z(), SpherePoint(Chart::Z, {0.0, 1.0})) - 0.5) <
          1e-15);
    CHECK(std::abs(section_h_norm(sec_z(), SpherePoint(Chart::Z, {2.0, 0.0})) - 0.4) <
          1e-15);
    CHECK(section_h_norm(sec_z2m1(), SpherePoint(Chart::Z, {1.0, 0.0})) == 0.0);

    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        PolynomialSection s = random_section(2, rng);
        cplx z = std::polar(rng.uniform(0.7, 1.4), rng.uniform(0.0, kTwoPi));
        double nz = section_h_norm(s, SpherePoint(Chart::Z, z));
        double nw = section_h_norm(s, SpherePoint(Chart::W, 1.0 / z));
        CHECK(std::abs(nz - nw) < 1e-10 * std::max(1.0, nz));
    }
}

TEST_CASE("log derivative examples") {
    cplx g2 = log_derivative_g(sec_z(), SpherePoint(Chart::Z, {2.0, 0.0}));
    CHECK(std::abs(g2 - cplx(-0.3, 0.0)) < 1e-14);

    for (double t : {0.0, 0.7, 2.1, 4.4}) {
        cplx z = std::polar(1.0, t);
        CHECK(std::abs(log_derivative_g(sec_z(), SpherePoint(Chart::Z, z))) < 1e-14);
    }

    // s = z^2 - 1 has g = 0 along the whole imaginary axis
    for (double y : {0.3, 1.0, 3.0}) {
        SpherePoint p(Chart::Z, cplx(0.0, y));
        if (std::abs(p.coord) > 1.5) p = chart_transition(p);
        CHECK(std::abs(log_derivative_g(sec_z2m1(), p)) < 1e-13);
    }

    CHECK_THROWS_AS(log_derivative_g(sec_z(), SpherePoint(Chart::Z, {1e-14, 0.0})),
                    Error);
}

TEST_CASE("beta covector examples") {
    auto b1 = beta_covector(sec_z(), SpherePoint(Chart::Z, {1.0, 0.0}));
    CHECK(std::abs(b1[0]) < 1e-14);
    CHECK(std::abs(b1[1]) < 1e-14);

    auto b2 = beta_covector(sec_z(), SpherePoint(Chart::Z, {2.0, 0.0}));
    CHECK(std::abs(b2[0] - 0.0) < 1e-14);
    CHECK(std::abs(b2[1] - (-0.3)) < 1e-14);

    cplx g = log_derivative_g(sec_z2m1(), SpherePoint(Chart::Z, {0.5, 0.0}));
    cplx expect = 2.0 * 0.5 / (0.25 - 1.0) - 2.0 * 0.5 / 1.25;
    CHECK(std::abs(g - expect) < 1e-14);
    auto b3 = beta_covector(sec_z2m1(), SpherePoint(Chart::Z, {0.5, 0.0}));
    CHECK(std::abs(b3[0] - g.imag()) < 1e-15);
    CHECK(std::abs(b3[1] - g.real()) < 1e-15);
}

TEST_CASE("real part of g differentiates the log h-norm") {
    Rng rng(23);
    int tested = 0;
    while (tested < 25) {
        PolynomialSection s = random_section(2 + tested % 2, rng);
        cplx z(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
        SpherePoint p(Chart::Z, z);
        if (distance_to_zeros(section_zeros(s), p) < 0.05) continue;
        cplx v = std::polar(1.0, rng.uniform(0.0, kTwoPi));
        double h = 1e-6;
        double fwd = std::log(section_h_norm(s, SpherePoint(Chart::Z, z + h * v)));
        double bwd = std::log(section_h_norm(s, SpherePoint(Chart::Z, z - h * v)));
        double fd = (fwd - bwd) / (2.0 * h);
        cplx g = log_derivative_g(s, p);
        CHECK(std::abs((g * v).real() - fd) < 1e-6);
        ++tested;
    }
}

TEST_CASE("section zeros examples") {
    auto zs = section_zeros(sec_z());
    REQUIRE(zs.size() == 2);
    bool has_origin = false, has_infinity = false;
    for (const auto& z : zs) {
        if (z.position.chart == Chart::Z && std::abs(z.position.coord) < 1e-12)
            has_origin = z.multiplicity == 1;
        if (z.position.chart == Chart::W && std::abs(z.position.coord) < 1e-12)
            has_infinity = z.multiplicity == 1;
    }
    CHECK(has_origin);
    CHECK(has_infinity);

    auto zs2 = section_zeros(sec_z2m1());
    REQUIRE(zs2.size() == 2);
    for (const auto& z : zs2) {
        CHECK(z.multiplicity == 1);
        CHECK(std::abs(std::abs(z.position.coord) - 1.0) < 1e-12);
        CHECK(std::abs(z.position.coord.imag()) < 1e-12);
    }

    auto zs3 = section_zeros(sec_z2());
    REQUIRE(zs3.size() == 1);
    CHECK(zs3[0].multiplicity == 2);
    CHECK(zs3[0].position.chart == Chart::Z);
    CHECK(std::abs(zs3[0].position.coord) < 1e-12);
}

TEST_CASE("zero multiplicities always sum to the degree") {
    Rng rng(24);
    for (int trial = 0; trial < 30; ++trial) {
        int d = 1 + trial % 4;
        PolynomialSection s = random_section(d, rng);
        int total = 0;
        for (const auto& z : section_zeros(s)) total += z.multiplicity;
        CHECK(total == d);
    }
}

TEST_CASE("roots survive wide magnitude spreads") {
    // f = (z - 1e-4)(z - 1) has a near-cancelling small root
    PolynomialSection s(2, {{1e-4, 0.0}, {-1.0001, 0.0}, {1.0, 0.0}});
    auto zs = section_zeros(s);
    REQUIRE(zs.size() == 2);
    double best = 1e30;
    for (const auto& z : zs)
        if (z.position.chart == Chart::Z)
            best = std::min(best, std::abs(z.position.coord - cplx(1e-4, 0.0)));
    CHECK(best < 1e-12);
}

TEST_CASE("veronese examples") {
    VeroneseTest a = is_on_veronese(sec_z());
    CHECK_FALSE(a.on_locus);
    CHECK(std::abs(a.normalized_discriminant - 1.0) < 1e-14);

    VeroneseTest b = is_on_veronese(sec_z2());
    CHECK(b.on_locus);
    CHECK(b.normalized_discriminant < 1e-14);

    VeroneseTest c = is_on_veronese(sec_z2m1());
    CHECK_FALSE(c.on_locus);
    CHECK(std::abs(c.normalized_discriminant - 2.0) < 1e-14);
}

TEST_CASE("veronese detects random double zeros including infinity") {
    Rng rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        cplx u(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        // (z - u)^2
        PolynomialSection s(2, {u * u, -2.0 * u, {1.0, 0.0}});
        CHECK(is_on_veronese(s).on_locus);
    }
    // double zero at infinity: the constant section
    PolynomialSection inf2(2, {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    CHECK(is_on_veronese(inf2).on_locus);
}

TEST_CASE("curvature plaquette residuals") {
    CHECK(curvature_check(2, SpherePoint(Chart::Z, {0.0, 0.0}), 1e-2).residual < 1e-6);
    CHECK(curvature_check(2, SpherePoint(Chart::Z, {1.0, 1.0}), 1e-2).residual < 1e-6);
    CHECK(curvature_check(4, SpherePoint(Chart::Z, {0.5, 0.0}), 1e-2).residual < 1e-6);
}

TEST_CASE("curvature residual decays at cubic order") {
    SpherePoint p(Chart::Z, {0.3, -0.2});
    double r1 = curvature_check(2, p, 1e-1).residual;
    double r2 = curvature_check(2, p, 3e-2).residual;
    double r3 = curvature_check(2, p, 1e-2).residual;
    // each 10/3-fold shrink of eps should gain roughly (10/3)^3 = 37;
    // allow slack for the O(eps^4) tail at the big end
    CHECK(r1 / r2 > 15.0);
    CHECK(r2 / r3 > 15.0);
}

TEST_CASE("g zero curves for the symmetric sections") {
    auto curve = g_zeros(sec_z());
    REQUIRE(!curve.empty());
    int on_curve = 0;
    for (const auto& sing : curve) {
        CHECK(sing.kind == SingularityKind::curve_of_zeros);
        SpherePoint p = sing.position.chart == Chart::Z
                            ? sing.position
                            : chart_transition(sing.position);
        CHECK(std::abs(std::abs(p.coord) - 1.0) < 1e-8);
        if (std::abs(log_derivative_g(sec_z(), sing.position)) < 1e-10) ++on_curve;
    }
    CHECK(on_curve >= std::min<std::size_t>(32, curve.size()));

    auto curve2 = g_zeros(sec_z2m1());
    REQUIRE(!curve2.empty());
    for (const auto& sing : curve2) {
        CHECK(sing.kind == SingularityKind::curve_of_zeros);
        SpherePoint p = sing.position.chart == Chart::Z
                            ? sing.position
                            : chart_transition(sing.position);
        CHECK(std::abs(p.coord.real()) < 1e-8);
    }
}

TEST_CASE("isolated g zeros of z(z-1) sit at -1 +- sqrt 2") {
    auto sings = g_zeros(sec_zzm1());
    REQUIRE(sings.size() == 2);
    const double r2 = std::sqrt(2.0);
    SpherePoint inner(Chart::Z, {r2 - 1.0, 0.0});
    SpherePoint outer(Chart::Z, {-1.0 - r2, 0.0});
    if (std::abs(outer.coord) > 1.5) outer = chart_transition(outer);

    double d_inner = 1e30, d_outer = 1e30;
    for (const auto& sing : sings) {
        CHECK(sing.kind == SingularityKind::isolated);
        CHECK(sing.g_residual < 1e-9);
        d_inner = std::min(d_inner, chordal_distance(sing.position, inner));
        d_outer = std::min(d_outer, chordal_distance(sing.position, outer));
    }
    CHECK(d_inner < 1e-9);
    CHECK(d_outer < 1e-9);
}

TEST_CASE("dense grid scan finds no g zero missed by the multistart") {
    PolynomialSection s = sec_zzm1();
    auto sings = g_zeros(s);
    auto zeros = section_zeros(s);
    for (int chart = 0; chart < 2; ++chart) {
        for (int i = -30; i <= 30; ++i) {
            for (int j = -30; j <= 30; ++j) {
                SpherePoint p(chart == 0 ? Chart::Z : Chart::W,
                              cplx(i * 0.05, j * 0.05));
                if (std::abs(p.coord) > 1.5) continue;
                if (distance_to_zeros(zeros, p) < 0.05) continue;
                if (std::abs(log_derivative_g(s, p)) > 0.05) continue;
                double best = 1e30;
                for (const auto& sing : sings)
                    best = std::min(best, chordal_distance(sing.position, p));
                CHECK(best < 0.15);
            }
        }
    }
}

TEST_CASE("normalization examples") {
    PolynomialSection a = normalize_section(PolynomialSection(2, {{0, 0}, {0, 2}, {0, 0}}));
    CHECK(std::abs(a.coeffs[0]) < 1e-15);
    CHECK(std::abs(a.coeffs[1] - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(a.coeffs[2]) < 1e-15);

    PolynomialSection b = normalize_section(
        PolynomialSection(2, {{-1.0 / 3, 0}, {0, 0}, {1.0 / 3, 0}}));
    const double s2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(b.coeffs[0] - cplx(-s2, 0.0)) < 1e-15);
    CHECK(std::abs(b.coeffs[2] - cplx(s2, 0.0)) < 1e-15);

    PolynomialSection c = normalize_section(b);
    for (int k = 0; k <= 2; ++k) CHECK(std::abs(c.coeffs[k] - b.coeffs[k]) < 1e-15);

    CHECK_THROWS_AS(normalize_section(PolynomialSection(2, {{0, 0}, {0, 0}, {0, 0}})),
                    Error);
}

TEST_CASE("sections from zero pairs") {
    PolynomialSection a = section_from_zeros(
        2, {SpherePoint(Chart::Z, {0.0, 0.0}), SpherePoint(Chart::W, {0.0, 0.0})});
    CHECK(std::abs(a.coeffs[0]) < 1e-15);
    CHECK(std::abs(a.coeffs[1] - cplx(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(a.coeffs[2]) < 1e-15);

    PolynomialSection b = section_from_zeros(
        2, {SpherePoint(Chart::Z, {1.0, 0.0}), SpherePoint(Chart::Z, {-1.0, 0.0})});
    const double s2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(b.coeffs[0] - cplx(-s2, 0.0)) < 1e-14);
    CHECK(std::abs(b.coeffs[1]) < 1e-14);
    CHECK(std::abs(b.coeffs[2] - cplx(s2, 0.0)) < 1e-14);
}

TEST_CASE("rotation moves zeros the right way") {
    Rng rng(26);
    for (int trial = 0; trial < 8; ++trial) {
        PolynomialSection s = random_section(2, rng);
        SU2 r = SU2::haar_random(rng);
        PolynomialSection rs = rotate_section(r, s);
        auto zs = section_zeros(s);
        auto rzs = section_zeros(rs);
        REQUIRE(!rzs.empty());
        for (const auto& z : zs) {
            SpherePoint moved = r.apply(z.position);
            double best = 1e30;
            for (const auto& rz : rzs)
                best = std::min(best, chordal_distance(rz.position, moved));
            CHECK(best < 1e-8);
        }
    }
}

TEST_CASE("rotation preserves the h-norm") {
    Rng rng(27);
    PolynomialSection s = random_section(3, rng);
    SU2 r = SU2::haar_random(rng);
    PolynomialSection rs = rotate_section(r, s);
    for (int trial = 0; trial < 15; ++trial) {
        cplx z(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
        SpherePoint p(Chart::Z, z);
        double a = section_h_norm(s, p);
        double b = section_h_norm(rs, r.apply(p));
        CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, a));
    }
}
