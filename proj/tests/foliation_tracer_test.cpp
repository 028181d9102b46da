#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "sbs/errors.hpp"
#include "sbs/foliation_tracer.hpp"
#include "sbs/rng.hpp"
#include "sbs/su2.hpp"

using namespace sbs;

namespace {

PolynomialSection sec_z() { return PolynomialSection(2, {{0, 0}, {1, 0}, {0, 0}}); }
PolynomialSection sec_z2() { return PolynomialSection(2, {{0, 0}, {0, 0}, {1, 0}}); }
PolynomialSection sec_z2m1() { return PolynomialSection(2, {{-1, 0}, {0, 0}, {1, 0}}); }
PolynomialSection sec_zzm1() { return PolynomialSection(2, {{0, 0}, {-1, 0}, {1, 0}}); }

const FoliationSingularity& pick_nearest(const std::vector<FoliationSingularity>& sings,
                                         const SpherePoint& p) {
    std::size_t best = 0;
    double best_d = 1e30;
    for (std::size_t i = 0; i < sings.size(); ++i) {
        double d = chordal_distance(sings[i].position, p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return sings[best];
}

LoopSample path_as_loop(const std::vector<SpherePoint>& pts) {
    LoopSample loop;
    loop.points = pts;
    return loop;
}

} // namespace

TEST_CASE("saddle and node classification for z(z-1)") {
    PolynomialSection s = sec_zzm1();
    auto sings = g_zeros(s);
    REQUIRE(sings.size() == 2);
    const double r2 = std::sqrt(2.0);

    const auto& inner = pick_nearest(sings, SpherePoint(Chart::Z, {r2 - 1.0, 0.0}));
    SingularityClassification ci = classify_singularity(s, inner);
    CHECK(ci.type == SingularityClassification::Type::saddle);
    REQUIRE(ci.directions.size() == 4);

    SpherePoint outer_pt(Chart::Z, {-1.0 - r2, 0.0});
    const auto& outer = pick_nearest(sings, outer_pt);
    SingularityClassification co = classify_singularity(s, outer);
    CHECK(co.type == SingularityClassification::Type::node);

    // invariant directions come in opposite pairs and the pairs are orthogonal
    cplx d0 = ci.directions[0];
    bool has_opposite = false, has_orthogonal = false;
    for (std::size_t k = 1; k < 4; ++k) {
        cplx r = ci.directions[k] / d0;
        if (std::abs(r + 1.0) < 1e-9) has_opposite = true;
        if (std::abs(r.real()) < 1e-9) has_orthogonal = true;
    }
    CHECK(has_opposite);
    CHECK(has_orthogonal);
}

TEST_CASE("classification rejects points on a zero curve") {
    PolynomialSection s = sec_z();
    auto sings = g_zeros(s);
    REQUIRE(!sings.empty());
    REQUIRE(sings[0].kind == SingularityKind::curve_of_zeros);
    bool threw = false;
    try {
        classify_singularity(s, sings[0]);
    } catch (const Error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("the double zero section has one degenerate singularity") {
    PolynomialSection s = sec_z2();
    auto sings = g_zeros(s);
    REQUIRE(sings.size() == 1);
    CHECK(sings[0].kind == SingularityKind::isolated);
    CHECK(chordal_distance(sings[0].position, SpherePoint(Chart::W, {0.0, 0.0})) <
          1e-8);
    auto cls = classify_singularity(s, sings[0]);
    CHECK(cls.type == SingularityClassification::Type::degenerate);
    CHECK(cls.directions.size() == 8);
}

TEST_CASE("classification commutes with rotation") {
    PolynomialSection s = sec_zzm1();
    auto sings = g_zeros(s);
    REQUIRE(sings.size() == 2);
    Rng rng(41);
    SU2 r = SU2::haar_random(rng);
    PolynomialSection rs = rotate_section(r, s);
    auto rsings = g_zeros(rs);
    REQUIRE(rsings.size() == 2);
    for (const auto& sing : sings) {
        SpherePoint moved = r.apply(sing.position);
        const auto& partner = pick_nearest(rsings, moved);
        CHECK(chordal_distance(partner.position, moved) < 1e-5);
        auto a = classify_singularity(s, sing);
        auto b = classify_singularity(rs, partner);
        CHECK(a.type == b.type);
    }
}

TEST_CASE("separatrix from the ring of z stays on the equator") {
    PolynomialSection s = sec_z();
    SeparatrixPath path =
        trace_separatrix(s, SpherePoint(Chart::Z, {1.0, 0.0}), {0.0, 1.0});
    CHECK(path.end_event == TraceEvent::closed_onto_start);
    REQUIRE(path.points.size() > 32);
    LoopSample got = path_as_loop(path.points);
    CHECK(loop_hausdorff(got, circle_loop(1.0, 8192)) < 1e-6);
}

TEST_CASE("separatrices of z(z-1) run between the saddle and the node") {
    PolynomialSection s = sec_zzm1();
    const double r2 = std::sqrt(2.0);
    SpherePoint saddle(Chart::Z, {r2 - 1.0, 0.0});

    // the saddle's invariant rays point along and across the real axis;
    // launch along one ray and require a singular endpoint
    auto sings = g_zeros(s);
    const auto& sing = pick_nearest(sings, saddle);
    auto cls = classify_singularity(s, sing);
    int reached = 0;
    for (cplx dir : cls.directions) {
        SeparatrixPath path = trace_separatrix(s, sing.position, dir);
        if (path.end_event == TraceEvent::reached_singularity ||
            path.end_event == TraceEvent::hit_section_zero_zone)
            ++reached;
        CHECK(path.length > 0.0);
    }
    CHECK(reached >= 2);
}

TEST_CASE("zero curve of z is the unit circle") {
    ZeroCurve curve = trace_zero_curve(sec_z(), SpherePoint(Chart::Z, {1.0, 0.0}));
    CHECK(curve.closed);
    REQUIRE(curve.points.size() > 16);
    CHECK(loop_hausdorff(path_as_loop(curve.points), circle_loop(1.0, 8192)) < 1e-6);
}

TEST_CASE("zero curve of z^2 - 1 is the imaginary axis great circle") {
    ZeroCurve curve =
        trace_zero_curve(sec_z2m1(), SpherePoint(Chart::Z, {0.0, 0.5}));
    CHECK(curve.closed);
    LoopSample expect = great_circle_loop({1.0, 0.0, 0.0}, 8192);
    CHECK(loop_hausdorff(path_as_loop(curve.points), expect) < 1e-6);
}

TEST_CASE("zero curve tracer recovers from an offset seed") {
    ZeroCurve curve = trace_zero_curve(sec_z(), SpherePoint(Chart::Z, {1.02, 0.01}));
    CHECK(curve.closed);
    CHECK(loop_hausdorff(path_as_loop(curve.points), circle_loop(1.0, 8192)) < 1e-5);
}

TEST_CASE("find special cycles: generic separated zeros give one cycle") {
    auto cycles = find_special_cycles(sec_z());
    REQUIRE(cycles.size() == 1);
    const auto& c = cycles[0];
    CHECK(c.from_zero_curve);
    CHECK(loop_hausdorff(c.loop, circle_loop(1.0, 4096)) < 1e-4);
    CHECK(c.arg_deviation < 1e-6);
    CHECK(c.phase_defect < 1e-6);
    CHECK(std::abs(c.area - 1.0) < 1e-6);
    CHECK(c.winding == 0);
    CHECK(c.min_zero_distance > 0.5);
    REQUIRE(c.separates.size() == 2);
    CHECK(c.separates[0].second != c.separates[1].second);
}

TEST_CASE("find special cycles: z^2 - 1") {
    auto cycles = find_special_cycles(sec_z2m1());
    REQUIRE(cycles.size() == 1);
    LoopSample expect = great_circle_loop({1.0, 0.0, 0.0}, 4096);
    CHECK(loop_hausdorff(cycles[0].loop, expect) < 1e-4);
    REQUIRE(cycles[0].separates.size() == 2);
    CHECK(cycles[0].separates[0].second != cycles[0].separates[1].second);
}

TEST_CASE("find special cycles: double zero has an empty fiber") {
    auto cycles = find_special_cycles(sec_z2());
    CHECK(cycles.empty());
}

TEST_CASE("find special cycles: z(z-1) still carries exactly one cycle") {
    auto cycles = find_special_cycles(sec_zzm1());
    REQUIRE(cycles.size() == 1);
    const auto& c = cycles[0];
    CHECK_FALSE(c.from_zero_curve);
    CHECK(c.arg_deviation < 1e-5);
    CHECK(c.phase_defect < 1e-6);
    CHECK(c.winding == 0);
    REQUIRE(c.separates.size() == 2);
    CHECK(c.separates[0].second != c.separates[1].second);
    for (double ang : c.junction_angles) CHECK(ang < 2.0 * kPi / 180.0);
}

TEST_CASE("certify rejects loops failing each gate") {
    PolynomialSection s = sec_z();

    // not quantized
    CHECK_THROWS_AS(certify_loop(s, circle_loop(2.0, 256)), Error);

    // quantized but wrong argument behavior: the |z|=1 circle for z^2
    CHECK_THROWS_AS(certify_loop(sec_z2(), circle_loop(1.0, 256)), Error);

    // passes for the honest cycle
    SpecialCycleCertificate c = certify_loop(s, circle_loop(1.0, 256));
    CHECK(c.arg_deviation < 1e-6);
    CHECK(std::abs(c.area - 1.0) < 1e-6);
}

TEST_CASE("h-norm is extremal along the cycle where g vanishes") {
    auto cycles = find_special_cycles(sec_z());
    REQUIRE(cycles.size() == 1);
    PolynomialSection s = sec_z();
    // |s|_h on the cycle is 0.5, strictly larger than slightly off the cycle
    for (double off : {0.9, 1.1}) {
        double on = section_h_norm(s, SpherePoint(Chart::Z, {1.0, 0.0}));
        double near = section_h_norm(s, SpherePoint(Chart::Z, {off, 0.0}));
        CHECK(on > near);
    }
}

TEST_CASE("cycles transform under rotation") {
    Rng rng(42);
    PolynomialSection s = sec_zzm1();
    auto base = find_special_cycles(s);
    REQUIRE(base.size() == 1);
    SU2 r = SU2::haar_random(rng);
    auto rotated = find_special_cycles(rotate_section(r, s));
    REQUIRE(rotated.size() == 1);
    LoopSample moved = r.apply(base[0].loop);
    CHECK(loop_hausdorff(moved, rotated[0].loop) < 1e-3);

    // quarter turn about the x axis sends s = z to a section whose cycle is
    // the corresponding rotated great circle
    SU2 q = SU2::rotation_taking({0.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
    auto qc = find_special_cycles(rotate_section(q, sec_z()));
    REQUIRE(qc.size() == 1);
    LoopSample qmoved = q.apply(circle_loop(1.0, 256));
    CHECK(loop_hausdorff(qmoved, qc[0].loop) < 1e-3);
}

TEST_CASE("the special cycle is isolated") {
    Rng rng(43);
    for (const auto& s : {sec_z(), sec_zzm1()}) {
        auto cycles = find_special_cycles(s);
        REQUIRE(cycles.size() == 1);
        LoopSample nudged = perturb_loop_normal(cycles[0].loop, 1e-2, rng);
        // the nudged loop is no longer special ...
        CHECK_THROWS_AS(certify_loop(s, nudged), Error);
        // ... and the only nearby special cycle is the original
        auto again = find_special_cycles(s);
        REQUIRE(again.size() == 1);
        CHECK(loop_hausdorff(again[0].loop, cycles[0].loop) < 1e-3);
    }
}
