#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "sbs/errors.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/rng.hpp"
#include "sbs/sphere_geometry.hpp"
#include "sbs/transport.hpp"

using namespace sbs;

namespace {

LoopSample wobbled_loop(Rng& rng, std::size_t n) {
    double base = rng.uniform(0.5, 1.1);
    double a1 = rng.uniform(-0.15, 0.15);
    double a2 = rng.uniform(-0.1, 0.1);
    double ph1 = rng.uniform(0.0, kTwoPi);
    double ph2 = rng.uniform(0.0, kTwoPi);
    LoopSample loop;
    for (std::size_t i = 0; i < n; ++i) {
        double t = kTwoPi * double(i) / double(n);
        double r = base + a1 * std::cos(t + ph1) + a2 * std::cos(2.0 * t + ph2);
        loop.points.emplace_back(Chart::Z, std::polar(r, t));
    }
    return loop;
}

} // namespace

TEST_CASE("transport around the unit circle is trivial") {
    LoopSample loop = circle_loop(1.0, 256);
    TransportResult tr = parallel_transport(2, loop, {1.0, 0.0});
    CHECK(std::abs(tr.holonomy - cplx(1.0, 0.0)) < 1e-8);
    CHECK(tr.phase_defect < 1e-8);
    CHECK(tr.norm_drift < 1e-8);
    CHECK(tr.loop_length > 0.0);
}

TEST_CASE("transport around the radius 2 circle picks up the area defect") {
    LoopSample loop = circle_loop(2.0, 256);
    TransportResult tr = parallel_transport(2, loop, {1.0, 0.0});
    CHECK(std::abs(tr.phase_defect - kTwoPi * 0.4) < 1e-8);
}

TEST_CASE("tiny loops have near trivial holonomy") {
    LoopSample loop = circle_loop(0.01, 64);
    TransportResult tr = parallel_transport(2, loop, {1.0, 0.0});
    CHECK(std::abs(tr.holonomy - cplx(1.0, 0.0)) < 2e-3);
}

TEST_CASE("holonomy equals the exponential of the left area") {
    Rng rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        int d = trial % 2 ? 4 : 2;
        LoopSample loop = wobbled_loop(rng, 200);
        double area = enclosed_area({loop, Side::left}, d);
        TransportResult tr = parallel_transport(d, loop, {1.0, 0.0});
        cplx expect = std::exp(cplx(0.0, kTwoPi * area));
        CHECK(std::abs(tr.holonomy - expect) < 1e-6);
        CHECK(std::abs(std::abs(tr.holonomy) - 1.0) < 1e-9);
        CHECK(tr.norm_drift < 1e-8);
    }
}

TEST_CASE("reversing the loop conjugates the holonomy") {
    Rng rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        LoopSample loop = wobbled_loop(rng, 200);
        cplx fwd = parallel_transport(2, loop, {1.0, 0.0}).holonomy;
        cplx bwd = parallel_transport(2, loop.reversed(), {1.0, 0.0}).holonomy;
        CHECK(std::abs(bwd - std::conj(fwd)) < 1e-9);
    }
}

TEST_CASE("bohr sommerfeld test cases") {
    BohrSommerfeld a = is_bohr_sommerfeld(2, circle_loop(1.0, 256));
    CHECK(a.satisfied);
    CHECK(std::abs(a.area - 1.0) < 1e-8);

    BohrSommerfeld b = is_bohr_sommerfeld(2, circle_loop(2.0, 256));
    CHECK_FALSE(b.satisfied);
    CHECK(std::abs(b.area - 1.6) < 1e-8);
    CHECK(std::abs(b.phase_defect - kTwoPi * 0.4) < 1e-8);

    BohrSommerfeld c = is_bohr_sommerfeld(4, circle_loop(std::sqrt(3.0), 256));
    CHECK(c.satisfied);
    CHECK(std::abs(c.area - 3.0) < 1e-8);
}

TEST_CASE("covariantly constant frame has unit norm and closes") {
    LoopSample loop = circle_loop(1.0, 256);
    auto frame = covariant_constant_section(2, loop);
    REQUIRE(frame.size() == loop.size());
    PrequantumData pq(2);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        double hnorm = std::abs(frame[i]) *
                       std::sqrt(pq.metric_weight(loop.points[i].coord));
        CHECK(std::abs(hnorm - 1.0) < 1e-8);
    }

    auto rev = covariant_constant_section(2, loop.reversed());
    REQUIRE(rev.size() == loop.size());
}

TEST_CASE("no covariantly constant frame off the quantization condition") {
    LoopSample loop = circle_loop(2.0, 256);
    bool threw = false;
    try {
        covariant_constant_section(2, loop);
    } catch (const Error& e) {
        threw = true;
        CHECK(e.kind() == ErrorKind::rejection);
        CHECK(std::string(e.what()).find("no covariantly constant") !=
              std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("alpha trace of z along the equator is constant argument") {
    PolynomialSection s(2, {{0, 0}, {1, 0}, {0, 0}});
    AlphaTrace tr = alpha_trace(s, circle_loop(1.0, 256));
    CHECK(tr.arg_deviation < 1e-6);
    CHECK(tr.winding == 0);
    CHECK(tr.min_modulus > 0.49);
    for (const cplx& a : tr.alpha) CHECK(std::abs(std::abs(a) - 0.5) < 1e-8);
}

TEST_CASE("alpha trace of z^2 - 1 along its separating great circle") {
    PolynomialSection s(2, {{-1, 0}, {0, 0}, {1, 0}});
    LoopSample loop = great_circle_loop({1.0, 0.0, 0.0}, 256);
    AlphaTrace tr = alpha_trace(s, loop);
    CHECK(tr.arg_deviation < 1e-6);
    CHECK(tr.winding == 0);
}

TEST_CASE("alpha trace of z^2 along the equator winds once") {
    PolynomialSection s(2, {{0, 0}, {0, 0}, {1, 0}});
    AlphaTrace tr = alpha_trace(s, circle_loop(1.0, 256));
    CHECK(std::abs(tr.winding) == 1);
}

TEST_CASE("alpha trace rejects loops through a section zero") {
    PolynomialSection s(2, {{-1, 0}, {0, 0}, {1, 0}});
    CHECK_THROWS_AS(alpha_trace(s, circle_loop(1.0, 256)), Error);
}

TEST_CASE("alpha trace rejects non quantized loops, unchecked variant does not") {
    PolynomialSection s(2, {{0, 0}, {1, 0}, {0, 0}});
    LoopSample loop = circle_loop(2.0, 256);
    CHECK_THROWS_AS(alpha_trace(s, loop), Error);
    AlphaTrace tr = alpha_trace_unchecked(s, loop);
    CHECK(tr.closure_defect > 0.1);
}

TEST_CASE("alpha modulus equals the section h-norm") {
    PolynomialSection s(2, {{0.3, 0.1}, {1, 0}, {-0.2, 0.4}});
    LoopSample loop = circle_loop(1.0, 200, {0.05, -0.02});
    AlphaTrace tr = alpha_trace_unchecked(s, loop);
    REQUIRE(tr.alpha.size() == loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
        double expect = section_h_norm(s, loop.points[i]);
        CHECK(std::abs(std::abs(tr.alpha[i]) - expect) < 1e-8);
    }
}

TEST_CASE("alpha trace ignores the choice of starting sample") {
    PolynomialSection s(2, {{0, 0}, {1, 0}, {0, 0}});
    LoopSample loop = circle_loop(1.0, 256);
    LoopSample shifted = loop;
    std::rotate(shifted.points.begin(), shifted.points.begin() + 57,
                shifted.points.end());
    AlphaTrace a = alpha_trace(s, loop);
    AlphaTrace b = alpha_trace(s, shifted);
    CHECK(a.winding == b.winding);
    CHECK(std::abs(a.arg_deviation - b.arg_deviation) < 1e-7);
}

TEST_CASE("winding law residuals") {
    PolynomialSection sz(2, {{0, 0}, {1, 0}, {0, 0}});
    CHECK(winding_area_check(sz, circle_loop(1.0, 256)) < 1e-6);

    PolynomialSection sz2(2, {{0, 0}, {0, 0}, {1, 0}});
    CHECK(winding_area_check(sz2, circle_loop(1.0, 256)) < 1e-6);

    // great circle leaving exactly one zero of z^2 - 1 on its left
    PolynomialSection s(2, {{-1, 0}, {0, 0}, {1, 0}});
    Vec3 axis = SpherePoint(Chart::Z, {1.0, 0.0}).unit_vec();
    LoopSample loop = great_circle_loop(axis, 256);
    CHECK(winding_area_check(s, loop) < 1e-6);
}
