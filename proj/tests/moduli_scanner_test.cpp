#include "doctest.h"

#include <cmath>
#include <string>

#include "sbs/errors.hpp"
#include "sbs/moduli_scanner.hpp"
#include "sbs/rng.hpp"

using namespace sbs;

namespace {

PolynomialSection sec_z() { return PolynomialSection(2, {{0, 0}, {1, 0}, {0, 0}}); }

ScanSpec small_spec(ScanKind kind, int count, std::uint64_t seed) {
    ScanSpec spec;
    spec.kind = kind;
    spec.count = count;
    spec.seed = seed;
    spec.oracle_starts = 2;
    return spec;
}

} // namespace

TEST_CASE("veronese map to prescribed zero pairs") {
    PolynomialSection a = veronese_map(SpherePoint(Chart::Z, {0.0, 0.0}),
                                       SpherePoint(Chart::W, {0.0, 0.0}));
    CHECK(std::abs(a.coeffs[0]) < 1e-14);
    CHECK(std::abs(std::abs(a.coeffs[1]) - 1.0) < 1e-14);
    CHECK(std::abs(a.coeffs[2]) < 1e-14);

    PolynomialSection b = veronese_map(SpherePoint(Chart::Z, {1.0, 0.0}),
                                       SpherePoint(Chart::Z, {-1.0, 0.0}));
    const double s2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(std::abs(b.coeffs[0]) - s2) < 1e-12);
    CHECK(std::abs(b.coeffs[1]) < 1e-12);
    CHECK(std::abs(std::abs(b.coeffs[2]) - s2) < 1e-12);

    SpherePoint u(Chart::Z, {0.4, 0.3});
    CHECK(is_on_veronese(veronese_map(u, u)).on_locus);
}

TEST_CASE("section keys are stable identities") {
    std::string k1 = section_key(sec_z());
    std::string k2 = section_key(PolynomialSection(2, {{0, 0}, {0, 3}, {0, 0}}));
    CHECK(k1 == k2);  // same projective section after normalization
    CHECK(k1 != section_key(PolynomialSection(2, {{0, 0}, {0, 0}, {1, 0}})));
}

TEST_CASE("single section scan body") {
    ScanSpec spec = small_spec(ScanKind::random, 1, 5);
    ModuliRecord rec = scan_section(sec_z(), spec, 5);
    CHECK(rec.failure.empty());
    CHECK(rec.fiber_size == 1);
    CHECK(rec.cycles.size() == 1);
    CHECK(rec.method_agreement >= 0.0);
    CHECK(rec.method_agreement < 1e-3);
    CHECK(std::abs(rec.discriminant - 1.0) < 1e-12);
    CHECK_FALSE(rec.near_discriminant);
}

TEST_CASE("random scan finds single point fibers") {
    ScanReport rep = scan(small_spec(ScanKind::random, 8, 11), 2);
    REQUIRE(int(rep.records.size()) == 8);
    for (const auto& rec : rep.records) {
        CHECK(rec.failure.empty());
        CHECK(rec.fiber_size == 1);
        CHECK(rec.method_agreement < 1e-3);
        CHECK(rec.discriminant > 0.0);
    }
    REQUIRE(rep.fiber_histogram.size() >= 2);
    CHECK(rep.fiber_histogram[1] == 8);
}

TEST_CASE("veronese scan finds only empty fibers") {
    ScanReport rep = scan(small_spec(ScanKind::veronese, 4, 11), 2);
    REQUIRE(int(rep.records.size()) == 4);
    for (const auto& rec : rep.records) {
        CHECK(rec.fiber_size == 0);
        CHECK(rec.discriminant < 1e-10);
        CHECK(rec.near_discriminant);
    }
    CHECK(rep.fiber_histogram[0] == 4);
}

TEST_CASE("grid scan pairs lattice points") {
    ScanSpec spec = small_spec(ScanKind::grid, 6, 1);
    spec.grid_points = 8;
    spec.with_oracle = false;
    ScanReport rep = scan(spec, 2);
    REQUIRE(!rep.records.empty());
    for (const auto& rec : rep.records) {
        CHECK(rec.fiber_size == 1);
        CHECK(rec.method_agreement == -1.0);  // oracle disabled
    }
}

TEST_CASE("scans are deterministic") {
    ScanSpec spec = small_spec(ScanKind::random, 6, 77);
    ScanReport a = scan(spec, 2);
    ScanReport b = scan(spec, 2);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(section_key(a.records[i].section) == section_key(b.records[i].section));
        CHECK(a.records[i].fiber_size == b.records[i].fiber_size);
        CHECK(a.records[i].discriminant == b.records[i].discriminant);
        CHECK(a.records[i].method_agreement == b.records[i].method_agreement);
    }
}

TEST_CASE("records come out sorted by key") {
    ScanReport rep = scan(small_spec(ScanKind::random, 6, 13), 2);
    for (std::size_t i = 1; i < rep.records.size(); ++i)
        CHECK(section_key(rep.records[i - 1].section) <=
              section_key(rep.records[i].section));
}

TEST_CASE("fibers move continuously along a generic path") {
    // drift z toward z - eps: zeros stay separated the whole way
    ContinuityProbe probe =
        continuity_probe(sec_z(), {{-1.0, 0.0}, {0, 0}, {0, 0}}, 10, 1e-2);
    CHECK_FALSE(probe.truncated);
    CHECK(probe.steps_completed == 10);
    REQUIRE(int(probe.distances.size()) == 10);
    for (double d : probe.distances) CHECK(d < 0.1);
}

TEST_CASE("a zero direction moves nothing") {
    ContinuityProbe probe = continuity_probe(sec_z(), {{0, 0}, {0, 0}, {0, 0}}, 5, 1e-2);
    CHECK(probe.steps_completed == 5);
    for (double d : probe.distances) CHECK(d < 1e-6);
}

TEST_CASE("paths into the degenerate locus get truncated") {
    // z + t z^2 -> at t = +-1 the zeros collide; push far past it
    PolynomialSection s = sec_z();
    ContinuityProbe probe = continuity_probe(s, {{0, 0}, {0, 0}, {1.0, 0.0}}, 30, 0.05);
    CHECK(probe.truncated);
    CHECK(probe.steps_completed < 30);
}

TEST_CASE("approaching the discriminant shrinks the cycle's clearance") {
    // zeros at 0 and at r moving toward each other
    double prev = 1e30;
    bool shrinking = true;
    for (double r : {2.0, 1.0, 0.5, 0.25}) {
        PolynomialSection s = veronese_map(SpherePoint(Chart::Z, {0.0, 0.0}),
                                           SpherePoint(Chart::Z, {r, 0.0}));
        auto cycles = find_special_cycles(s);
        REQUIRE(cycles.size() == 1);
        double clearance = cycles[0].min_zero_distance;
        if (clearance >= prev) shrinking = false;
        prev = clearance;
    }
    CHECK(shrinking);
}

TEST_CASE("equivariance checks") {
    CHECK(equivariance_check(sec_z(), SU2()) < 1e-12);

    SU2 quarter = SU2::rotation_taking({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0});
    CHECK(equivariance_check(sec_z(), quarter) < 1e-3);

    Rng rng(61);
    SU2 r = SU2::haar_random(rng);
    PolynomialSection s(2, {{0, 0}, {-1, 0}, {1, 0}});
    CHECK(equivariance_check(s, r) < 1e-3);

    PolynomialSection dbl(2, {{0, 0}, {0, 0}, {1, 0}});
    bool threw = false;
    try {
        equivariance_check(dbl, r);
    } catch (const Error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("nothing to compare") != std::string::npos);
    }
    CHECK(threw);
}
