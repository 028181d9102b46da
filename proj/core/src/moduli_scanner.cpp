#include "sbs/moduli_scanner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "sbs/errors.hpp"
#include "sbs/rng.hpp"
#include "sbs/variational_oracle.hpp"

namespace sbs {

namespace {

constexpr double kDiscriminantBand = 1e-3;

SpherePoint random_sphere_point(Rng& rng) {
    auto a = rng.sphere_point();
    return SpherePoint::from_unit_vec(Vec3{a[0], a[1], a[2]});
}

std::vector<SpherePoint> fibonacci_lattice(int n) {
    // golden-angle spiral, a reasonable low-discrepancy sphere covering
    std::vector<SpherePoint> pts;
    pts.reserve(std::size_t(n));
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (double(i) + 0.5) / double(n);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * double(i);
        pts.push_back(SpherePoint::from_unit_vec(
            Vec3{r * std::cos(phi), r * std::sin(phi), z}));
    }
    return pts;
}

bool well_separated(const std::vector<SpherePoint>& zs, double min_sep) {
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t j = i + 1; j < zs.size(); ++j)
            if (chordal_distance(zs[i], zs[j]) <= min_sep) return false;
    return true;
}

std::vector<PolynomialSection> generate_sections(const ScanSpec& spec, int degree) {
    if (spec.count < 1) throw input_error("scan needs a positive section count");
    std::vector<PolynomialSection> out;
    out.reserve(std::size_t(spec.count));

    switch (spec.kind) {
    case ScanKind::random:
        for (int i = 0; i < spec.count; ++i) {
            Rng rng = Rng::for_record(spec.seed, std::uint64_t(i));
            std::vector<SpherePoint> zs(static_cast<std::size_t>(degree));
            int attempts = 0;
            do {
                for (auto& z : zs) z = random_sphere_point(rng);
                if (++attempts > 10000)
                    throw numeric_error("could not sample separated zeros");
            } while (!well_separated(zs, spec.min_zero_separation));
            out.push_back(section_from_zeros(degree, zs));
        }
        break;
    case ScanKind::veronese: {
        if (degree != 2) throw input_error("veronese scan is specific to degree 2");
        for (int i = 0; i < spec.count; ++i) {
            Rng rng = Rng::for_record(spec.seed, std::uint64_t(i));
            SpherePoint u = random_sphere_point(rng);
            out.push_back(section_from_zeros(2, {u, u}));
        }
        break;
    }
    case ScanKind::grid: {
        if (degree != 2) throw input_error("grid scan is specific to degree 2");
        auto pts = fibonacci_lattice(std::max(spec.grid_points, 4));
        for (std::size_t i = 0; i < pts.size() && int(out.size()) < spec.count; ++i)
            for (std::size_t j = i + 1; j < pts.size() && int(out.size()) < spec.count;
                 ++j)
                if (chordal_distance(pts[i], pts[j]) > spec.min_zero_separation)
                    out.push_back(section_from_zeros(2, {pts[i], pts[j]}));
        if (int(out.size()) < spec.count)
            throw input_error("grid too small for the requested record count");
        break;
    }
    }
    return out;
}

double loop_set_distance(const std::vector<LoopSample>& a,
                         const std::vector<LoopSample>& b) {
    double worst = 0.0;
    for (const auto& la : a) {
        double best = 2.0;
        for (const auto& lb : b) best = std::min(best, loop_hausdorff(la, lb));
        worst = std::max(worst, best);
    }
    for (const auto& lb : b) {
        double best = 2.0;
        for (const auto& la : a) best = std::min(best, loop_hausdorff(la, lb));
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<LoopSample> certificate_loops(
    const std::vector<SpecialCycleCertificate>& certs) {
    std::vector<LoopSample> loops;
    loops.reserve(certs.size());
    for (const auto& c : certs) loops.push_back(c.loop);
    return loops;
}

} // namespace

std::string section_key(const PolynomialSection& s) {
    PolynomialSection n = normalize_section(s);
    std::string key;
    char buf[64];
    for (const auto& c : n.coeffs) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g;", c.real(), c.imag());
        key += buf;
    }
    return key;
}

ModuliRecord scan_section(const PolynomialSection& s, const ScanSpec& spec,
                          std::uint64_t record_seed) {
    auto t0 = std::chrono::steady_clock::now();
    ModuliRecord rec;
    rec.section = normalize_section(s);
    try {
        rec.zeros = section_zeros(rec.section);
        VeroneseTest vt = is_on_veronese(rec.section);
        rec.discriminant = vt.normalized_discriminant;
        rec.near_discriminant = rec.discriminant < kDiscriminantBand;

        rec.cycles = find_special_cycles(rec.section);
        rec.fiber_size = int(rec.cycles.size());

        if (spec.with_oracle) {
            auto oracle = oracle_find_special(rec.section,
                                              std::max(spec.oracle_starts, 1),
                                              record_seed);
            if (!rec.cycles.empty() && !oracle.empty())
                rec.method_agreement =
                    loop_set_distance(certificate_loops(rec.cycles), oracle);
            else if (rec.cycles.size() != oracle.size())
                rec.failure = "tracer and oracle fiber sizes disagree";
        }
    } catch (const Error& e) {
        rec.failure = e.what();
    } catch (const std::exception& e) {
        rec.failure = e.what();
    }
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

ScanReport scan(const ScanSpec& spec, int degree) {
    if (degree < 1) throw input_error("degree must be positive");
    ScanReport report;
    report.spec = spec;
    report.degree = degree;

    auto sections = generate_sections(spec, degree);
    const std::size_t n = sections.size();
    report.records.resize(n);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            report.records[i] =
                scan_section(sections[i], spec, Rng::for_record(spec.seed, i).next_u64());
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    std::size_t n_threads = std::min<std::size_t>(std::max(1u, hw), std::min<std::size_t>(n, 8));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::stable_sort(report.records.begin(), report.records.end(),
                     [](const ModuliRecord& a, const ModuliRecord& b) {
                         return section_key(a.section) < section_key(b.section);
                     });

    int max_fiber = 0;
    for (const auto& r : report.records) max_fiber = std::max(max_fiber, r.fiber_size);
    report.fiber_histogram.assign(std::size_t(max_fiber) + 1, 0);
    for (const auto& r : report.records)
        ++report.fiber_histogram[std::size_t(r.fiber_size)];

    for (const auto& r : report.records)
        report.discriminant_curve.emplace_back(r.discriminant, r.fiber_size);
    std::sort(report.discriminant_curve.begin(), report.discriminant_curve.end());
    return report;
}

ContinuityProbe continuity_probe(const PolynomialSection& s0,
                                 const std::vector<cplx>& direction, int steps,
                                 double h) {
    if (steps < 1) throw input_error("need at least one step");
    if (!(h > 0.0)) throw input_error("step size must be positive");
    if (direction.size() > s0.coeffs.size())
        throw input_error("direction has more coefficients than the section");

    ContinuityProbe probe;
    std::vector<LoopSample> prev;
    for (int k = 0; k <= steps; ++k) {
        std::vector<cplx> coeffs = s0.coeffs;
        for (std::size_t i = 0; i < direction.size(); ++i)
            coeffs[i] += double(k) * h * direction[i];

        PolynomialSection sk;
        try {
            sk = normalize_section(PolynomialSection(s0.degree, coeffs));
        } catch (const Error&) {
            probe.truncated = true;
            break;
        }
        if (is_on_veronese(sk).normalized_discriminant < kDiscriminantBand) {
            probe.truncated = true;
            break;
        }
        std::vector<LoopSample> fiber;
        try {
            fiber = certificate_loops(find_special_cycles(sk));
        } catch (const Error&) {
            probe.truncated = true;
            break;
        }
        if (fiber.empty()) {
            probe.truncated = true;
            break;
        }
        if (k > 0) probe.distances.push_back(loop_set_distance(prev, fiber));
        prev = std::move(fiber);
        probe.steps_completed = k;
    }

    for (double d : probe.distances) probe.slope = std::max(probe.slope, d / h);
    return probe;
}

double equivariance_check(const PolynomialSection& s, const SU2& r) {
    auto base = find_special_cycles(s);
    if (base.empty()) throw rejection_error("nothing to compare: the fiber is empty");
    auto rotated = find_special_cycles(rotate_section(r, s));
    if (rotated.empty()) return 2.0;

    std::vector<LoopSample> mapped;
    mapped.reserve(base.size());
    for (const auto& c : base) mapped.push_back(r.apply(c.loop));
    return loop_set_distance(mapped, certificate_loops(rotated));
}

PolynomialSection veronese_map(const SpherePoint& a, const SpherePoint& b) {
    return section_from_zeros(2, {a, b});
}

} // namespace sbs
