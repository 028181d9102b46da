#include "sbs/foliation_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "sbs/conventions.hpp"
#include "sbs/ode.hpp"

namespace sbs {

namespace {

constexpr double kCaptureRadius = 1e-4;
constexpr double kLaunchOffset = 1e-3;
constexpr double kEscapeLength = 2e-2;
constexpr double kJunctionTol = 2.0 * kPi / 180.0;
constexpr std::size_t kTraceStepLimit = 1000000;
constexpr std::size_t kMaxRecordedPoints = 200000;

struct TraceContext {
    const PolynomialSection& section;
    std::vector<SectionZero> zeros;
    std::vector<FoliationSingularity> sings;
};

// direction of ker Im(g dz) at a chart point, aligned with a reference;
// falls back to the reference when g cannot be evaluated
cplx field_direction(const PolynomialSection& s, Chart chart, cplx z, cplx ref) {
    SpherePoint p(chart, z);
    cplx f = s.chart_value(p);
    double scale = 0.0;
    for (const auto& c : s.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(f) < 1e-12 * std::max(1.0, scale)) return ref;
    cplx df = s.chart_derivative(p);
    cplx g = df / f - double(s.degree) * std::conj(z) / (1.0 + std::norm(z));
    double m = std::abs(g);
    if (m < 1e-300) return ref;
    cplx dir = std::conj(g) / m;
    if (std::real(dir * std::conj(ref)) < 0.0) dir = -dir;
    return dir;
}

double nearest_singularity(const TraceContext& ctx, const SpherePoint& p, int skip,
                           int& which) {
    double best = 4.0;
    which = -1;
    for (std::size_t j = 0; j < ctx.sings.size(); ++j) {
        if (int(j) == skip) continue;
        double d = chordal_distance(ctx.sings[j].position, p);
        if (d < best) {
            best = d;
            which = int(j);
        }
    }
    return best;
}

SeparatrixPath trace_impl(const TraceContext& ctx, const SpherePoint& start, cplx dir,
                          int start_idx) {
    SeparatrixPath path;
    path.start_singularity = start_idx;

    double dn = std::abs(dir);
    if (!(dn > 0.0)) throw input_error("trace direction must be nonzero");
    dir /= dn;

    Chart chart = start.chart;
    cplx z = start.coord;
    if (std::abs(z) > kChartSwitchRadius) {
        SpherePoint q = chart_transition(start);
        dir = -q.coord * q.coord * dir;
        dir /= std::abs(dir);
        chart = q.chart;
        z = q.coord;
    }
    if (start_idx >= 0) z += kLaunchOffset * dir;

    cplx u_prev = dir;
    SpherePoint launch(chart, z);
    path.points.push_back(launch);

    double len = 0.0;
    std::size_t steps = 0;
    double h = 1e-3;

    while (true) {
        if (++steps > kTraceStepLimit || path.points.size() > kMaxRecordedPoints) {
            path.end_event = TraceEvent::step_limit;
            break;
        }

        SpherePoint here(chart, z);
        int near_idx = -1;
        double sing_dist =
            nearest_singularity(ctx, here, len < kEscapeLength ? start_idx : -2, near_idx);
        double zero_dist = distance_to_zeros(ctx.zeros, here);

        cplx f_ref = field_direction(ctx.section, chart, z, u_prev);

        OdeOptions opts;
        opts.rtol = 1e-10;
        opts.atol = 1e-12;
        opts.h_max = std::max(1e-5, 0.4 * std::min(sing_dist, zero_dist));
        opts.h_min = 1e-14;
        DormandPrince<2> stepper(
            [&ctx, chart, f_ref](double, const OdeState<2>& y, OdeState<2>& dy) {
                cplx d = field_direction(ctx.section, chart, cplx(y[0], y[1]), f_ref);
                dy = {d.real(), d.imag()};
            },
            opts);

        h = std::min(h, opts.h_max);
        OdeState<2> ynext;
        bool accepted = stepper.try_step(0.0, {z.real(), z.imag()}, h, ynext);
        if (!accepted) {
            if (h <= 2e-14) {
                path.end_event = TraceEvent::left_domain;
                break;
            }
            continue;
        }

        cplx z_new(ynext[0], ynext[1]);
        SpherePoint p_new(chart, z_new);
        len += chordal_distance(here, p_new);
        path.points.push_back(p_new);

        cplx moved = z_new - z;
        if (std::abs(moved) > 0.0) u_prev = moved / std::abs(moved);
        z = z_new;

        int cap_idx = -1;
        double cap_dist =
            nearest_singularity(ctx, p_new, len < kEscapeLength ? start_idx : -2, cap_idx);
        if (cap_dist < kCaptureRadius) {
            path.end_singularity = cap_idx;
            path.end_event = TraceEvent::reached_singularity;
            break;
        }
        if (distance_to_zeros(ctx.zeros, p_new) < kDefaultZeroExclusion) {
            path.end_event = TraceEvent::hit_section_zero_zone;
            break;
        }
        if (start_idx < 0 && len > 0.3 &&
            chordal_distance(p_new, launch) < 1e-3) {
            path.end_event = TraceEvent::closed_onto_start;
            break;
        }

        if (std::abs(z) > kChartSwitchRadius) {
            cplx w = 1.0 / z;
            u_prev = -w * w * u_prev;
            u_prev /= std::abs(u_prev);
            chart = chart == Chart::Z ? Chart::W : Chart::Z;
            z = w;
        }
    }

    path.length = len;
    return path;
}

// Tikhonov-regularized Gauss-Newton step toward {g = 0}; works for both
// isolated zeros (full rank) and curve points (rank one)
bool correct_to_g_zero(const PolynomialSection& s, SpherePoint& p, int max_iter,
                       double target) {
    for (int it = 0; it < max_iter; ++it) {
        // stay in the chart where the curve is visible: past the switch
        // radius |g| shrinks like 1/|z|^2 and the residual test goes blind
        if (std::abs(p.coord) > kChartSwitchRadius) p = chart_transition(p);
        cplx g;
        GDerivatives der;
        try {
            g = log_derivative_g(s, p);
            der = log_derivative_g_derivatives(s, p);
        } catch (const Error&) {
            return false;
        }
        if (std::abs(g) < target) return true;

        double a11 = std::real(der.A + der.B), a12 = -std::imag(der.A - der.B);
        double a21 = std::imag(der.A + der.B), a22 = std::real(der.A - der.B);
        double g1 = g.real(), g2 = g.imag();

        // solve (M^T M + lambda I) delta = -M^T g
        double m11 = a11 * a11 + a21 * a21, m12 = a11 * a12 + a21 * a22;
        double m22 = a12 * a12 + a22 * a22;
        double lambda = 1e-12 * (m11 + m22) + 1e-300;
        m11 += lambda;
        m22 += lambda;
        double r1 = -(a11 * g1 + a21 * g2), r2 = -(a12 * g1 + a22 * g2);
        double det = m11 * m22 - m12 * m12;
        double dx = (r1 * m22 - r2 * m12) / det;
        double dy = (m11 * r2 - m12 * r1) / det;

        double step = std::hypot(dx, dy);
        if (step > 0.2) {
            dx *= 0.2 / step;
            dy *= 0.2 / step;
        }
        cplx next = p.coord + cplx(dx, dy);
        if (std::abs(next) > kChartSwitchRadius)
            p = chart_transition(SpherePoint(p.chart, next));
        else
            p = SpherePoint(p.chart, next);
    }
    cplx g;
    try {
        g = log_derivative_g(s, p);
    } catch (const Error&) {
        return false;
    }
    return std::abs(g) < target;
}

// tangent of the zero curve from the null direction of the linearization
cplx curve_tangent(const PolynomialSection& s, const SpherePoint& p, cplx prev) {
    GDerivatives der = log_derivative_g_derivatives(s, p);
    if (std::abs(der.A) < 1e-14)
        throw numeric_error("zero curve tangent is undefined here");
    double psi = 0.5 * std::arg(-der.B / der.A);
    cplx tau = std::polar(1.0, psi);
    if (std::abs(prev) > 0.0 && std::real(tau * std::conj(prev)) < 0.0) tau = -tau;
    return tau;
}

std::vector<std::vector<int>> cluster_points(const std::vector<SpherePoint>& pts,
                                             double link) {
    std::vector<int> parent(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = int(i);
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (chordal_distance(pts[i], pts[j]) < link) parent[find(int(i))] = find(int(j));
    std::vector<std::vector<int>> comps;
    std::vector<int> root_comp(pts.size(), -1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        int r = find(int(i));
        if (root_comp[r] < 0) {
            root_comp[r] = int(comps.size());
            comps.emplace_back();
        }
        comps[root_comp[r]].push_back(int(i));
    }
    return comps;
}

} // namespace

SingularityClassification classify_singularity(const PolynomialSection& s,
                                               const FoliationSingularity& sing) {
    if (sing.kind == SingularityKind::curve_of_zeros)
        throw input_error("degenerate singularity: g vanishes along a curve here");

    SingularityClassification out;
    out.linearization = log_derivative_g_derivatives(s, sing.position);
    double a = std::abs(out.linearization.A);
    double b = std::abs(out.linearization.B);

    if (a < 0.05 * b || std::abs(a - b) < 1e-9 * (a + b)) {
        out.type = SingularityClassification::Type::degenerate;
        for (int k = 0; k < 8; ++k)
            out.directions.push_back(std::polar(1.0, 0.25 * kPi * double(k)));
        return out;
    }

    out.type = a > b ? SingularityClassification::Type::saddle
                     : SingularityClassification::Type::node;
    // invariant rays solve Im(A e^{2 i phi} + B) = 0 with B real: two
    // orthogonal lines through the singularity
    double phi0 = -0.5 * std::arg(out.linearization.A);
    for (int k = 0; k < 4; ++k)
        out.directions.push_back(std::polar(1.0, phi0 + 0.5 * kPi * double(k)));
    return out;
}

SeparatrixPath trace_separatrix(const PolynomialSection& s, const SpherePoint& start,
                                cplx dir) {
    TraceContext ctx{s, section_zeros(s), g_zeros(s)};

    // a start on a degenerate zero curve of g belongs to the curve tracer;
    // the transverse direction field is meaningless there
    bool curve_case = false;
    for (const auto& sing : ctx.sings)
        if (sing.kind == SingularityKind::curve_of_zeros) {
            curve_case = true;
            break;
        }
    if (curve_case) {
        SpherePoint probe = start;
        if (correct_to_g_zero(s, probe, 8, 1e-10) &&
            chordal_distance(probe, start) < 1e-5) {
            ZeroCurve curve = trace_zero_curve(s, start);
            SeparatrixPath path;
            path.points = curve.points;
            path.end_event = curve.closed ? TraceEvent::closed_onto_start
                                          : TraceEvent::left_domain;
            for (std::size_t i = 1; i < path.points.size(); ++i)
                path.length += chordal_distance(path.points[i - 1], path.points[i]);
            return path;
        }
    }

    int idx = -1;
    nearest_singularity(ctx, start, -2, idx);
    if (idx >= 0 && chordal_distance(ctx.sings[idx].position, start) > 1e-3) idx = -1;
    const SpherePoint at = idx >= 0 ? ctx.sings[idx].position : start;
    return trace_impl(ctx, at, dir, idx);
}

ZeroCurve trace_zero_curve(const PolynomialSection& s, const SpherePoint& seed) {
    SpherePoint p = std::abs(seed.coord) > kChartSwitchRadius ? chart_transition(seed) : seed;
    if (!correct_to_g_zero(s, p, 20, 1e-11))
        throw input_error("seed is not on a zero curve of g");

    ZeroCurve out;
    out.points.push_back(p);
    SpherePoint start = p;

    // chart-coordinate step cap; chordal spacing is at most twice this, so
    // the sampled polyline stays within ~3e-7 of the continuous curve
    constexpr double kStepMax = 7.5e-4;
    constexpr double kCloseDist = 2e-4;

    cplx tau = curve_tangent(s, p, cplx(0.0, 0.0));
    double h = kStepMax;
    double len = 0.0;

    for (std::size_t step = 0; step < kTraceStepLimit; ++step) {
        cplx trial_tau;
        try {
            trial_tau = curve_tangent(s, p, tau);
        } catch (const Error&) {
            throw numeric_error("zero curve tangent lost after length " +
                                std::to_string(len));
        }

        double h_step = h;
        if (len > 0.3) {
            double d = chordal_distance(p, start);
            double metric = 2.0 / (1.0 + std::norm(p.coord));
            if (d < 4.0 * h * metric)
                h_step = std::min(h, std::max(0.5 * d / metric, 5e-5));
        }

        SpherePoint q(p.chart, p.coord + h_step * trial_tau);
        if (!correct_to_g_zero(s, q, 6, 1e-11)) {
            h *= 0.5;
            if (h < 1e-6)
                throw numeric_error("zero curve corrector diverged after length " +
                                    std::to_string(len));
            continue;
        }
        if (h_step >= h) h = std::min(h * 1.25, kStepMax);

        // carry the tangent into the chart the corrector settled on
        cplx tau_next = trial_tau;
        if (q.chart != p.chart) {
            cplx w = q.coord;
            tau_next = -w * w * trial_tau;
            tau_next /= std::abs(tau_next);
        }

        len += chordal_distance(p, q);
        p = q;
        tau = tau_next;

        if (len > 0.3 && chordal_distance(p, start) < kCloseDist) {
            out.closed = true;
            break;
        }
        out.points.push_back(p);
    }
    return out;
}

SpecialCycleCertificate certify_loop(const PolynomialSection& s, const LoopSample& loop,
                                     const CertifyOptions& opts) {
    auto zeros = section_zeros(s);

    double mind = 4.0;
    for (const auto& p : loop.points) mind = std::min(mind, distance_to_zeros(zeros, p));
    if (mind <= opts.zero_exclusion)
        throw rejection_error("cycle enters the zero zone of the section");

    if (!loop_is_embedded(loop)) throw rejection_error("loop is not embedded");

    BohrSommerfeld bs = is_bohr_sommerfeld(s.degree, loop, opts.bs_tol);
    if (!bs.satisfied) throw rejection_error("loop is not Bohr-Sommerfeld");
    if (std::abs(bs.area - std::round(bs.area)) > opts.area_tol)
        throw rejection_error("enclosed area is not an integer");

    AlphaTrace at = alpha_trace(s, loop, opts.bs_tol);
    if (at.arg_deviation > opts.arg_tol)
        throw rejection_error("alpha argument is not constant along the loop");
    if (at.winding != 0) throw rejection_error("alpha winds around zero");

    SpecialCycleCertificate cert;
    cert.loop = loop;
    cert.arg_deviation = at.arg_deviation;
    cert.phase_defect = bs.phase_defect;
    cert.area = bs.area;
    cert.winding = at.winding;
    cert.min_zero_distance = mind;
    for (const auto& z : zeros)
        cert.separates.emplace_back(z, side_of_point(loop, z.position));
    return cert;
}

namespace {

struct Candidate {
    std::vector<SpherePoint> points;
    std::vector<int> seed_traces;
    std::vector<double> junction_angles;
    bool from_zero_curve = false;
};

struct TraceEdge {
    int id;
    bool reversed;     // ker beta is a line field: every arc is traversable both ways
    int from, to;
    Vec3 out_tangent;  // direction of motion leaving `from`
    Vec3 in_tangent;   // direction of motion arriving at `to`
};

void collect_cycles(const std::vector<TraceEdge>& edges,
                    const std::vector<SeparatrixPath>& traces,
                    const std::vector<FoliationSingularity>& sings,
                    std::vector<Candidate>& out) {
    std::set<std::vector<int>> seen;

    // path holds indices into `edges`
    std::vector<int> path;
    std::function<void(int)> dfs = [&](int anchor) {
        const TraceEdge& last = edges[path.back()];

        if (last.to == edges[anchor].from) {
            double close_angle =
                std::acos(std::clamp(last.in_tangent.dot(edges[anchor].out_tangent),
                                     -1.0, 1.0));
            if (close_angle <= kJunctionTol) {
                std::vector<int> key(path);
                std::sort(key.begin(), key.end());
                if (seen.insert(key).second) {
                    Candidate c;
                    for (std::size_t m = 0; m < path.size(); ++m) {
                        const TraceEdge& e = edges[path[m]];
                        const auto& pts = traces[e.id].points;
                        if (e.reversed)
                            c.points.insert(c.points.end(), pts.rbegin(), pts.rend());
                        else
                            c.points.insert(c.points.end(), pts.begin(), pts.end());
                        c.points.push_back(sings[e.to].position);
                        c.seed_traces.push_back(e.id);
                        if (m + 1 < path.size()) {
                            const TraceEdge& f = edges[path[m + 1]];
                            c.junction_angles.push_back(std::acos(std::clamp(
                                e.in_tangent.dot(f.out_tangent), -1.0, 1.0)));
                        }
                    }
                    c.junction_angles.push_back(close_angle);
                    out.push_back(std::move(c));
                }
            }
        }

        if (path.size() >= 8) return;
        for (std::size_t fi = 0; fi < edges.size(); ++fi) {
            const TraceEdge& f = edges[fi];
            if (f.from != last.to) continue;
            if (std::find(path.begin(), path.end(), int(fi)) != path.end()) continue;
            double angle = std::acos(
                std::clamp(last.in_tangent.dot(f.out_tangent), -1.0, 1.0));
            if (angle > kJunctionTol) continue;
            path.push_back(int(fi));
            dfs(anchor);
            path.pop_back();
        }
    };

    for (std::size_t e = 0; e < edges.size(); ++e) {
        path.assign(1, int(e));
        dfs(int(e));
    }
}

} // namespace

std::vector<SpecialCycleCertificate> find_special_cycles(const PolynomialSection& s) {
    PolynomialSection sn = normalize_section(s);
    TraceContext ctx{sn, section_zeros(sn), {}};
    bool have_sings = true;
    try {
        ctx.sings = g_zeros(sn);
    } catch (const Error&) {
        have_sings = false;
    }

    std::vector<SeparatrixPath> traces;
    std::vector<Candidate> candidates;

    if (have_sings) {
        std::vector<SpherePoint> curve_pts;
        std::vector<int> isolated_ids;
        for (std::size_t i = 0; i < ctx.sings.size(); ++i) {
            if (ctx.sings[i].kind == SingularityKind::curve_of_zeros)
                curve_pts.push_back(ctx.sings[i].position);
            else
                isolated_ids.push_back(int(i));
        }

        if (!curve_pts.empty()) {
            for (const auto& comp : cluster_points(curve_pts, 0.25)) {
                try {
                    ZeroCurve zc = trace_zero_curve(sn, curve_pts[comp.front()]);
                    if (zc.closed && zc.points.size() >= 16) {
                        Candidate c;
                        c.points = zc.points;
                        c.from_zero_curve = true;
                        candidates.push_back(std::move(c));
                    }
                } catch (const Error&) {
                    // component did not yield a closed curve; certification of
                    // other candidates is unaffected
                }
            }
        }

        for (int i : isolated_ids) {
            SingularityClassification cls;
            try {
                cls = classify_singularity(sn, ctx.sings[i]);
            } catch (const Error&) {
                continue;
            }
            for (cplx dir : cls.directions)
                traces.push_back(trace_impl(ctx, ctx.sings[i].position, dir, i));
        }

        std::vector<TraceEdge> edges;
        for (std::size_t t = 0; t < traces.size(); ++t) {
            const SeparatrixPath& tr = traces[t];
            if (tr.end_event != TraceEvent::reached_singularity) continue;
            if (tr.points.size() < 4) continue;
            TraceEdge e;
            e.id = int(t);
            e.reversed = false;
            e.from = tr.start_singularity;
            e.to = tr.end_singularity;
            // the launch offset sits on the invariant ray, so the secant from
            // the singularity is exact; the first integrated step is not (it
            // still carries the transverse relaxation onto the separatrix)
            Vec3 a = ctx.sings[tr.start_singularity].position.unit_vec();
            Vec3 b = tr.points.front().unit_vec();
            e.out_tangent = (b - a).normalized();
            Vec3 last = tr.points.back().unit_vec();
            Vec3 target = ctx.sings[tr.end_singularity].position.unit_vec();
            e.in_tangent = (target - last).normalized();
            edges.push_back(e);

            TraceEdge r;
            r.id = e.id;
            r.reversed = true;
            r.from = e.to;
            r.to = e.from;
            r.out_tangent = e.in_tangent * -1.0;
            r.in_tangent = e.out_tangent * -1.0;
            edges.push_back(r);
        }
        collect_cycles(edges, traces, ctx.sings, candidates);
    } else {
        // no singularities converged: fall back to a ring of seeds and keep
        // traces that close onto themselves
        for (int k = 0; k < 16; ++k) {
            SpherePoint seed(Chart::Z, std::polar(1.0, kTwoPi * double(k) / 16.0));
            cplx f0;
            try {
                f0 = std::conj(log_derivative_g(sn, seed));
            } catch (const Error&) {
                continue;
            }
            if (std::abs(f0) < 1e-12) continue;
            f0 /= std::abs(f0);
            for (cplx dir : {f0, -f0}) {
                SeparatrixPath tr = trace_impl(ctx, seed, dir, -1);
                if (tr.end_event == TraceEvent::closed_onto_start &&
                    tr.points.size() >= 16) {
                    Candidate c;
                    c.points = tr.points;
                    c.seed_traces.push_back(int(traces.size()));
                    candidates.push_back(std::move(c));
                }
                traces.push_back(std::move(tr));
            }
        }
    }

    std::vector<SpecialCycleCertificate> certs;
    for (const auto& cand : candidates) {
        try {
            LoopSample raw{cand.points, Orientation::positive};
            LoopSample loop = resample_loop(raw, 512);
            SpecialCycleCertificate cert = certify_loop(sn, loop);
            cert.junction_angles = cand.junction_angles;
            cert.seed_traces = cand.seed_traces;
            cert.from_zero_curve = cand.from_zero_curve;

            bool dup = false;
            for (const auto& prev : certs)
                if (loop_hausdorff(prev.loop, cert.loop) < 1e-4) {
                    dup = true;
                    break;
                }
            if (!dup) certs.push_back(std::move(cert));
        } catch (const Error&) {
            // candidate failed a certification gate; a valid negative
        }
    }
    return certs;
}

LoopSample perturb_loop_normal(const LoopSample& loop, double amplitude, Rng& rng) {
    std::vector<Vec3> vecs = loop.traversal_vecs();
    const std::size_t n = vecs.size();
    if (n < 8) throw input_error("loop too coarse to perturb");

    double ac[4], as[4];
    for (int k = 0; k < 4; ++k) {
        ac[k] = rng.gaussian();
        as[k] = rng.gaussian();
    }
    std::vector<double> u(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = kTwoPi * double(i) / double(n);
        double v = 0.0;
        for (int k = 0; k < 4; ++k)
            v += ac[k] * std::cos(double(k) * t) + as[k] * std::sin(double(k) * t);
        u[i] = v;
        peak = std::max(peak, std::abs(v));
    }
    if (peak < 1e-12) peak = 1.0;

    LoopSample out;
    out.orientation = Orientation::positive;
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 x = vecs[i];
        Vec3 tprev = vecs[(i + 1) % n] - vecs[(i + n - 1) % n];
        Vec3 tau = (tprev - x * tprev.dot(x)).normalized();
        Vec3 nu = tau.cross(x);
        double ang = amplitude * u[i] / peak;
        Vec3 moved = x * std::cos(ang) + nu * std::sin(ang);
        out.points.push_back(SpherePoint::from_unit_vec(moved));
    }
    return out;
}

} // namespace sbs
