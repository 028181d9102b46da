#include "sbs/transport.hpp"

#include <algorithm>
#include <cmath>

#include "sbs/conventions.hpp"
#include "sbs/ode.hpp"

namespace sbs {

namespace {

SpherePoint traversal_point(const LoopSample& loop, std::size_t i) {
    const std::size_t n = loop.points.size();
    return loop.orientation == Orientation::positive ? loop.points[i]
                                                     : loop.points[n - 1 - i];
}

// largest coordinate modulus the segment [knot i, knot i+1] reaches in a
// chart, probed at the endpoints and midpoint
double segment_reach(const SmoothLoop& sl, std::size_t i, Chart c) {
    double a = sl.knot(i), b = sl.knot(i + 1);
    double worst = 0.0;
    for (double t : {a, 0.5 * (a + b), b}) {
        Vec3 x = sl.position(t);
        double denom = c == Chart::Z ? 1.0 - x.z : 1.0 + x.z;
        double num = std::hypot(x.x, x.y);
        if (denom < 1e-12 * (num + 1.0)) return 1e30;
        worst = std::max(worst, num / denom);
    }
    return worst;
}

Chart segment_chart(const SmoothLoop& sl, std::size_t i, Chart active) {
    double mz = segment_reach(sl, i, Chart::Z);
    double mw = segment_reach(sl, i, Chart::W);
    double ma = active == Chart::Z ? mz : mw;
    if (ma <= 2.0) return active;  // hysteresis: keep the frame when possible
    return mz <= mw ? Chart::Z : Chart::W;
}

cplx ipow(cplx base, int n) {
    cplx acc(1.0, 0.0);
    for (int k = 0; k < n; ++k) acc *= base;
    return acc;
}

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

} // namespace

TransportResult parallel_transport(int degree, const LoopSample& loop, cplx v0) {
    if (degree < 1) throw input_error("bundle degree must be at least 1");
    if (!(std::abs(v0) > 0.0) || !std::isfinite(std::abs(v0)))
        throw input_error("transport needs a nonzero finite start vector");

    SmoothLoop sl(loop);
    const std::size_t n = sl.segments();

    TransportResult out;
    out.loop_length = sl.chord_length();
    out.sigma_samples.resize(n);

    // v0 lives in the first traversal sample's chart
    SpherePoint p0 = traversal_point(loop, 0);
    Chart active = p0.chart;
    cplx v = v0;

    auto h_norm_factor = [degree](cplx coord) {
        return std::pow(1.0 + std::norm(coord), -0.5 * double(degree));
    };

    double n0 = -1.0;
    double drift = 0.0;

    for (std::size_t seg = 0; seg < n; ++seg) {
        double ta = sl.knot(seg), tb = sl.knot(seg + 1);

        Chart c = segment_chart(sl, seg, active);
        if (c != active) {
            cplx u_new = sl.chart_state(ta, c).coord;
            v *= ipow(u_new, degree);
            active = c;
        }

        auto st0 = sl.chart_state(ta, active);
        double hn = std::abs(v) * h_norm_factor(st0.coord);
        if (n0 < 0.0) n0 = hn;
        drift = std::max(drift, std::abs(hn / n0 - 1.0));

        // report the frame coefficient in the sample's own stored chart
        SpherePoint pi = traversal_point(loop, seg);
        out.sigma_samples[seg] = pi.chart == active ? v : v * ipow(pi.coord, degree);

        OdeOptions opts;
        opts.rtol = default_integrator_rtol();
        opts.atol = 1e-13;
        opts.h_init = tb - ta;
        opts.h_max = tb - ta;
        DormandPrince<2> stepper(
            [&sl, active, degree](double t, const OdeState<2>& y, OdeState<2>& dy) {
                auto st = sl.chart_state(t, active);
                cplx vv(y[0], y[1]);
                cplx dv = double(degree) * std::conj(st.coord) * st.vel /
                          (1.0 + std::norm(st.coord)) * vv;
                dy = {dv.real(), dv.imag()};
            },
            opts);
        OdeState<2> y = stepper.integrate(ta, {v.real(), v.imag()}, tb);
        v = cplx(y[0], y[1]);
    }

    // close up in the starting frame
    if (active != p0.chart) v *= ipow(p0.coord, degree);
    double hn_end = std::abs(v) * h_norm_factor(p0.coord);
    drift = std::max(drift, std::abs(hn_end / n0 - 1.0));

    cplx ratio = v / v0;
    double mag = std::abs(ratio);
    if (!(mag > 0.0) || !std::isfinite(mag))
        throw numeric_error("transport lost the frame coefficient");

    out.holonomy = ratio / mag;
    out.phase_defect = std::abs(std::atan2(out.holonomy.imag(), out.holonomy.real()));
    out.norm_drift = drift;
    return out;
}

BohrSommerfeld is_bohr_sommerfeld(int degree, const LoopSample& loop, double tol) {
    if (tol <= 0.0) throw input_error("tolerance must be positive");
    if (!loop_is_embedded(loop)) throw input_error("loop is not embedded");

    BohrSommerfeld out;
    TransportResult tr = parallel_transport(degree, loop, cplx(1.0, 0.0));
    out.holonomy = tr.holonomy;
    out.phase_defect = tr.phase_defect;
    out.area = enclosed_area({loop, Side::left}, degree);
    out.satisfied = out.phase_defect < tol;

    double area_defect = std::abs(out.area - std::round(out.area));
    if (std::abs(out.phase_defect - kTwoPi * area_defect) > 1e-6 * kTwoPi)
        throw numeric_error("holonomy phase and enclosed area disagree");
    return out;
}

namespace {

// transport is unitary for the Hermitian connection, so scaling one sample
// to unit h-norm makes the whole frame unit h-norm
void scale_to_unit_h_norm(int degree, const LoopSample& loop, std::vector<cplx>& sigma) {
    std::size_t base = 0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (traversal_point(loop, i).chart == Chart::Z) {
            base = i;
            break;
        }
    }
    SpherePoint pb = traversal_point(loop, base);
    cplx vb = sigma[base];
    cplx unitary = vb * std::pow(1.0 + std::norm(pb.coord), -0.5 * double(degree));
    cplx scale = 1.0 / unitary;
    for (auto& s : sigma) s *= scale;
}

} // namespace

std::vector<cplx> covariant_constant_section(int degree, const LoopSample& loop,
                                             double tol) {
    BohrSommerfeld bs = is_bohr_sommerfeld(degree, loop, tol);
    if (!bs.satisfied)
        throw rejection_error("no covariantly constant section: holonomy is nontrivial");

    TransportResult tr = parallel_transport(degree, loop, cplx(1.0, 0.0));
    std::vector<cplx> sigma(tr.sigma_samples);
    scale_to_unit_h_norm(degree, loop, sigma);
    return sigma;
}

namespace {

AlphaTrace alpha_trace_impl(const PolynomialSection& s, const LoopSample& loop,
                            bool require_bs, double bs_tol) {
    const std::size_t n = loop.points.size();
    auto zeros = section_zeros(s);
    for (std::size_t i = 0; i < n; ++i) {
        if (distance_to_zeros(zeros, loop.points[i]) < kDefaultZeroExclusion)
            throw rejection_error("section zero on cycle");
    }

    std::vector<cplx> sigma;
    double closure = 0.0;
    if (require_bs) {
        sigma = covariant_constant_section(s.degree, loop, bs_tol);
    } else {
        TransportResult tr = parallel_transport(s.degree, loop, cplx(1.0, 0.0));
        sigma = std::move(tr.sigma_samples);
        closure = tr.phase_defect;
        scale_to_unit_h_norm(s.degree, loop, sigma);
    }

    AlphaTrace out;
    out.closure_defect = closure;
    out.alpha.resize(n);
    out.min_modulus = 1e300;
    cplx mean_dir(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        SpherePoint p = traversal_point(loop, i);
        cplx a = s.chart_value(p) / sigma[i];
        out.alpha[i] = a;
        double m = std::abs(a);
        out.min_modulus = std::min(out.min_modulus, m);
        if (m > 0.0) mean_dir += a / m;
    }
    if (!(out.min_modulus > 0.0))
        throw rejection_error("section zero on cycle");

    double mu = std::atan2(mean_dir.imag(), mean_dir.real());
    double dev = 0.0;
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double arg_i = std::atan2(out.alpha[i].imag(), out.alpha[i].real());
        dev = std::max(dev, std::abs(wrap_angle(arg_i - mu)));
        cplx step = out.alpha[(i + 1) % n] / out.alpha[i];
        turning += std::atan2(step.imag(), step.real());
    }
    out.arg_deviation = dev;
    out.winding = int(std::lround(turning / kTwoPi));
    return out;
}

} // namespace

AlphaTrace alpha_trace(const PolynomialSection& s, const LoopSample& loop, double bs_tol) {
    return alpha_trace_impl(s, loop, true, bs_tol);
}

AlphaTrace alpha_trace_unchecked(const PolynomialSection& s, const LoopSample& loop) {
    return alpha_trace_impl(s, loop, false, 0.0);
}

double winding_area_check(const PolynomialSection& s, const LoopSample& loop,
                          double bs_tol) {
    AlphaTrace at = alpha_trace(s, loop, bs_tol);
    auto zeros = section_zeros(s);
    int m = 0;
    for (const auto& z : zeros) {
        if (side_of_point(loop, z.position) == Side::left) m += z.multiplicity;
    }
    double area = enclosed_area({loop, Side::left}, s.degree);
    return std::abs(double(at.winding) - kWindingSign * (double(m) - area));
}

// declared in prequantum.hpp; lives here to reuse the transport integrator
CurvatureCheck curvature_check(int degree, const SpherePoint& p, double eps) {
    if (degree < 1) throw input_error("bundle degree must be at least 1");
    if (!(eps > 0.0) || eps > 0.5) throw input_error("plaquette size out of range");

    SpherePoint base = std::abs(p.coord) <= kChartSwitchRadius ? p : chart_transition(p);
    cplx z0 = base.coord;

    const cplx corners[5] = {
        z0 + 0.5 * eps * cplx(-1.0, -1.0), z0 + 0.5 * eps * cplx(1.0, -1.0),
        z0 + 0.5 * eps * cplx(1.0, 1.0), z0 + 0.5 * eps * cplx(-1.0, 1.0),
        z0 + 0.5 * eps * cplx(-1.0, -1.0)};

    OdeOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-15;
    opts.h_init = 0.1;
    opts.h_max = 0.25;

    cplx v(1.0, 0.0);
    for (int e = 0; e < 4; ++e) {
        cplx a = corners[e], b = corners[e + 1];
        DormandPrince<2> stepper(
            [a, b, degree](double t, const OdeState<2>& y, OdeState<2>& dy) {
                cplx z = a + (b - a) * t;
                cplx vv(y[0], y[1]);
                cplx dv = double(degree) * std::conj(z) * (b - a) /
                          (1.0 + std::norm(z)) * vv;
                dy = {dv.real(), dv.imag()};
            },
            opts);
        OdeState<2> y = stepper.integrate(0.0, {v.real(), v.imag()}, 1.0);
        v = cplx(y[0], y[1]);
    }

    CurvatureCheck out;
    out.holonomy = v / std::abs(v);
    double q = 1.0 + std::norm(z0);
    out.predicted_phase = kHolonomySign * 2.0 * double(degree) * eps * eps / (q * q);
    out.residual = std::abs(out.holonomy - std::polar(1.0, out.predicted_phase));
    return out;
}

} // namespace sbs
