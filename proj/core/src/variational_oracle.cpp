#include "sbs/variational_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "sbs/conventions.hpp"
#include "sbs/errors.hpp"
#include "sbs/rng.hpp"
#include "sbs/su2.hpp"

namespace sbs {

cplx FourierLoop::value(double t) const {
    cplx base = std::polar(1.0, kTwoPi * t);
    cplx e = std::pow(base, -max_mode);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        acc += modes[i] * e;
        e *= base;
    }
    return acc;
}

cplx FourierLoop::velocity(double t) const {
    cplx base = std::polar(1.0, kTwoPi * t);
    cplx e = std::pow(base, -max_mode);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        double k = double(int(i) - max_mode);
        acc += modes[i] * cplx(0.0, kTwoPi * k) * e;
        e *= base;
    }
    return acc;
}

LoopSample FourierLoop::sample(std::size_t n) const {
    if (n < 8) throw input_error("need at least 8 samples");
    LoopSample out;
    out.orientation = Orientation::positive;
    out.points.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx z = value(double(j) / double(n));
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw numeric_error("loop sample is not finite");
        SpherePoint p(Chart::Z, z);
        if (std::abs(z) > kChartSwitchRadius) p = chart_transition(p);
        out.points.push_back(p);
    }
    return out;
}

FourierLoop circle_modes(cplx center, double radius, int max_mode) {
    if (max_mode < 1) throw input_error("need at least one mode");
    FourierLoop loop(max_mode);
    loop.coeff(0) = center;
    loop.coeff(1) = cplx(radius, 0.0);
    return loop;
}

namespace {

constexpr double kBarrierBase = 1e6;
constexpr double kChartBlowup = 100.0;

struct Evaluator {
    const PolynomialSection& s;
    SpecialityWeights w;
    std::size_t M;
    int K;
    std::vector<SectionZero> zeros;
    std::vector<cplx> ek;  // per-sample mode values, size 2K+1

    Evaluator(const PolynomialSection& sec, const SpecialityWeights& weights,
              std::size_t samples, int max_mode)
        : s(sec), w(weights), M(samples), K(max_mode),
          zeros(section_zeros(sec)), ek(2 * std::size_t(max_mode) + 2) {
        if (M < 64) throw input_error("energy quadrature needs at least 64 samples");
    }

    // energy and optional gradient over (Re c_k, Im c_k) in mode order
    EnergyBreakdown energy(const FourierLoop& loop, std::vector<double>* grad) {
        const std::size_t nm = loop.modes.size();
        if (grad) grad->assign(2 * nm, 0.0);

        std::vector<cplx> zs(M), vs(M), gs(M), As(M), Bs(M);
        std::vector<double> us(M), Fs(M), qs(M);

        EnergyBreakdown out;
        double worst_violation = 0.0;

        for (std::size_t j = 0; j < M; ++j) {
            double t = double(j) / double(M);
            cplx z = loop.value(t);
            cplx v = loop.velocity(t);
            zs[j] = z;
            vs[j] = v;

            double r = std::abs(z);
            if (!std::isfinite(r) || r > kChartBlowup) {
                out.barrier = true;
                worst_violation = std::max(worst_violation, 1.0);
                continue;
            }
            SpherePoint p(Chart::Z, z);
            if (r > kChartSwitchRadius) p = chart_transition(p);
            double dist = distance_to_zeros(zeros, p);
            if (dist < kDefaultZeroExclusion) {
                out.barrier = true;
                worst_violation = std::max(
                    worst_violation, (kDefaultZeroExclusion - dist) / kDefaultZeroExclusion);
            }
        }

        if (out.barrier) {
            out.total = kBarrierBase * (1.0 + worst_violation);
            out.tangency_term = out.total;
            return out;
        }

        // chart Z data for every sample
        for (std::size_t j = 0; j < M; ++j) {
            SpherePoint p(Chart::Z, zs[j]);
            gs[j] = log_derivative_g(s, p);
            GDerivatives der = log_derivative_g_derivatives(s, p);
            As[j] = der.A;
            Bs[j] = der.B;
            qs[j] = 1.0 + std::norm(zs[j]);
            us[j] = std::imag(gs[j] * vs[j]);
            Fs[j] = std::imag(std::conj(zs[j]) * vs[j]) / qs[j];
        }

        double term1 = 0.0, phase = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            term1 += us[j] * us[j];
            phase += Fs[j];
        }
        term1 *= w.tangency / double(M);
        phase *= double(s.degree) / double(M);
        double defect = std::remainder(phase, kTwoPi);
        double term2 = w.closure * defect * defect;

        out.tangency_term = term1;
        out.closure_term = term2;
        out.total = term1 + term2;

        if (!grad) return out;

        const double c1 = 2.0 * w.tangency / double(M);
        const double c2 = 2.0 * w.closure * defect * double(s.degree) / double(M);

        for (std::size_t j = 0; j < M; ++j) {
            cplx base = std::polar(1.0, kTwoPi * double(j) / double(M));
            cplx e = std::pow(base, -K);
            for (std::size_t i = 0; i < nm; ++i) {
                ek[i] = e;
                e *= base;
            }

            cplx z = zs[j], v = vs[j], g = gs[j], A = As[j], B = Bs[j];
            double q = qs[j], u = us[j];
            double imzv = std::imag(std::conj(z) * v);

            for (std::size_t i = 0; i < nm; ++i) {
                double k = double(int(i) - K);
                cplx ekj = ek[i];
                cplx dek = cplx(0.0, kTwoPi * k) * ekj;

                cplx P = A * v * ekj + g * dek;
                cplx Q = B * v * std::conj(ekj);

                double d_re = c1 * u * std::imag(P + Q);
                double d_im = c1 * u * std::real(P - Q);

                // closure term: F = Im(conj(z) v) / q
                double dF_re = std::imag(std::conj(ekj) * v + std::conj(z) * dek) / q -
                               imzv * 2.0 * std::real(std::conj(z) * ekj) / (q * q);
                double dF_im = (-std::real(std::conj(ekj) * v) +
                                std::real(std::conj(z) * dek)) / q +
                               imzv * 2.0 * std::imag(std::conj(z) * ekj) / (q * q);

                (*grad)[2 * i] += d_re + c2 * dF_re;
                (*grad)[2 * i + 1] += d_im + c2 * dF_im;
            }
        }
        return out;
    }
};

std::vector<double> pack(const FourierLoop& loop) {
    std::vector<double> x(2 * loop.modes.size());
    for (std::size_t i = 0; i < loop.modes.size(); ++i) {
        x[2 * i] = loop.modes[i].real();
        x[2 * i + 1] = loop.modes[i].imag();
    }
    return x;
}

FourierLoop unpack(int max_mode, const std::vector<double>& x) {
    FourierLoop loop(max_mode);
    for (std::size_t i = 0; i < loop.modes.size(); ++i)
        loop.modes[i] = cplx(x[2 * i], x[2 * i + 1]);
    return loop;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

FourierLoop widen_modes(const FourierLoop& in, int k_max) {
    FourierLoop out(k_max);
    for (int k = -in.max_mode; k <= in.max_mode; ++k) out.coeff(k) = in.coeff(k);
    return out;
}

} // namespace

EnergyBreakdown speciality_energy_detailed(const PolynomialSection& s,
                                           const FourierLoop& loop,
                                           const SpecialityWeights& weights,
                                           std::size_t samples) {
    Evaluator ev(s, weights, samples, loop.max_mode);
    return ev.energy(loop, nullptr);
}

double speciality_energy(const PolynomialSection& s, const FourierLoop& loop,
                         const SpecialityWeights& weights, std::size_t samples) {
    return speciality_energy_detailed(s, loop, weights, samples).total;
}

std::vector<double> speciality_gradient(const PolynomialSection& s,
                                        const FourierLoop& loop,
                                        const SpecialityWeights& weights,
                                        std::size_t samples) {
    Evaluator ev(s, weights, samples, loop.max_mode);
    std::vector<double> grad;
    EnergyBreakdown e = ev.energy(loop, &grad);
    if (e.barrier) throw rejection_error("loop is inside the zero zone barrier");
    return grad;
}

OptimizeResult optimize_loop(const PolynomialSection& s, const FourierLoop& init,
                             const OptimizeOptions& opts) {
    Evaluator ev(s, opts.weights, opts.samples, init.max_mode);
    const std::size_t n = 2 * init.modes.size();

    std::vector<double> x = pack(init);
    std::vector<double> g, gn;
    EnergyBreakdown E = ev.energy(init, &g);

    // inverse Hessian approximation
    std::vector<double> H(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

    std::vector<double> p(n), xn(n), sv(n), yv(n), Hy(n);

    OptimizeResult out;
    out.loop = init;
    out.energy = E.total;
    out.barrier_flagged = E.barrier;

    int iter = 0;
    bool first_update = true;
    for (; iter < opts.max_iter; ++iter) {
        double gmax = max_abs(g);
        if (opts.keep_history) out.history.push_back({double(iter), E.total, gmax});
        if (gmax < opts.gtol || E.total < 1e-17 || E.barrier) break;

        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pi = 0.0;
            for (std::size_t k = 0; k < n; ++k) pi -= H[i * n + k] * g[k];
            p[i] = pi;
            slope += pi * g[i];
        }
        if (slope > -1e-18) {
            for (std::size_t i = 0; i < n; ++i) {
                std::fill(H.begin() + long(i * n), H.begin() + long((i + 1) * n), 0.0);
                H[i * n + i] = 1.0;
                p[i] = -g[i];
            }
            slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope += p[i] * g[i];
            if (slope > -1e-30) break;
        }

        double alpha = 1.0;
        EnergyBreakdown En;
        bool accepted = false;
        while (alpha > 1e-16) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + alpha * p[i];
            En = ev.energy(unpack(init.max_mode, xn), nullptr);
            if (En.total <= E.total + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        En = ev.energy(unpack(init.max_mode, xn), &gn);

        double sy = 0.0, yy = 0.0, snorm = 0.0, ynorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sv[i] = xn[i] - x[i];
            yv[i] = gn[i] - g[i];
            sy += sv[i] * yv[i];
            yy += yv[i] * yv[i];
            snorm += sv[i] * sv[i];
            ynorm += yv[i] * yv[i];
        }

        if (sy > 1e-12 * std::sqrt(snorm * ynorm) && sy > 0.0) {
            if (first_update && yy > 0.0) {
                double scale = sy / yy;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < n; ++k) H[i * n + k] *= scale;
                first_update = false;
            }
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += H[i * n + k] * yv[k];
                Hy[i] = acc;
            }
            double yHy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yHy += yv[i] * Hy[i];
            double f1 = (sy + yHy) / (sy * sy);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    H[i * n + k] += f1 * sv[i] * sv[k] -
                                    (Hy[i] * sv[k] + sv[i] * Hy[k]) / sy;
        }

        x.swap(xn);
        g.swap(gn);
        E = En;
    }

    out.loop = unpack(init.max_mode, x);
    out.energy = E.total;
    out.grad_norm = max_abs(g);
    out.iterations = iter;
    out.barrier_flagged = E.barrier || E.total >= 1e5;
    return out;
}

std::vector<LoopSample> oracle_find_special(const PolynomialSection& s, int n_starts,
                                            std::uint64_t seed) {
    if (n_starts < 1) throw input_error("need at least one start");
    PolynomialSection sn = normalize_section(s);
    auto zeros = section_zeros(sn);

    // rotate a direction separating the zero set to the vertical axis, so
    // candidate cycles sit near the unit circle of the working chart
    Vec3 pole{0.0, 0.0, 1.0};
    bool have_pole = false;
    if (zeros.size() == 2) {
        Vec3 d = zeros[0].position.unit_vec() - zeros[1].position.unit_vec();
        if (d.norm() > 1e-8) {
            pole = d.normalized();
            have_pole = true;
        }
    }
    if (!have_pole) {
        double best = -1.0;
        for (int ia = 0; ia < 24; ++ia) {
            for (int ip = 0; ip <= 11; ++ip) {
                double th = kPi * double(ip) / 12.0;
                double ph = kTwoPi * double(ia) / 24.0;
                Vec3 cand{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                          std::cos(th)};
                double score = 4.0;
                for (const auto& z : zeros) {
                    Vec3 zp = z.position.unit_vec();
                    score = std::min(score, std::min(chordal_distance(zp, cand),
                                                     chordal_distance(zp, cand * -1.0)));
                }
                if (score > best) {
                    best = score;
                    pole = cand;
                }
            }
        }
    }

    SU2 rot = SU2::rotation_taking(pole, Vec3{0.0, 0.0, 1.0});
    PolynomialSection srot = rotate_section(rot, sn);
    SU2 back = rot.inverse();

    Rng rng(seed);
    std::vector<LoopSample> found;
    for (int i = 0; i < n_starts; ++i) {
        FourierLoop init = i == 0 ? circle_modes(cplx(0.0, 0.0), 1.0)
                                  : circle_modes(0.12 * rng.gaussian_complex(),
                                                 0.7 + 0.7 * rng.uniform());
        OptimizeResult res;
        try {
            res = optimize_loop(srot, init);
            // a stalled run gets a finer loop space before it is given up on
            for (int k_max = 2 * init.max_mode;
                 !res.barrier_flagged && res.energy >= 1e-8 && k_max <= 4 * init.max_mode;
                 k_max *= 2)
                res = optimize_loop(srot, widen_modes(res.loop, k_max));
        } catch (const Error&) {
            continue;
        }
        if (res.barrier_flagged || res.energy >= 1e-8) continue;

        LoopSample mapped;
        try {
            mapped = back.apply(res.loop.sample(512));
        } catch (const Error&) {
            continue;
        }
        if (!loop_is_embedded(mapped)) continue;
        bool dup = false;
        for (const auto& prev : found)
            if (loop_hausdorff(prev, mapped) < 1e-3) {
                dup = true;
                break;
            }
        if (!dup) found.push_back(std::move(mapped));
    }
    return found;
}

} // namespace sbs
