#include "sbs/prequantum.hpp"

#include <algorithm>
#include <cmath>

namespace sbs {

namespace {

cplx horner(const std::vector<cplx>& c, cplx x) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

cplx horner_derivative(const std::vector<cplx>& c, cplx x) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + double(i) * c[i];
    return acc;
}

cplx horner_second(const std::vector<cplx>& c, cplx x) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = c.size(); i-- > 2;) acc = acc * x + double(i * (i - 1)) * c[i];
    return acc;
}

std::vector<cplx> reversed_coeffs(const std::vector<cplx>& c) {
    return std::vector<cplx>(c.rbegin(), c.rend());
}

double coeff_scale(const PolynomialSection& s) {
    double m = 0.0;
    for (const auto& c : s.coeffs) m = std::max(m, std::abs(c));
    return m;
}

} // namespace

PolynomialSection::PolynomialSection(int d, std::vector<cplx> c)
    : degree(d), coeffs(std::move(c)) {
    if (degree < 1) throw input_error("section degree must be at least 1");
    if (coeffs.size() != std::size_t(degree) + 1)
        throw input_error("section needs degree + 1 coefficients");
}

bool PolynomialSection::is_zero() const {
    for (const auto& c : coeffs)
        if (std::abs(c) > 0.0) return false;
    return true;
}

cplx PolynomialSection::chart_value(const SpherePoint& p) const {
    if (p.chart == Chart::Z) return horner(coeffs, p.coord);
    return horner(reversed_coeffs(coeffs), p.coord);
}

cplx PolynomialSection::chart_derivative(const SpherePoint& p) const {
    if (p.chart == Chart::Z) return horner_derivative(coeffs, p.coord);
    return horner_derivative(reversed_coeffs(coeffs), p.coord);
}

cplx PolynomialSection::chart_second_derivative(const SpherePoint& p) const {
    if (p.chart == Chart::Z) return horner_second(coeffs, p.coord);
    return horner_second(reversed_coeffs(coeffs), p.coord);
}

PrequantumData::PrequantumData(int d) : degree(d) {
    if (d < 1) throw input_error("bundle degree must be at least 1");
}

double PrequantumData::metric_weight(cplx z) const {
    return std::pow(1.0 + std::norm(z), -double(degree));
}

cplx PrequantumData::connection_coef(cplx z) const {
    return -double(degree) * std::conj(z) / (1.0 + std::norm(z));
}

double PrequantumData::curvature_density(cplx z) const {
    double q = 1.0 + std::norm(z);
    return double(degree) / (kPi * q * q);
}

cplx evaluate_section(const PolynomialSection& s, const SpherePoint& p) {
    return s.chart_value(p);
}

double section_h_norm(const PolynomialSection& s, const SpherePoint& p) {
    double f = std::abs(s.chart_value(p));
    return f * std::pow(1.0 + std::norm(p.coord), -0.5 * double(s.degree));
}

cplx log_derivative_g(const PolynomialSection& s, const SpherePoint& p) {
    cplx f = s.chart_value(p);
    if (std::abs(f) < 1e-12 * std::max(1.0, coeff_scale(s)))
        throw numeric_error("evaluation too close to a zero of the section");
    cplx df = s.chart_derivative(p);
    cplx z = p.coord;
    return df / f - double(s.degree) * std::conj(z) / (1.0 + std::norm(z));
}

GDerivatives log_derivative_g_derivatives(const PolynomialSection& s, const SpherePoint& p) {
    cplx f = s.chart_value(p);
    if (std::abs(f) < 1e-12 * std::max(1.0, coeff_scale(s)))
        throw numeric_error("evaluation too close to a zero of the section");
    cplx df = s.chart_derivative(p);
    cplx d2f = s.chart_second_derivative(p);
    cplx z = p.coord;
    double q = 1.0 + std::norm(z);
    GDerivatives out;
    out.A = (d2f * f - df * df) / (f * f) +
            double(s.degree) * std::conj(z) * std::conj(z) / (q * q);
    out.B = cplx(-double(s.degree) / (q * q), 0.0);
    return out;
}

std::array<double, 2> beta_covector(const PolynomialSection& s, const SpherePoint& p) {
    cplx g = log_derivative_g(s, p);
    return {g.imag(), g.real()};
}

namespace {

// roots of a degree 2 polynomial with the cancellation safe splitting
std::vector<cplx> quadratic_roots(cplx a2, cplx a1, cplx a0) {
    cplx disc = a1 * a1 - 4.0 * a2 * a0;
    cplx sq = std::sqrt(disc);
    if (std::real(std::conj(a1) * sq) < 0.0) sq = -sq;
    cplx q = -0.5 * (a1 + sq);
    std::vector<cplx> out;
    if (std::abs(q) > 0.0) {
        out.push_back(q / a2);
        out.push_back(a0 / q);
    } else {
        out.push_back(cplx(0, 0));
        out.push_back(-a1 / a2);
    }
    return out;
}

// Durand-Kerner sweep with a Newton polish for general degree
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
    const std::size_t m = coeffs.size() - 1;
    if (m == 0) return {};
    if (m == 1) return {-coeffs[0] / coeffs[1]};
    if (m == 2) return quadratic_roots(coeffs[2], coeffs[1], coeffs[0]);

    std::vector<cplx> monic(coeffs);
    cplx lead = monic.back();
    for (auto& c : monic) c /= lead;

    double radius = 1.0;
    for (std::size_t k = 0; k < m; ++k) radius = std::max(radius, std::abs(monic[k]));
    radius = 1.0 + radius;

    std::vector<cplx> r(m);
    cplx seed(0.4, 0.9);
    cplx acc(1.0, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        acc *= seed;
        r[i] = radius * acc / std::abs(acc);
        r[i] *= 0.5 + 0.5 * double(i + 1) / double(m);
    }

    for (int iter = 0; iter < 400; ++iter) {
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            cplx denom(1.0, 0.0);
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) denom *= (r[i] - r[j]);
            if (std::abs(denom) < 1e-300) denom = cplx(1e-300, 0);
            cplx step = horner(monic, r[i]) / denom;
            r[i] -= step;
            worst = std::max(worst, std::abs(step));
        }
        if (worst < 1e-14 * radius) break;
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (int k = 0; k < 3; ++k) {
            cplx fp = horner_derivative(monic, r[i]);
            if (std::abs(fp) < 1e-14) break;
            r[i] -= horner(monic, r[i]) / fp;
        }
    }
    return r;
}

} // namespace

std::vector<SectionZero> section_zeros(const PolynomialSection& s) {
    if (s.is_zero()) throw input_error("the zero section has no zero divisor");
    double scale = coeff_scale(s);

    int eff_degree = s.degree;
    while (eff_degree > 0 && std::abs(s.coeffs[eff_degree]) < 1e-14 * scale) --eff_degree;

    std::vector<cplx> trimmed(s.coeffs.begin(), s.coeffs.begin() + eff_degree + 1);
    std::vector<cplx> roots = poly_roots(trimmed);

    // cluster roots into multiplicities in the chordal metric
    std::vector<SectionZero> zeros;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        SpherePoint pi(Chart::Z, roots[i]);
        if (std::abs(roots[i]) > kChartSwitchRadius) pi = chart_transition(pi);
        SectionZero zero{pi, 1};
        Vec3 sum = pi.unit_vec();
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (used[j]) continue;
            SpherePoint pj(Chart::Z, roots[j]);
            if (std::abs(roots[j]) > kChartSwitchRadius) pj = chart_transition(pj);
            if (chordal_distance(pi, pj) < 2e-6) {
                used[j] = true;
                zero.multiplicity += 1;
                sum = sum + pj.unit_vec();
            }
        }
        zero.position = SpherePoint::from_unit_vec(sum * (1.0 / double(zero.multiplicity)));
        zeros.push_back(zero);
    }

    int at_infinity = s.degree - eff_degree;
    if (at_infinity > 0)
        zeros.push_back({SpherePoint(Chart::W, cplx(0, 0)), at_infinity});

    return zeros;
}

double distance_to_zeros(const std::vector<SectionZero>& zeros, const SpherePoint& p) {
    double best = 4.0;
    for (const auto& z : zeros) best = std::min(best, chordal_distance(z.position, p));
    return best;
}

VeroneseTest is_on_veronese(const PolynomialSection& s, double tol) {
    VeroneseTest out;
    if (s.is_zero()) throw input_error("the zero section is not a moduli point");
    if (s.degree == 2) {
        cplx a0 = s.coeffs[0], a1 = s.coeffs[1], a2 = s.coeffs[2];
        double norm2 = std::norm(a0) + std::norm(a1) + std::norm(a2);
        out.normalized_discriminant = std::abs(a1 * a1 - 4.0 * a0 * a2) / norm2;
    } else {
        auto zeros = section_zeros(s);
        std::vector<SpherePoint> flat;
        for (const auto& z : zeros)
            for (int k = 0; k < z.multiplicity; ++k) flat.push_back(z.position);
        double prod = 1.0;
        for (std::size_t i = 0; i < flat.size(); ++i)
            for (std::size_t j = i + 1; j < flat.size(); ++j) {
                double d = 0.5 * chordal_distance(flat[i], flat[j]);
                prod *= d * d;
            }
        out.normalized_discriminant = prod;
    }
    out.on_locus = out.normalized_discriminant < tol;
    return out;
}

namespace {

SpherePoint preferred_point(Chart c, cplx v) {
    if (std::abs(v) > kChartSwitchRadius) {
        return SpherePoint(c == Chart::Z ? Chart::W : Chart::Z, 1.0 / v);
    }
    return SpherePoint(c, v);
}

} // namespace

std::vector<FoliationSingularity> g_zeros(const PolynomialSection& s, int grid_per_chart) {
    if (s.is_zero()) throw input_error("the zero section has no foliation");
    auto zeros = section_zeros(s);

    std::vector<FoliationSingularity> converged;
    const double span = kChartSwitchRadius;

    for (int chart_idx = 0; chart_idx < 2; ++chart_idx) {
        Chart chart = chart_idx == 0 ? Chart::Z : Chart::W;
        for (int ix = 0; ix < grid_per_chart; ++ix) {
            for (int iy = 0; iy < grid_per_chart; ++iy) {
                double x = -span + 2.0 * span * (ix + 0.5) / grid_per_chart;
                double y = -span + 2.0 * span * (iy + 0.5) / grid_per_chart;
                cplx v(x, y);
                if (std::abs(v) > span) continue;

                // Newton iteration on g in whatever chart the iterate prefers
                SpherePoint p = preferred_point(chart, v);
                bool ok = false;
                double res = 0.0;
                for (int it = 0; it < 40; ++it) {
                    if (distance_to_zeros(zeros, p) < 1e-3) break;
                    cplx g, A, B;
                    try {
                        g = log_derivative_g(s, p);
                        auto der = log_derivative_g_derivatives(s, p);
                        A = der.A;
                        B = der.B;
                    } catch (const Error&) {
                        break;
                    }
                    res = std::abs(g);
                    if (res < 1e-11) {
                        ok = true;
                        break;
                    }
                    double D = std::norm(A) - std::norm(B);
                    cplx delta;
                    if (std::abs(D) > 1e-10 * (std::norm(A) + std::norm(B))) {
                        delta = (B * std::conj(g) - std::conj(A) * g) / D;
                    } else {
                        // Jacobian nearly rank one: descend toward the zero set
                        delta = -g * std::conj(A) / (std::norm(A) + std::norm(B) + 1e-30);
                    }
                    double cap = 0.3;
                    double dn = std::abs(delta);
                    if (dn > cap) delta *= cap / dn;
                    p = preferred_point(p.chart, p.coord + delta);
                }
                if (ok && distance_to_zeros(zeros, p) > 1e-3)
                    converged.push_back({p, SingularityKind::isolated, res});
            }
        }
    }

    if (converged.empty())
        throw numeric_error("tracer has no seeds: no foliation singularities found");

    // deduplicate at chordal 1e-6
    std::vector<FoliationSingularity> unique;
    for (const auto& c : converged) {
        bool dup = false;
        for (const auto& u : unique)
            if (chordal_distance(c.position, u.position) < 1e-6) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(c);
    }

    std::sort(unique.begin(), unique.end(),
              [](const FoliationSingularity& l, const FoliationSingularity& r) {
                  Vec3 a = l.position.unit_vec(), b = r.position.unit_vec();
                  if (a.z != b.z) return a.z < b.z;
                  if (a.x != b.x) return a.x < b.x;
                  return a.y < b.y;
              });

    // a one dimensional continuum of converged points marks a zero curve
    std::size_t curve_threshold = std::max<std::size_t>(14, 4 * std::size_t(s.degree));
    if (unique.size() >= curve_threshold) {
        for (auto& u : unique) u.kind = SingularityKind::curve_of_zeros;
    }
    return unique;
}

PolynomialSection rotate_section(const SU2& r, const PolynomialSection& s) {
    // substitute the inverse point action into the homogeneous form
    // F(Z0, Z1) = sum a_k Z0^(d-k) Z1^k
    const int d = s.degree;
    // (R f)(Z0, Z1) = F(a Z0 + conj(b) Z1, -b Z0 + conj(a) Z1)
    std::vector<cplx> out(std::size_t(d) + 1, cplx(0, 0));
    // powers of the two linear forms, as coefficient vectors in (Z0, Z1)
    // form1 = a Z0 + conj(b) Z1, form2 = -b Z0 + conj(a) Z1
    auto binomial_pow = [](cplx c0, cplx c1, int n) {
        // coefficients of (c0 Z0 + c1 Z1)^n in Z1 degree order
        std::vector<cplx> v(std::size_t(n) + 1);
        double binom = 1.0;
        for (int j = 0; j <= n; ++j) {
            v[j] = binom * std::pow(c0, n - j) * std::pow(c1, j);
            binom = binom * double(n - j) / double(j + 1);
        }
        return v;
    };
    for (int k = 0; k <= d; ++k) {
        if (std::abs(s.coeffs[k]) == 0.0) continue;
        auto p1 = binomial_pow(r.a, std::conj(r.b), d - k);
        auto p2 = binomial_pow(-r.b, std::conj(r.a), k);
        for (int i = 0; i < int(p1.size()); ++i)
            for (int j = 0; j < int(p2.size()); ++j)
                out[std::size_t(i + j)] += s.coeffs[k] * p1[i] * p2[j];
    }
    return PolynomialSection(d, std::move(out));
}

PolynomialSection normalize_section(const PolynomialSection& s) {
    if (s.is_zero()) throw input_error("cannot normalize the zero section");
    double norm = 0.0;
    for (const auto& c : s.coeffs) norm += std::norm(c);
    norm = std::sqrt(norm);
    // phase gauge: leading coefficient (descending order) rotated to the
    // positive real axis
    cplx phase(1.0, 0.0);
    for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) {
        if (std::abs(*it) > 1e-14 * norm) {
            phase = std::conj(*it) / std::abs(*it);
            break;
        }
    }
    std::vector<cplx> out;
    out.reserve(s.coeffs.size());
    for (const auto& c : s.coeffs) out.push_back(c * phase / norm);
    return PolynomialSection(s.degree, std::move(out));
}

PolynomialSection section_from_zeros(int degree, const std::vector<SpherePoint>& zeros) {
    if (int(zeros.size()) != degree)
        throw input_error("need exactly degree zeros (with multiplicity)");
    std::vector<cplx> poly{cplx(1.0, 0.0)};
    for (const auto& p : zeros) {
        if (p.near_pole_of(Chart::Z, 1e-12)) continue;  // zero at infinity drops degree
        cplx u = p.in_chart(Chart::Z);
        std::vector<cplx> next(poly.size() + 1, cplx(0, 0));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= u * poly[i];
        }
        poly = std::move(next);
    }
    poly.resize(std::size_t(degree) + 1, cplx(0, 0));
    return normalize_section(PolynomialSection(degree, std::move(poly)));
}

} // namespace sbs
