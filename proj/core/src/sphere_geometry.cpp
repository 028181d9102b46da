#include "sbs/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sbs {

namespace {

// chart Z holds points with X3 <= 5/13, which is exactly |z| <= 1.5
constexpr double kChartZ3Threshold = 5.0 / 13.0;

constexpr double kMaxChordGap = 0.5;      // loop resolution bound (chordal)
constexpr double kQuadRefineTol = 1e-7;   // area stability under sample halving

// 8 point Gauss-Legendre rule on [-1, 1]
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double wrap_pi(double x) {
    double r = std::remainder(x, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

// Thomas solve of a cyclic tridiagonal system via the rank-one correction.
// a[i] multiplies x[i-1], b[i] x[i], c[i] x[i+1], indices mod m.
std::vector<double> solve_cyclic_tridiag(const std::vector<double>& a,
                                         const std::vector<double>& b,
                                         const std::vector<double>& c,
                                         std::vector<double> r) {
    const std::size_t m = b.size();
    auto tridiag = [&](std::vector<double> bb, std::vector<double> rhs) {
        std::vector<double> x(m);
        for (std::size_t i = 1; i < m; ++i) {
            double w = a[i] / bb[i - 1];
            bb[i] -= w * c[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        x[m - 1] = rhs[m - 1] / bb[m - 1];
        for (std::size_t i = m - 1; i-- > 0;)
            x[i] = (rhs[i] - c[i] * x[i + 1]) / bb[i];
        return x;
    };

    const double alpha = c[m - 1];  // coupling of row m-1 to x[0]
    const double beta = a[0];       // coupling of row 0 to x[m-1]
    const double gamma = -b[0];
    std::vector<double> bb = b;
    bb[0] = b[0] - gamma;
    bb[m - 1] = b[m - 1] - alpha * beta / gamma;

    std::vector<double> x = tridiag(bb, std::move(r));
    std::vector<double> u(m, 0.0);
    u[0] = gamma;
    u[m - 1] = alpha;
    std::vector<double> z = tridiag(bb, std::move(u));

    double fact = (x[0] + beta * x[m - 1] / gamma) /
                  (1.0 + z[0] + beta * z[m - 1] / gamma);
    for (std::size_t i = 0; i < m; ++i) x[i] -= fact * z[i];
    return x;
}

void validate_loop(const LoopSample& loop, std::size_t min_points) {
    if (loop.size() < min_points)
        throw input_error("loop has too few samples");
    const auto n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const SpherePoint& p = loop.points[i];
        const SpherePoint& q = loop.points[(i + 1) % n];
        double gap = chordal_distance(p, q);
        if (gap < 1e-13)
            throw input_error("loop has repeated consecutive samples");
        if (gap > kMaxChordGap)
            throw input_error("loop is undersampled: chordal gap above resolution bound");
    }
}

} // namespace

Vec3 Vec3::normalized() const {
    double n = norm();
    if (n < 1e-300) throw numeric_error("cannot normalize a null vector");
    return {x / n, y / n, z / n};
}

SpherePoint::SpherePoint(Chart c, cplx v) : chart(c), coord(v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw input_error("non-finite chart coordinate");
}

cplx SpherePoint::in_chart(Chart c) const {
    if (c == chart) return coord;
    if (std::abs(coord) < 1e-300)
        throw input_error("point sits at the pole of the requested chart");
    return 1.0 / coord;
}

bool SpherePoint::near_pole_of(Chart c, double tol) const {
    if (c == chart) return false;  // stored coordinate is finite
    return std::abs(coord) < tol;
}

Vec3 SpherePoint::unit_vec() const {
    // evaluate through whichever representation keeps the magnitude small
    cplx v = coord;
    bool flipped = false;
    if (std::abs(v) > 1.5) {
        v = 1.0 / v;
        flipped = true;
    }
    bool as_z = (chart == Chart::Z) != flipped;
    double a2 = std::norm(v);
    double denom = 1.0 + a2;
    if (as_z)
        return {2.0 * v.real() / denom, 2.0 * v.imag() / denom, (a2 - 1.0) / denom};
    return {2.0 * v.real() / denom, -2.0 * v.imag() / denom, (1.0 - a2) / denom};
}

SpherePoint SpherePoint::from_unit_vec(const Vec3& u) {
    double n = u.norm();
    if (n < 1e-300) throw numeric_error("null vector is not a sphere direction");
    Vec3 v{u.x / n, u.y / n, u.z / n};
    if (v.z <= kChartZ3Threshold)
        return SpherePoint(Chart::Z, cplx(v.x, v.y) / (1.0 - v.z));
    return SpherePoint(Chart::W, cplx(v.x, -v.y) / (1.0 + v.z));
}

SpherePoint chart_transition(const SpherePoint& p) {
    if (std::abs(p.coord) < 1e-300)
        throw input_error("chart transition is undefined at a chart pole");
    return SpherePoint(p.chart == Chart::Z ? Chart::W : Chart::Z, 1.0 / p.coord);
}

double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
    return (a.unit_vec() - b.unit_vec()).norm();
}

std::vector<Vec3> LoopSample::traversal_vecs() const {
    std::vector<Vec3> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.unit_vec());
    if (orientation == Orientation::negative) std::reverse(v.begin(), v.end());
    return v;
}

LoopSample LoopSample::reversed() const {
    LoopSample out = *this;
    out.orientation = (orientation == Orientation::positive) ? Orientation::negative
                                                             : Orientation::positive;
    return out;
}

SmoothLoop::SmoothLoop(const LoopSample& loop) : SmoothLoop(loop.traversal_vecs()) {}

SmoothLoop::SmoothLoop(const std::vector<Vec3>& pts) {
    n_ = pts.size();
    if (n_ < 3) throw input_error("smooth loop needs at least 3 samples");
    pts_ = pts;

    // chord length knots scaled to [0, 1]
    knots_.assign(n_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double h = (pts_[(i + 1) % n_] - pts_[i]).norm();
        if (h < 1e-14) throw input_error("smooth loop has coincident samples");
        knots_[i + 1] = knots_[i] + h;
    }
    chord_length_ = knots_[n_];
    for (auto& t : knots_) t /= chord_length_;
    knots_[n_] = 1.0;

    // periodic natural cubic spline second derivatives, one solve per component
    std::vector<double> a(n_), b(n_), c(n_);
    auto h = [&](std::size_t i) { return knots_[i + 1] - knots_[i]; };
    for (std::size_t i = 0; i < n_; ++i) {
        double hm = h((i + n_ - 1) % n_);
        double hi = h(i);
        a[i] = hm / 6.0;
        b[i] = (hm + hi) / 3.0;
        c[i] = hi / 6.0;
    }
    auto solve_component = [&](auto get) {
        std::vector<double> r(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t im = (i + n_ - 1) % n_;
            std::size_t ip = (i + 1) % n_;
            r[i] = (get(pts_[ip]) - get(pts_[i])) / h(i) -
                   (get(pts_[i]) - get(pts_[im])) / h(im);
        }
        return solve_cyclic_tridiag(a, b, c, std::move(r));
    };
    auto mx = solve_component([](const Vec3& v) { return v.x; });
    auto my = solve_component([](const Vec3& v) { return v.y; });
    auto mz = solve_component([](const Vec3& v) { return v.z; });
    second_derivs_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) second_derivs_[i] = {mx[i], my[i], mz[i]};
}

Vec3 SmoothLoop::raw(double t) const {
    t -= std::floor(t);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i = (it == knots_.begin()) ? 0 : std::size_t(it - knots_.begin()) - 1;
    if (i >= n_) i = n_ - 1;
    double hi = knots_[i + 1] - knots_[i];
    double u = (knots_[i + 1] - t) / hi;
    double v = (t - knots_[i]) / hi;
    const Vec3& ya = pts_[i];
    const Vec3& yb = pts_[(i + 1) % n_];
    const Vec3& ma = second_derivs_[i];
    const Vec3& mb = second_derivs_[(i + 1) % n_];
    double cu = (u * u * u - u) * hi * hi / 6.0;
    double cv = (v * v * v - v) * hi * hi / 6.0;
    return ya * u + yb * v + ma * cu + mb * cv;
}

Vec3 SmoothLoop::raw_derivative(double t) const {
    t -= std::floor(t);
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i = (it == knots_.begin()) ? 0 : std::size_t(it - knots_.begin()) - 1;
    if (i >= n_) i = n_ - 1;
    double hi = knots_[i + 1] - knots_[i];
    double u = (knots_[i + 1] - t) / hi;
    double v = (t - knots_[i]) / hi;
    const Vec3& ya = pts_[i];
    const Vec3& yb = pts_[(i + 1) % n_];
    const Vec3& ma = second_derivs_[i];
    const Vec3& mb = second_derivs_[(i + 1) % n_];
    Vec3 lin = (yb - ya) * (1.0 / hi);
    double cu = (1.0 - 3.0 * u * u) * hi / 6.0;
    double cv = (3.0 * v * v - 1.0) * hi / 6.0;
    return lin + ma * cu + mb * cv;
}

Vec3 SmoothLoop::position(double t) const { return raw(t).normalized(); }

Vec3 SmoothLoop::velocity(double t) const {
    Vec3 p = raw(t);
    Vec3 dp = raw_derivative(t);
    double n = p.norm();
    Vec3 x = p * (1.0 / n);
    return (dp - x * x.dot(dp)) * (1.0 / n);
}

SmoothLoop::ChartState SmoothLoop::chart_state(double t) const {
    Vec3 x = position(t);
    Chart c = (x.z <= kChartZ3Threshold) ? Chart::Z : Chart::W;
    return chart_state(t, c);
}

SmoothLoop::ChartState SmoothLoop::chart_state(double t, Chart forced) const {
    Vec3 x = position(t);
    Vec3 dx = velocity(t);
    if (forced == Chart::Z) {
        double denom = 1.0 - x.z;
        if (denom < 1e-12)
            throw numeric_error("loop point too close to the chart Z pole");
        cplx z(x.x / denom, x.y / denom);
        cplx dz = (cplx(dx.x, dx.y) + z * dx.z) / denom;
        return {Chart::Z, z, dz};
    }
    double denom = 1.0 + x.z;
    if (denom < 1e-12)
        throw numeric_error("loop point too close to the chart W pole");
    cplx w(x.x / denom, -x.y / denom);
    cplx dw = (cplx(dx.x, -dx.y) - w * dx.z) / denom;
    return {Chart::W, w, dw};
}

namespace {

// area primitive contracted with the velocity, chart Z form
double primitive_z(int d, cplx z, cplx dz) {
    return double(d) / kTwoPi * std::imag(std::conj(z) * dz) / (1.0 + std::norm(z));
}

// continuous increment of arg(w) from t0 to t1, bisecting until each piece
// subtends a small angle; ambiguities within machine scale of a pole pass
// resolve to an increment that differs by 2*pi, which the mod-d reduction
// of the final area absorbs
double arg_increment(const SmoothLoop& loop, double t0, double t1, cplx w0, cplx w1,
                     int depth) {
    double d = wrap_pi(std::arg(w1) - std::arg(w0));
    if (std::abs(d) < 0.5 || depth > 48) return d;
    double tm = 0.5 * (t0 + t1);
    cplx wm = loop.chart_state(tm, Chart::W).coord;
    if (std::abs(wm) < 1e-300) {
        // exact pole hit: nudge the split point
        tm += (t1 - t0) * 1e-7;
        wm = loop.chart_state(tm, Chart::W).coord;
    }
    return arg_increment(loop, t0, tm, w0, wm, depth + 1) +
           arg_increment(loop, tm, t1, wm, w1, depth + 1);
}

double primitive_integral_impl(const SmoothLoop& loop, int degree) {
    double total = 0.0;
    const std::size_t n = loop.segments();
    for (std::size_t i = 0; i < n; ++i) {
        double t0 = loop.knot(i);
        double t1 = loop.knot(i + 1);
        double mid = 0.5 * (t0 + t1);
        double half = 0.5 * (t1 - t0);
        Chart chart = (loop.position(mid).z <= kChartZ3Threshold) ? Chart::Z : Chart::W;
        double seg = 0.0;
        for (int k = 0; k < 8; ++k) {
            double t = mid + half * kGlNode[k];
            auto cs = loop.chart_state(t, chart);
            seg += kGlWeight[k] * primitive_z(degree, cs.coord, cs.vel);
        }
        seg *= half;
        if (chart == Chart::W) {
            // lambda_Z = lambda_W + (d / 2 pi) d(arg z), and arg z = -arg w
            cplx w0 = loop.chart_state(t0, Chart::W).coord;
            cplx w1 = loop.chart_state(t1, Chart::W).coord;
            double dargw = arg_increment(loop, t0, t1, w0, w1, 0);
            seg += double(degree) / kTwoPi * (-dargw);
        }
        total += seg;
    }
    return total;
}

} // namespace

double area_primitive_integral(const SmoothLoop& loop, int degree) {
    return primitive_integral_impl(loop, degree);
}

double enclosed_area(const Region& region, int degree) {
    if (degree < 1) throw input_error("bundle degree must be positive");
    validate_loop(region.boundary, 8);
    if (!loop_is_embedded(region.boundary))
        throw input_error("region boundary is not embedded");

    const LoopSample& loop = region.boundary;
    SmoothLoop smooth(loop);
    double raw = primitive_integral_impl(smooth, degree);

    // stability check: rebuild from every other sample and compare
    {
        LoopSample half;
        half.orientation = loop.orientation;
        for (std::size_t i = 0; i < loop.size(); i += 2) half.points.push_back(loop.points[i]);
        if (half.size() >= 3) {
            bool stable = false;
            try {
                double raw_half = primitive_integral_impl(SmoothLoop(half), degree);
                stable = std::abs(raw - raw_half) <= kQuadRefineTol;
            } catch (const Error&) {
                stable = false;  // coarse rebuild failed outright
            }
            if (!stable)
                throw input_error("region boundary is undersampled for the area integral");
        }
    }

    if (region.side == Side::right) raw = -raw;
    double area = raw - double(degree) * std::floor(raw / double(degree));
    return area;
}

LoopSample resample_loop(const LoopSample& loop, std::size_t n) {
    if (n < 16) throw input_error("resample target must be at least 16 samples");
    validate_loop(loop, 3);

    SmoothLoop smooth(loop);
    const std::size_t segs = smooth.segments();
    const int sub = 16;

    // cumulative arc length table (chordal metric on the sphere) by
    // composite Simpson over each knot interval
    std::vector<double> ts, ss;
    ts.reserve(segs * sub + 1);
    ss.reserve(segs * sub + 1);
    ts.push_back(0.0);
    ss.push_back(0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
        double t0 = smooth.knot(i);
        double t1 = smooth.knot(i + 1);
        double h = (t1 - t0) / sub;
        double prev_speed = smooth.velocity(t0).norm();
        for (int k = 1; k <= sub; ++k) {
            double ta = t0 + h * (k - 1);
            double tb = t0 + h * k;
            double vm = smooth.velocity(0.5 * (ta + tb)).norm();
            double vb = smooth.velocity(tb).norm();
            acc += h / 6.0 * (prev_speed + 4.0 * vm + vb);
            prev_speed = vb;
            ts.push_back(tb);
            ss.push_back(acc);
        }
    }
    const double total = acc;
    if (total < 1e-6) throw input_error("degenerate loop: total length is nearly zero");

    LoopSample out;
    out.orientation = Orientation::positive;
    out.points.reserve(n);
    std::size_t hint = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double target = total * double(k) / double(n);
        while (hint + 1 < ss.size() && ss[hint + 1] < target) ++hint;
        double t;
        if (k == 0) {
            t = 0.0;
        } else {
            double seg = ss[hint + 1] - ss[hint];
            double f = seg > 0 ? (target - ss[hint]) / seg : 0.0;
            t = ts[hint] + f * (ts[hint + 1] - ts[hint]);
            // one Newton step against the true speed sharpens the inversion
            double speed = smooth.velocity(t).norm();
            if (speed > 1e-12) {
                double err = 0.0;
                {
                    // arc from ts[hint] to t via midpoint rule on the short piece
                    double tm = 0.5 * (ts[hint] + t);
                    err = ss[hint] + smooth.velocity(tm).norm() * (t - ts[hint]) - target;
                }
                t -= err / speed;
            }
        }
        out.points.push_back(SpherePoint::from_unit_vec(smooth.position(t)));
    }
    return out;
}

bool loop_is_embedded(const LoopSample& loop) {
    const std::size_t n = loop.size();
    if (n < 3) return false;
    std::vector<Vec3> p = loop.traversal_vecs();
    for (std::size_t i = 0; i < n; ++i) {
        if ((p[(i + 1) % n] - p[i]).norm() < 1e-13) return false;
    }

    std::vector<Vec3> mid(n);
    std::vector<double> rad(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 a = p[i], b = p[(i + 1) % n];
        mid[i] = (a + b) * 0.5;
        double len = (b - a).norm();
        rad[i] = 0.5 * len + 0.25 * len * len;  // chord plus sagitta margin
    }

    auto on_arc = [](const Vec3& a, const Vec3& b, const Vec3& q) {
        // q assumed on the great circle of a, b; test containment in the
        // short arc (consecutive samples subtend well under pi)
        Vec3 nba = a.cross(b);
        if ((a.cross(q)).dot(nba) < -1e-12) return false;
        if ((q.cross(b)).dot(nba) < -1e-12) return false;
        return q.dot(a + b) > 0.0;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent around the seam
            if ((mid[i] - mid[j]).norm() > rad[i] + rad[j] + 1e-9) continue;
            Vec3 a = p[i], b = p[(i + 1) % n];
            Vec3 c = p[j], d = p[(j + 1) % n];
            Vec3 n1 = a.cross(b), n2 = c.cross(d);
            Vec3 l = n1.cross(n2);
            double ln = l.norm();
            if (ln < 1e-12) {
                // near coplanar arcs: intersect iff an endpoint of one lies
                // on the other
                if (on_arc(a, b, c.normalized()) || on_arc(a, b, d.normalized()) ||
                    on_arc(c, d, a.normalized()) || on_arc(c, d, b.normalized()))
                    return false;
                continue;
            }
            Vec3 u = l * (1.0 / ln);
            if ((on_arc(a, b, u) && on_arc(c, d, u)) ||
                (on_arc(a, b, u * -1.0) && on_arc(c, d, u * -1.0)))
                return false;
        }
    }
    return true;
}

Side side_of_point(const LoopSample& loop, const SpherePoint& q) {
    validate_loop(loop, 3);
    std::vector<Vec3> p = loop.traversal_vecs();
    Vec3 x = q.unit_vec();
    const std::size_t n = p.size();
    double best = 1e300;
    std::size_t bi = 0;
    double bf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 a = p[i], b = p[(i + 1) % n];
        Vec3 ab = b - a;
        double len2 = ab.dot(ab);
        double f = len2 > 0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Vec3 c = a + ab * f;
        double dist = (x - c).norm();
        if (dist < best) {
            best = dist;
            bi = i;
            bf = f;
        }
    }
    Vec3 a = p[bi], b = p[(bi + 1) % n];
    Vec3 tangent = b - a;
    Vec3 m = (a + tangent * bf).normalized();
    // left normal of the traversal is velocity cross position
    double s = tangent.cross(m).dot(x - m);
    return s > 0.0 ? Side::left : Side::right;
}

namespace {

double point_to_polyline(const Vec3& x, const std::vector<Vec3>& p) {
    double best = 1e300;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& a = p[i];
        const Vec3& b = p[(i + 1) % n];
        Vec3 ab = b - a;
        double len2 = ab.dot(ab);
        double f = len2 > 0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Vec3 c = a + ab * f;
        best = std::min(best, (x - c).norm());
    }
    return best;
}

} // namespace

double loop_hausdorff(const LoopSample& a, const LoopSample& b) {
    std::vector<Vec3> pa = a.traversal_vecs();
    std::vector<Vec3> pb = b.traversal_vecs();
    double h = 0.0;
    for (const auto& x : pa) h = std::max(h, point_to_polyline(x, pb));
    for (const auto& x : pb) h = std::max(h, point_to_polyline(x, pa));
    return h;
}

LoopSample circle_loop(double radius, std::size_t n, cplx center, Orientation orient) {
    if (radius <= 0.0) throw input_error("circle radius must be positive");
    if (n < 3) throw input_error("circle needs at least 3 samples");
    LoopSample out;
    out.orientation = orient;
    out.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double th = kTwoPi * double(k) / double(n);
        cplx z = center + radius * cplx(std::cos(th), std::sin(th));
        SpherePoint p(Chart::Z, z);
        if (std::abs(z) > kChartSwitchRadius) p = chart_transition(p);
        out.points.push_back(p);
    }
    return out;
}

LoopSample great_circle_loop(const Vec3& axis, std::size_t n, Orientation orient) {
    if (n < 3) throw input_error("great circle needs at least 3 samples");
    Vec3 nu = axis.normalized();
    Vec3 seed = std::abs(nu.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 e1 = nu.cross(seed).normalized();
    Vec3 e2 = nu.cross(e1);
    LoopSample out;
    out.orientation = orient;
    out.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double th = kTwoPi * double(k) / double(n);
        Vec3 x = e1 * std::cos(th) + e2 * std::sin(th);
        out.points.push_back(SpherePoint::from_unit_vec(x));
    }
    return out;
}

} // namespace sbs
