#include "sbs/su2.hpp"

#include <cmath>

namespace sbs {

SU2::SU2(cplx a_, cplx b_) : a(a_), b(b_) {
    double n = std::sqrt(std::norm(a) + std::norm(b));
    if (n < 1e-12) throw input_error("degenerate SU(2) element");
    a /= n;
    b /= n;
}

SU2 SU2::operator*(const SU2& o) const {
    return SU2(a * o.a - b * std::conj(o.b), a * o.b + b * std::conj(o.a));
}

SpherePoint SU2::apply(const SpherePoint& p) const {
    // act on homogeneous pairs to stay finite at chart poles
    cplx num, den;
    if (p.chart == Chart::Z) {
        num = a * p.coord + b;
        den = -std::conj(b) * p.coord + std::conj(a);
    } else {
        num = a + b * p.coord;
        den = -std::conj(b) + std::conj(a) * p.coord;
    }
    if (std::abs(num) <= kChartSwitchRadius * std::abs(den))
        return SpherePoint(Chart::Z, num / den);
    return SpherePoint(Chart::W, den / num);
}

LoopSample SU2::apply(const LoopSample& loop) const {
    LoopSample out;
    out.orientation = loop.orientation;
    out.points.reserve(loop.size());
    for (const auto& p : loop.points) out.points.push_back(apply(p));
    return out;
}

SU2 SU2::vertical_rotation(double phi) {
    return SU2(std::polar(1.0, 0.5 * phi), cplx(0.0, 0.0));
}

namespace {

// unit quaternion (q0, qx, qy, qz) to the SU(2) element whose apply() is the
// right-handed rotation by 2*acos(q0) about (qx, qy, qz)
SU2 from_quaternion(double q0, double qx, double qy, double qz) {
    return SU2(cplx(q0, qz), cplx(-qy, qx));
}

} // namespace

SU2 SU2::rotation_taking(const Vec3& from, const Vec3& to) {
    Vec3 f = from.normalized();
    Vec3 t = to.normalized();
    double d = f.dot(t);
    if (d < -1.0 + 1e-12) {
        // antipodal pair: rotate by pi about any perpendicular axis
        Vec3 seed = std::abs(f.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        Vec3 axis = f.cross(seed).normalized();
        return from_quaternion(0.0, axis.x, axis.y, axis.z);
    }
    Vec3 c = f.cross(t);
    double q0 = 1.0 + d;
    double n = std::sqrt(q0 * q0 + c.dot(c));
    return from_quaternion(q0 / n, c.x / n, c.y / n, c.z / n);
}

SU2 SU2::haar_random(Rng& rng) {
    double q0, qx, qy, qz, n;
    do {
        q0 = rng.gaussian();
        qx = rng.gaussian();
        qy = rng.gaussian();
        qz = rng.gaussian();
        n = std::sqrt(q0 * q0 + qx * qx + qy * qy + qz * qz);
    } while (n < 1e-6);
    return from_quaternion(q0 / n, qx / n, qy / n, qz / n);
}

} // namespace sbs
