#ifndef SBS_SU2_HPP
#define SBS_SU2_HPP

#include "sbs/rng.hpp"
#include "sbs/sphere_geometry.hpp"

namespace sbs {

// Element of SU(2) acting on the sphere by the Moebius map
//   z -> (a z + b) / (-conj(b) z + conj(a)),   |a|^2 + |b|^2 = 1.
// Rotations about the vertical axis are z -> e^{i phi} z with
// a = e^{i phi / 2}, b = 0.
struct SU2 {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};

    SU2() = default;
    SU2(cplx a_, cplx b_);

    SU2 inverse() const { return SU2(std::conj(a), -b); }
    SU2 operator*(const SU2& o) const;

    SpherePoint apply(const SpherePoint& p) const;
    LoopSample apply(const LoopSample& loop) const;

    static SU2 identity() { return SU2(); }

    // rotation about the z axis by angle phi
    static SU2 vertical_rotation(double phi);

    // some rotation mapping the direction `from` to `to`; deterministic
    static SU2 rotation_taking(const Vec3& from, const Vec3& to);

    static SU2 haar_random(Rng& rng);
};

} // namespace sbs

#endif
