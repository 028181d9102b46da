#ifndef SBS_SPHERE_GEOMETRY_HPP
#define SBS_SPHERE_GEOMETRY_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sbs/errors.hpp"

namespace sbs {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643;
inline constexpr double kTwoPi = 2.0 * kPi;

// Charts on the sphere.  Z is the affine coordinate z, W the coordinate
// w = 1/z around the opposite pole.  Stored coordinates are kept inside
// |coord| <= 1.5; the two discs overlap in the annulus 2/3 <= |z| <= 3/2.
enum class Chart { Z, W };

inline constexpr double kChartSwitchRadius = 1.5;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const;
};

// Point on the sphere held in whichever chart keeps the coordinate small.
struct SpherePoint {
    Chart chart = Chart::Z;
    cplx coord{0.0, 0.0};

    SpherePoint() = default;
    SpherePoint(Chart c, cplx v);

    Vec3 unit_vec() const;
    static SpherePoint from_unit_vec(const Vec3& v);

    // coordinate of this point in the requested chart; throws if the point
    // is the pole of that chart
    cplx in_chart(Chart c) const;

    bool near_pole_of(Chart c, double tol = 1e-14) const;
};

SpherePoint chart_transition(const SpherePoint& p);

double chordal_distance(const SpherePoint& a, const SpherePoint& b);
inline double chordal_distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

enum class Orientation { positive, negative };

// Closed sampled loop.  The traversal order is the sample order for
// positive orientation and the reverse for negative orientation.
struct LoopSample {
    std::vector<SpherePoint> points;
    Orientation orientation = Orientation::positive;

    std::size_t size() const { return points.size(); }

    // samples in traversal order as unit vectors
    std::vector<Vec3> traversal_vecs() const;

    LoopSample reversed() const;
};

enum class Side { left, right };

struct Region {
    LoopSample boundary;
    Side side = Side::left;
};

// Periodic cubic spline through the samples of a loop, built in ambient
// R^3 with chord-length knots and projected back to the sphere pointwise.
// All geometric operations evaluate loops through this interpolant.
class SmoothLoop {
public:
    explicit SmoothLoop(const LoopSample& loop);
    explicit SmoothLoop(const std::vector<Vec3>& pts);

    std::size_t segments() const { return n_; }

    Vec3 position(double t) const;  // unit vector, t in [0,1)
    Vec3 velocity(double t) const;  // derivative of the normalized position

    // chart coordinate and velocity at parameter t; the chart is chosen by
    // the |coord| <= 1.5 rule unless one is forced
    struct ChartState {
        Chart chart;
        cplx coord;
        cplx vel;
    };
    ChartState chart_state(double t) const;
    ChartState chart_state(double t, Chart forced) const;

    double knot(std::size_t i) const { return knots_[i]; }
    double chord_length() const { return chord_length_; }

private:
    Vec3 raw(double t) const;
    Vec3 raw_derivative(double t) const;

    std::size_t n_ = 0;
    std::vector<double> knots_;              // n+1 values, knots_[0]=0, knots_[n]=1
    std::vector<Vec3> pts_;                  // n values
    std::vector<Vec3> second_derivs_;        // n values, periodic
    double chord_length_ = 0.0;
};

// Signed area of the region of the sphere on the given side of the loop,
// in units where the total area of the sphere is the bundle degree d.
// Computed as the boundary line integral of the area primitive in chart Z
// with the exact chart correction on arcs that live in chart W.
double enclosed_area(const Region& region, int degree);

// Line integral of the area primitive along the traversal (left side raw
// value before reduction into [0, d)).  Exposed for diagnostics.
double area_primitive_integral(const SmoothLoop& loop, int degree);

// Redistribute n samples uniformly by chordal arc length along the loop.
LoopSample resample_loop(const LoopSample& loop, std::size_t n);

// True when no two non-adjacent chords of the loop intersect on the sphere
// and consecutive samples are distinct.
bool loop_is_embedded(const LoopSample& loop);

// Which side of the (traversed) loop the point lies on.
Side side_of_point(const LoopSample& loop, const SpherePoint& q);

// Symmetric point-to-polyline Hausdorff distance between two loops in the
// chordal metric.  Parametrization independent.
double loop_hausdorff(const LoopSample& a, const LoopSample& b);

// Sample builders used across the tools and tests.
LoopSample circle_loop(double radius, std::size_t n, cplx center = {0.0, 0.0},
                       Orientation orient = Orientation::positive);

// great circle cut out by the plane through the origin with unit normal
// axis; traversed right-handedly around axis
LoopSample great_circle_loop(const Vec3& axis, std::size_t n,
                             Orientation orient = Orientation::positive);

} // namespace sbs

#endif
