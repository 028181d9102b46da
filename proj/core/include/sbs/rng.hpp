#ifndef SBS_RNG_HPP
#define SBS_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace sbs {

// Deterministic generator with hand-rolled output maps so that streams are
// reproducible across standard library implementations.  Scans derive one
// stream per record from (seed, record index), which keeps results identical
// no matter how work is scheduled.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    static Rng for_record(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix(seed + 0x632be59bd9b4e019ull * (index + 1)));
    }

    std::uint64_t next_u64() {
        // xorshift64* keeps the implementation self-contained
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        // Box-Muller, one value per call (the spare is discarded to keep
        // streams easy to reason about)
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    std::complex<double> gaussian_complex() {
        double re = gaussian();
        double im = gaussian();
        return {re, im};
    }

    // uniform point on the unit two-sphere
    std::array<double, 3> sphere_point() {
        double c = 1.0 - 2.0 * uniform();
        double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        double phi = 6.283185307179586476925287 * uniform();
        return {s * std::cos(phi), s * std::sin(phi), c};
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return (x ^ (x >> 31)) | 1ull;
    }

    std::uint64_t state_;
};

} // namespace sbs

#endif
