#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sbs/prequantum.hpp"
#include "sbs/sphere_geometry.hpp"

namespace sbs {

// Tracer-free search for special cycles: minimize a speciality energy over
// Fourier-parametrized loops. Serves as the independent cross-check for
// every cycle the tracer claims (and for every emptiness claim).

struct FourierLoop {
    int max_mode = 12;
    std::vector<cplx> modes;  // modes[i] is the coefficient of e^{2 pi i k t},
                              // k = i - max_mode; size 2*max_mode + 1

    FourierLoop() : modes(25, cplx(0.0, 0.0)) {}
    explicit FourierLoop(int k_max)
        : max_mode(k_max), modes(2 * std::size_t(k_max) + 1, cplx(0.0, 0.0)) {}

    cplx& coeff(int k) { return modes[std::size_t(k + max_mode)]; }
    cplx coeff(int k) const { return modes[std::size_t(k + max_mode)]; }

    cplx value(double t) const;
    cplx velocity(double t) const;

    // sampled loop in the sphere model, positive orientation
    LoopSample sample(std::size_t n) const;
};

FourierLoop circle_modes(cplx center, double radius, int max_mode = 12);

struct SpecialityWeights {
    double tangency = 1.0;
    double closure = 10.0;
};

struct EnergyBreakdown {
    double total = 0.0;
    double tangency_term = 0.0;  // mean of Im(g(z) z')^2
    double closure_term = 0.0;   // closure weight times squared holonomy defect
    bool barrier = false;        // loop entered the zero zone or left the chart
};

EnergyBreakdown speciality_energy_detailed(const PolynomialSection& s,
                                           const FourierLoop& loop,
                                           const SpecialityWeights& weights = {},
                                           std::size_t samples = 512);

double speciality_energy(const PolynomialSection& s, const FourierLoop& loop,
                         const SpecialityWeights& weights = {},
                         std::size_t samples = 512);

// analytic gradient with respect to (Re c_k, Im c_k), ordered by mode index
std::vector<double> speciality_gradient(const PolynomialSection& s,
                                        const FourierLoop& loop,
                                        const SpecialityWeights& weights = {},
                                        std::size_t samples = 512);

struct OptimizeOptions {
    SpecialityWeights weights;
    double gtol = 1e-11;
    int max_iter = 800;
    std::size_t samples = 512;
    bool keep_history = false;
};

struct OptimizeResult {
    FourierLoop loop;
    double energy = 0.0;
    double grad_norm = 0.0;  // max-norm at the final iterate
    int iterations = 0;
    bool barrier_flagged = false;
    std::vector<std::array<double, 3>> history;  // iteration, energy, grad norm
};

// BFGS descent with backtracking line search; deterministic for a fixed
// init. The barrier flag marks runs that ended against the zero zone.
OptimizeResult optimize_loop(const PolynomialSection& s, const FourierLoop& init,
                             const OptimizeOptions& opts = {});

// Multistart search in a rotated chart whose equator separates the zeros.
// Returns deduplicated loops with energy below the success threshold,
// mapped back to the input frame.
std::vector<LoopSample> oracle_find_special(const PolynomialSection& s, int n_starts,
                                            std::uint64_t seed);

} // namespace sbs
