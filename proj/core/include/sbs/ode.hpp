#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "sbs/errors.hpp"

namespace sbs {

// Adaptive Dormand-Prince 5(4) on a small fixed-size real state.
//
// The callers here integrate at tight tolerance over short parameter
// ranges (transport along a loop, separatrix arcs), so a header-only
// stepper with no allocation is the right weight.

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.1;
    std::size_t max_steps = 1000000;
};

// Process-wide transport tolerance, settable once from a RunConfig before
// any experiment runs. Not thread-synchronized by design.
inline double& default_integrator_rtol() {
    static double rtol = 1e-10;
    return rtol;
}

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
class DormandPrince {
public:
    using State = OdeState<N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    DormandPrince(Rhs rhs, OdeOptions opts = {}) : f_(std::move(rhs)), opts_(opts) {}

    // One attempted step from (t, y) with signed size h. On acceptance
    // returns true and fills y_out; h is replaced by the suggested next
    // size (same sign) either way.
    bool try_step(double t, const State& y, double& h, State& y_out) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        // the early axpy rows multiply later stages by zero, so the
        // stages must start as numbers, not stack garbage
        State k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{};
        f_(t, y, k1);

        axpy(tmp, y, h, {{1.0 / 5, 0, 0, 0, 0, 0}}, k1, k2, k3, k4, k5, k6);
        f_(t + c2 * h, tmp, k2);
        axpy(tmp, y, h, {{3.0 / 40, 9.0 / 40, 0, 0, 0, 0}}, k1, k2, k3, k4, k5, k6);
        f_(t + c3 * h, tmp, k3);
        axpy(tmp, y, h, {{44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0}}, k1, k2, k3, k4, k5, k6);
        f_(t + c4 * h, tmp, k4);
        axpy(tmp, y, h,
             {{19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0}}, k1, k2,
             k3, k4, k5, k6);
        f_(t + c5 * h, tmp, k5);
        axpy(tmp, y, h,
             {{9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0}},
             k1, k2, k3, k4, k5, k6);
        f_(t + h, tmp, k6);
        axpy(tmp, y, h,
             {{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}}, k1, k2,
             k3, k4, k5, k6);
        f_(t + h, tmp, k7);

        // 5th order solution is tmp; embedded 4th order error estimate
        static constexpr std::array<double, 7> e = {
            71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525,
            -1.0 / 40};

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double ei = h * (e[0] * k1[i] + e[2] * k3[i] + e[3] * k4[i] + e[4] * k5[i] +
                             e[5] * k6[i] + e[6] * k7[i]);
            double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(tmp[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / N);

        double factor = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
        factor = std::min(5.0, std::max(0.2, factor));
        bool accept = err <= 1.0;
        if (accept) y_out = tmp;
        double mag = std::min(opts_.h_max, std::max(opts_.h_min, std::abs(h) * factor));
        h = std::copysign(mag, h);
        return accept;
    }

    // Integrate y from t0 to t1, invoking observe(t, y) after each accepted
    // step (and once at t0). observe may be empty.
    State integrate(double t0, State y, double t1,
                    const std::function<void(double, const State&)>& observe = {}) const {
        if (observe) observe(t0, y);
        double t = t0;
        double dir = t1 >= t0 ? 1.0 : -1.0;
        double h = dir * std::min(opts_.h_init, opts_.h_max);
        std::size_t steps = 0;
        while (dir * (t1 - t) > 1e-15 * std::max(1.0, std::abs(t1))) {
            if (++steps > opts_.max_steps)
                throw numeric_error("ode integration exceeded the step limit");
            if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
            double h_used = h;
            State y_next;
            if (try_step(t, y, h, y_next)) {
                t += h_used;
                y = y_next;
                if (observe) observe(t, y);
            } else if (std::abs(h) <= opts_.h_min * 1.0000001) {
                throw numeric_error("ode step size underflow");
            }
        }
        return y;
    }

    const OdeOptions& options() const { return opts_; }

private:
    static void axpy(State& out, const State& y, double h, const std::array<double, 6>& a,
                     const State& k1, const State& k2, const State& k3, const State& k4,
                     const State& k5, const State& k6) {
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = y[i] + h * (a[0] * k1[i] + a[1] * k2[i] + a[2] * k3[i] + a[3] * k4[i] +
                                 a[4] * k5[i] + a[5] * k6[i]);
        }
    }

    Rhs f_;
    OdeOptions opts_;
};

} // namespace sbs
