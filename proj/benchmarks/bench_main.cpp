#include <benchmark/benchmark.h>

#include "sbs/foliation_tracer.hpp"
#include "sbs/prequantum.hpp"
#include "sbs/sphere_geometry.hpp"
#include "sbs/transport.hpp"
#include "sbs/variational_oracle.hpp"

namespace {

using namespace sbs;

void BM_enclosed_area(benchmark::State& state) {
    LoopSample loop = circle_loop(1.0, std::size_t(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(enclosed_area({loop, Side::left}, 2));
}
BENCHMARK(BM_enclosed_area)->Arg(64)->Arg(256)->Arg(1024);

void BM_parallel_transport(benchmark::State& state) {
    LoopSample loop = circle_loop(1.0, std::size_t(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(parallel_transport(2, loop, {1.0, 0.0}));
}
BENCHMARK(BM_parallel_transport)->Arg(64)->Arg(256);

void BM_alpha_trace(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {1, 0}, {0, 0}});
    LoopSample loop = circle_loop(1.0, 256);
    for (auto _ : state) benchmark::DoNotOptimize(alpha_trace(s, loop));
}
BENCHMARK(BM_alpha_trace);

void BM_g_zeros(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {-1, 0}, {1, 0}});
    for (auto _ : state) benchmark::DoNotOptimize(g_zeros(s));
}
BENCHMARK(BM_g_zeros)->Unit(benchmark::kMillisecond);

void BM_find_special_cycles(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {-1, 0}, {1, 0}});
    for (auto _ : state) benchmark::DoNotOptimize(find_special_cycles(s));
}
BENCHMARK(BM_find_special_cycles)->Unit(benchmark::kMillisecond);

void BM_speciality_energy(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {-1, 0}, {1, 0}});
    FourierLoop lp = circle_modes({0.4, 0.0}, 0.55);
    for (auto _ : state)
        benchmark::DoNotOptimize(speciality_energy(s, lp, {}, 512));
}
BENCHMARK(BM_speciality_energy);

void BM_speciality_gradient(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {-1, 0}, {1, 0}});
    FourierLoop lp = circle_modes({0.4, 0.0}, 0.55);
    for (auto _ : state)
        benchmark::DoNotOptimize(speciality_gradient(s, lp, {}, 512));
}
BENCHMARK(BM_speciality_gradient);

void BM_optimize_loop(benchmark::State& state) {
    PolynomialSection s(2, {{0, 0}, {1, 0}, {0, 0}});
    FourierLoop init = circle_modes({0.0, 0.0}, 1.3);
    for (auto _ : state) benchmark::DoNotOptimize(optimize_loop(s, init));
}
BENCHMARK(BM_optimize_loop)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
