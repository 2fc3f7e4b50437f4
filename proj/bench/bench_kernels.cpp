// Serial reference vs OpenMP kernels on a 2048x2048 plane.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rawnight/kernels.hpp"

namespace {

constexpr std::size_t kSide = 2048;

const std::vector<double>& plane() {
    static const std::vector<double> data = [] {
        std::mt19937_64 gen(7);
        std::uniform_real_distribution<double> u(0.0, 4000.0);
        std::vector<double> v(kSide * kSide);
        for (auto& x : v) x = u(gen);
        return v;
    }();
    return data;
}

template <auto Kernel>
void thin_gaussian(benchmark::State& state) {
    std::vector<double> out(plane().size());
    for (auto _ : state) {
        Kernel(plane(), 0.05, 12.0, 99, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <auto Kernel>
void thin_binomial(benchmark::State& state) {
    std::vector<double> out(plane().size());
    for (auto _ : state) {
        Kernel(plane(), 0.05, 12.0, 99, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <auto Kernel>
void electrons_to_dn(benchmark::State& state) {
    std::vector<std::uint16_t> out(plane().size());
    for (auto _ : state) {
        Kernel(plane(), 2.0, 512.0, 16383, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <auto Kernel>
void box_sum(benchmark::State& state) {
    const rawnight::PixelRect rect{16, 16, kSide - 16, kSide - 16};
    for (auto _ : state) {
        benchmark::DoNotOptimize(Kernel(plane(), kSide, rect));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rect.count()));
}

namespace k = rawnight::kernels;

BENCHMARK(thin_gaussian<k::serial::thin_gaussian>)->Name("thin_gaussian/serial")->UseRealTime();
BENCHMARK(thin_gaussian<k::omp::thin_gaussian>)->Name("thin_gaussian/omp")->UseRealTime();
BENCHMARK(thin_binomial<k::serial::thin_binomial>)->Name("thin_binomial/serial")->UseRealTime();
BENCHMARK(thin_binomial<k::omp::thin_binomial>)->Name("thin_binomial/omp")->UseRealTime();
BENCHMARK(electrons_to_dn<k::serial::electrons_to_dn>)->Name("electrons_to_dn/serial")->UseRealTime();
BENCHMARK(electrons_to_dn<k::omp::electrons_to_dn>)->Name("electrons_to_dn/omp")->UseRealTime();
BENCHMARK(box_sum<k::serial::box_sum>)->Name("box_sum/serial")->UseRealTime();
BENCHMARK(box_sum<k::omp::box_sum>)->Name("box_sum/omp")->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
