// Lindblad right-hand side: OpenMP banded kernel vs. the serial dense reference.

#include "spincat/lindblad.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

using namespace spincat;

namespace {

Mat random_density(int d) {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    Mat a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {g(rng), g(rng)};
    const Mat rho = a * a.adjoint();
    return rho / rho.trace();
}

LindbladModel model_for(int spin) {
    const auto s = SpinLength::from_value(spin);
    return LindbladModel(s, bias_rates(10.0), Mat(op_collective(s, Component::z).mat * 0.3));
}

void BM_banded(benchmark::State& state) {
    const LindbladModel m = model_for(static_cast<int>(state.range(0)));
    const Mat rho = random_density(m.spin.dim());
    const int threads = static_cast<int>(state.range(1));
    const int saved = omp_get_max_threads();
    if (threads > 0) omp_set_num_threads(threads);
    for (auto _ : state) benchmark::DoNotOptimize(lindblad_rhs(m, rho));
    omp_set_num_threads(saved);
    state.counters["threads"] = threads > 0 ? threads : saved;
}

void BM_reference(benchmark::State& state) {
    const LindbladModel m = model_for(static_cast<int>(state.range(0)));
    const Mat rho = random_density(m.spin.dim());
    for (auto _ : state) benchmark::DoNotOptimize(lindblad_rhs_reference(m, rho));
}

}  // namespace

// Second argument: OpenMP threads (1 = serial run of the same kernel, 0 = runtime default).
BENCHMARK(BM_banded)->ArgsProduct({{30, 60, 120, 210}, {1, 0}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_reference)->Arg(30)->Arg(60)->Arg(120)->Arg(210)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
