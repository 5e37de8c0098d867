#include <benchmark/benchmark.h>

#include "skel/correlation.hpp"
#include "skel/example_family.hpp"
#include "skel/osc_norms.hpp"
#include "skel/parallel.hpp"
#include "skel/rng.hpp"
#include "skel/spectrum.hpp"
#include "skel/ulam.hpp"

using namespace skel;

namespace {

const PiecewiseSystem& full_system() {
  static const PiecewiseSystem sys = [] {
    const auto p = *find_preset("example-k2-full");
    return make_example_system(build_example(p.model.A, p.model.M, p.model.L, p.model.k, p.ell),
                               p.model);
  }();
  return sys;
}

void BM_ApplyT(benchmark::State& state) {
  const auto& sys = full_system();
  Rng rng = make_rng(1, Stream::probe);
  std::vector<Point> zs(1024);
  for (auto& z : zs) z = {uniform(rng, -0.9, 0.9), uniform(rng, -0.09, 0.09)};
  double out[2];
  std::size_t i = 0;
  for (auto _ : state) {
    sys.apply_T(zs[i++ & 1023], out);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ApplyT);

void BM_BuildUlam(benchmark::State& state) {
  set_thread_count(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ulam(full_system(), {n, n}, 100, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * 100));
}
BENCHMARK(BM_BuildUlam)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_InvariantDensity(benchmark::State& state) {
  const auto op = build_ulam(full_system(), {64, 64}, 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(invariant_density(op));
}
BENCHMARK(BM_InvariantDensity)->Unit(benchmark::kMillisecond);

void BM_LeadingSpectrum(benchmark::State& state) {
  const auto op = build_ulam(full_system(), {32, 32}, 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(leading_spectrum(op, 6));
}
BENCHMARK(BM_LeadingSpectrum)->Unit(benchmark::kMillisecond);

void BM_Seminorm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const OmegaSpec omega{2, 1.0, 0.5};
  Rng rng = make_rng(2, Stream::probe);
  GridFunction g(UniformGrid(omega.box(), n));
  for (auto& v : g.values) v = uniform(rng, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(norm_alpha_L(g, omega, 1.0, 0.05));
}
BENCHMARK(BM_Seminorm)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CovarianceCurve(benchmark::State& state) {
  set_thread_count(1);
  const auto& sys = full_system();
  const GridFunction h(UniformGrid(sys.omega(), 32), 1.0 / sys.omega().volume());
  const auto id = parse_observable("identity");
  CorrelationOptions opt;
  opt.n_max = 20;
  opt.ensemble = static_cast<std::size_t>(state.range(0));
  const BoxMap map = sys.as_box_map();
  for (auto _ : state) benchmark::DoNotOptimize(covariance_curve(map, id, id, h, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 21);
}
BENCHMARK(BM_CovarianceCurve)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
