#include <benchmark/benchmark.h>

#include "qjm/ars.hpp"
#include "qjm/joint.hpp"
#include "qjm/simulate.hpp"

using namespace qjm;

namespace {

struct Fixture {
  DesignBundle d;
  ModelSpec spec;
  ChainState state;
  ErrorModel err;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    RngStream r(1);
    const SimulatedData sim = simulate(default_scenario(), r);
    x.spec.mode = FitMode::QuantileJoint;
    x.spec.tau_levels = {0.5};
    x.d = build_designs(sim.data, x.spec);
    x.err = error_model_for(x.spec.mode, 0.5);
    x.state = initial_state(x.d, x.spec, x.err);
    x.state.longitudinal.gamma = sim.truth.gamma;
    return x;
  }();
  return f;
}

void BM_CumulativeHazard(benchmark::State& st) {
  const HazardGrid g{{0.0, 1.0, 2.5, 4.0, 6.0, 10.0}, {0.1, 0.2, 0.15, 0.3, 0.1}};
  double e = 0.3;
  for (auto _ : st) {
    benchmark::DoNotOptimize(cumulative_hazard(e, 9.1, g, -0.5, {0.4, 0.1}, 0.2));
    e = e < 5.0 ? e + 1e-3 : 0.3;
  }
}
BENCHMARK(BM_CumulativeHazard);

void BM_ArsNormal(benchmark::State& st) {
  LogConcaveTarget t;
  t.log_density = [](double x) { return -0.5 * x * x; };
  t.derivative = [](double x) { return -x; };
  const std::vector<double> init{-1.0, 1.0};
  RngStream r(2);
  for (auto _ : st) benchmark::DoNotOptimize(ars_sample(t, init, r));
}
BENCHMARK(BM_ArsNormal);

void BM_UpdateWeights(benchmark::State& st) {
  const Fixture& f = fixture();
  const Eigen::VectorXd res = location_residuals(f.d, f.state.longitudinal);
  RngStream r(3);
  for (auto _ : st) benchmark::DoNotOptimize(update_weights(f.state.longitudinal, res, f.err, r));
  st.SetItemsProcessed(st.iterations() * res.size());
}
BENCHMARK(BM_UpdateWeights);

void BM_UpdateSharedEffects(benchmark::State& st) {
  const Fixture& f = fixture();
  RngStream r(4);
  for (auto _ : st) benchmark::DoNotOptimize(update_shared_effects(f.state, f.d, f.err, r));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.d.n()));
}
BENCHMARK(BM_UpdateSharedEffects)->Unit(benchmark::kMillisecond);

void BM_UpdateAlpha(benchmark::State& st) {
  const Fixture& f = fixture();
  RngStream r(5);
  for (auto _ : st) benchmark::DoNotOptimize(update_alpha(f.state, f.d, f.spec.priors, r));
}
BENCHMARK(BM_UpdateAlpha)->Unit(benchmark::kMillisecond);

void BM_ChainIterations(benchmark::State& st) {
  const Fixture& f = fixture();
  ModelSpec spec = f.spec;
  spec.mcmc.chain_length = st.range(0);
  spec.mcmc.burn_in = 0;
  spec.mcmc.thin = 1;
  for (auto _ : st) {
    RngStream r(6);
    benchmark::DoNotOptimize(run_chain(f.d, spec, 0.5, r));
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ChainIterations)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
