#include <benchmark/benchmark.h>

#include "ltm/calibration.hpp"
#include "ltm/laser.hpp"
#include "ltm/odmr.hpp"
#include "ltm/sensitivity.hpp"

namespace {

ltm::Execution mode(const benchmark::State& state) {
  return state.range(0) ? ltm::Execution::parallel : ltm::Execution::serial;
}

void BM_PowerSweep(benchmark::State& state) {
  ltm::ModelParams p;
  p.nv.detuning = 0.0;
  const auto grid = ltm::uniform_grid(0.0, 2.5, 101);
  for (auto _ : state)
    benchmark::DoNotOptimize(ltm::sweep_pump(p, ltm::PumpAxis::mecsel_pump, grid, mode(state)));
}
BENCHMARK(BM_PowerSweep)->Arg(0)->Arg(1)->ArgName("parallel");

void BM_OdmrSynthesis(benchmark::State& state) {
  ltm::ModelParams p;
  p.mecsel.pump_rate = 20e6;
  const auto grid = ltm::uniform_grid(2.80e9, 2.94e9, 401);
  const std::vector<ltm::OdmrLine> lines{{2.84e9, 0.25}, {2.86e9, 0.25}, {2.88e9, 0.25},
                                         {2.90e9, 0.25}};
  for (auto _ : state)
    benchmark::DoNotOptimize(ltm::synthesize_odmr(p, grid, lines, mode(state)));
}
BENCHMARK(BM_OdmrSynthesis)->Arg(0)->Arg(1)->ArgName("parallel");

void BM_PsnlCurve(benchmark::State& state) {
  ltm::LorentzianFit fit;
  fit.baseline = 8e16;
  fit.resonances = {{-5e6, 7e6, 0.97}, {6e6, 5e6, 0.4}};
  const auto grid = ltm::uniform_grid(-30e6, 30e6, 100001);
  for (auto _ : state) benchmark::DoNotOptimize(ltm::psnl_curve(fit, grid, {}, mode(state)));
}
BENCHMARK(BM_PsnlCurve)->Arg(0)->Arg(1)->ArgName("parallel");

void BM_CalibrationResiduals(benchmark::State& state) {
  ltm::ModelParams p;
  const auto data = ltm::sweep_mecsel_pump(p, ltm::uniform_grid(0.0, 2.5, 101));
  for (auto _ : state)
    benchmark::DoNotOptimize(ltm::calibration_residuals(data, p, mode(state)));
}
BENCHMARK(BM_CalibrationResiduals)->Arg(0)->Arg(1)->ArgName("parallel");

}  // namespace

BENCHMARK_MAIN();
