#include <benchmark/benchmark.h>

#include <rbal/decision.hpp>
#include <rbal/rng.hpp>

namespace {

rbal::DecisionProcess make_process() {
  rbal::Vec ud(2);
  ud << 0.0, -30.0;
  rbal::Vec uy(4);
  uy << 10.0, 10.0, 5.0, -75.0;
  rbal::Mat t0(4, 4);
  t0 << 0.8, 0.18, 0.015, 0.005,
        0.0, 0.8, 0.15, 0.05,
        0.0, 0.0, 0.8, 0.2,
        0.0, 0.0, 0.0, 1.0;
  rbal::Mat t1(4, 4);
  t1 << 1.0, 0.0, 0.0, 0.0,
        0.99, 0.01, 0.0, 0.0,
        0.99, 0.0, 0.01, 0.0,
        0.99, 0.0, 0.0, 0.01;
  return rbal::DecisionProcess(ud, uy, {t0, t1}, 7.0);
}

void BM_Evpi(benchmark::State& state) {
  const rbal::DecisionProcess process = make_process();
  rbal::Rng rng(1);
  std::vector<rbal::ClassPosterior> posteriors;
  for (int i = 0; i < 1024; ++i) {
    rbal::ClassPosterior p;
    p.probs = rbal::Vec(4);
    for (int k = 0; k < 4; ++k) p.probs[k] = rng.gamma(1.0);
    p.probs /= p.probs.sum();
    posteriors.push_back(std::move(p));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::evpi(posteriors[i % 1024], process));
    ++i;
  }
}
BENCHMARK(BM_Evpi);

}  // namespace

BENCHMARK_MAIN();
