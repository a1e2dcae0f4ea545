#include <benchmark/benchmark.h>

#include <rbal/gmm.hpp>
#include <rbal/rng.hpp>

namespace {

rbal::LabelledSet make_labelled(int per_class) {
  rbal::Rng rng(3);
  rbal::LabelledSet out;
  out.num_classes = 4;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per_class; ++i) {
      rbal::Vec x(2);
      x << 3.0 * c + rng.normal(), 3.0 * c + rng.normal();
      out.add(x, c + 1);
    }
  }
  return out;
}

void BM_GmmFit(benchmark::State& state) {
  const rbal::LabelledSet labelled = make_labelled(static_cast<int>(state.range(0)));
  const rbal::NiwPrior prior = rbal::NiwPrior::default_for(2);
  const rbal::Vec alpha = rbal::Vec::Ones(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::fit_supervised(labelled, prior, alpha));
  }
}
BENCHMARK(BM_GmmFit)->Arg(16)->Arg(128)->Arg(1024);

void BM_GmmPredict(benchmark::State& state) {
  const rbal::LabelledSet labelled = make_labelled(64);
  const rbal::GmmPosterior posterior =
      rbal::fit_supervised(labelled, rbal::NiwPrior::default_for(2), rbal::Vec::Ones(4));
  rbal::Vec x(2);
  x << 4.5, 4.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::predict_posterior(x, posterior));
  }
}
BENCHMARK(BM_GmmPredict);

}  // namespace
