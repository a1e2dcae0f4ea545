#include <benchmark/benchmark.h>

#include <rbal/mrvm.hpp>
#include <rbal/rng.hpp>

namespace {

rbal::LabelledSet make_labelled(int per_class) {
  rbal::Rng rng(7);
  rbal::LabelledSet out;
  out.num_classes = 4;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < per_class; ++i) {
      rbal::Vec x(2);
      x << 4.0 * c + 0.5 * rng.normal(), 4.0 * c + 0.5 * rng.normal();
      out.add(x, c + 1);
    }
  }
  return out;
}

void BM_TrainMrvm1(benchmark::State& state) {
  const rbal::LabelledSet labelled = make_labelled(static_cast<int>(state.range(0)));
  const rbal::KernelConfig kernel = rbal::KernelConfig::gaussian_default(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::train_mrvm1(labelled, kernel, rbal::TrainHyper{}));
  }
}
BENCHMARK(BM_TrainMrvm1)->Arg(4)->Arg(16);

void BM_TrainMrvm2(benchmark::State& state) {
  const rbal::LabelledSet labelled = make_labelled(static_cast<int>(state.range(0)));
  const rbal::KernelConfig kernel = rbal::KernelConfig::gaussian_default(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::train_mrvm2(labelled, kernel, rbal::TrainHyper{}));
  }
}
BENCHMARK(BM_TrainMrvm2)->Arg(4)->Arg(16);

void BM_MrvmPredict(benchmark::State& state) {
  const rbal::LabelledSet labelled = make_labelled(8);
  const rbal::MrvmModel model =
      rbal::train_mrvm2(labelled, rbal::KernelConfig::gaussian_default(2), rbal::TrainHyper{});
  rbal::Vec x(2);
  x << 6.1, 5.8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rbal::mrvm_predict(model, x));
  }
}
BENCHMARK(BM_MrvmPredict);

}  // namespace
