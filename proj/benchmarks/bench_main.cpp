#include <benchmark/benchmark.h>

#include <numeric>

#include "atagan/losses.hpp"
#include "atagan/models.hpp"
#include "atagan/ops.hpp"
#include "atagan/rng.hpp"
#include "atagan/scam.hpp"
#include "atagan/synth.hpp"
#include "atagan/train.hpp"

namespace atagan {
namespace {

Tensor random(Shape shape, std::uint64_t seed, bool grad = false) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  t.set_requires_grad(grad);
  return t;
}

const Dataset& bench_data() {
  static const Dataset data = [] {
    DatasetSpec spec;
    spec.n_train = 64;
    spec.n_val = 1;
    return generate_dataset(spec).train;
  }();
  return data;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random({n, n}, 1), b = random({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * std::int64_t(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

// Channels and spatial size of each layer of the discriminator stack.
void BM_Conv2dForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  const Tensor x = random({16, c, hw, hw}, 1);
  const Tensor k = random({2 * c, c, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, {2, 1, 0}));
}
BENCHMARK(BM_Conv2dForward)->Args({1, 64})->Args({16, 32})->Args({32, 16})->Unit(benchmark::kMicrosecond);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  Tensor x = random({16, c, hw, hw}, 1, true);
  Tensor k = random({2 * c, c, 3, 3}, 2, true);
  for (auto _ : state) {
    sum(conv2d(x, k, {2, 1, 0})).backward();
    x.zero_grad();
    k.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Args({1, 64})->Args({16, 32})->Args({32, 16})->Unit(benchmark::kMicrosecond);

void BM_ConvTransposeForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  const Tensor x = random({16, c, hw, hw}, 1);
  const Tensor k = random({c, c / 2, 4, 4}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_transpose(x, k, {2, 1, 1}));
}
BENCHMARK(BM_ConvTransposeForward)->Args({64, 8})->Args({32, 16})->Args({16, 32})->Unit(benchmark::kMicrosecond);

void BM_SoftCam(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Tensor fm = random({32, k, 4, 4}, 1);
  const Tensor w = random({k, 4}, 2);
  const Tensor logits = random({32, 4}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(soft_cam(fm, w, logits));
}
BENCHMARK(BM_SoftCam)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_AlignAndNormalize(benchmark::State& state) {
  const auto hw = static_cast<std::size_t>(state.range(0));
  const ScamMap map{random({32, 1, 4, 4}, 1)};
  for (auto _ : state) benchmark::DoNotOptimize(align_and_normalize(map, hw, hw));
}
BENCHMARK(BM_AlignAndNormalize)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ScamLossForwardBackward(benchmark::State& state) {
  const ScamMap teacher = align_and_normalize(ScamMap{random({32, 1, 4, 4}, 1)});
  Tensor raw = random({32, 1, 8, 8}, 2, true);
  for (auto _ : state) {
    const ScamMap disc = align_and_normalize(ScamMap{raw, ScamSource::discriminator});
    scam_loss(teacher, disc).backward();
    raw.zero_grad();
  }
}
BENCHMARK(BM_ScamLossForwardBackward)->Unit(benchmark::kMicrosecond);

void BM_TeacherForward(benchmark::State& state) {
  const TeacherParams p = TeacherParams::init(1);
  const Tensor x = random({32, 1, kImageSize, kImageSize}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(teacher_forward(p, x));
}
BENCHMARK(BM_TeacherForward)->Unit(benchmark::kMillisecond);

void BM_GanIteration(benchmark::State& state) {
  TrainConfig cfg;
  cfg.mode = state.range(0) ? RunMode::gan_ata : RunMode::gan_baseline;
  cfg.batch_size = static_cast<std::size_t>(state.range(1));
  std::optional<TeacherParams> teacher;
  if (state.range(0)) teacher = TeacherParams::init(3);
  GanTrainer trainer(cfg, bench_data(), teacher);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
  state.SetLabel(state.range(0) ? "ata" : "baseline");
}
BENCHMARK(BM_GanIteration)->Args({0, 16})->Args({1, 16})->Args({1, 32})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace atagan

BENCHMARK_MAIN();
