#include <benchmark/benchmark.h>

#include <random>

#include "lanegcn/model.hpp"
#include "lanegcn/ops.hpp"
#include "lanegcn/sparse.hpp"
#include "lanegcn/synth.hpp"
#include "lanegcn/tape.hpp"
#include "lanegcn/train.hpp"

using namespace lanegcn;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t = Tensor::zeros(std::move(shape));
  double* p = t.mutable_data();
  for (long i = 0; i < t.size(); ++i) p[i] = dist(rng);
  return t;
}

LaneGraph bench_graph(int lanes, int points) {
  std::vector<Lane> layout;
  for (int l = 0; l < lanes; ++l) {
    Lane lane;
    lane.id = "l" + std::to_string(l);
    for (int p = 0; p < points; ++p) {
      lane.centerline.push_back({2.0 * p, 3.5 * l});
    }
    if (l > 0) lane.right = "l" + std::to_string(l - 1);
    layout.push_back(lane);
  }
  return build_lane_graph(layout);
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const long n = state.range(0);
  std::mt19937_64 rng(1);
  Tensor a = random_tensor({n, n}, rng);
  Tensor b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b).data());
  }
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

static void BM_SparsePower(benchmark::State& state) {
  LaneGraph g = bench_graph(4, 40);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sparse_power(g.adj(AdjType::kSuc), state.range(0), true).nnz());
  }
}
BENCHMARK(BM_SparsePower)->Arg(4)->Arg(32);

static void BM_MultiScaleLaneConv(benchmark::State& state) {
  std::mt19937_64 rng(2);
  LaneGraph g = bench_graph(3, 40);
  const long c = state.range(0);
  Tensor x = random_tensor({g.num_nodes(), c}, rng);
  MultiScaleWeights w;
  w.w_self = random_tensor({c, c}, rng);
  w.w_left = random_tensor({c, c}, rng);
  w.w_right = random_tensor({c, c}, rng);
  w.dilations = {1, 2, 4, 8, 16, 32};
  for (int k : w.dilations) {
    g.dilated(AdjType::kPre, k);
    g.dilated(AdjType::kSuc, k);
    w.w_pre.push_back(random_tensor({c, c}, rng));
    w.w_suc.push_back(random_tensor({c, c}, rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(multiscale_laneconv(x, g, w).data());
  }
}
BENCHMARK(BM_MultiScaleLaneConv)->Arg(32)->Arg(128);

static void BM_ForwardPass(benchmark::State& state) {
  SynthSpec spec;
  spec.count = 4;
  spec.seed = 3;
  spec.topology = Topology::kFork;
  std::vector<Scenario> corpus = synth_corpus(spec);
  ModelConfig cfg = ModelConfig::reduced();
  ForecastModel model(cfg, 5);
  std::vector<CompiledScene> scenes;
  for (const Scenario& s : corpus) scenes.push_back(compile_scene(s, cfg));
  std::vector<const CompiledScene*> refs;
  for (const CompiledScene& s : scenes) refs.push_back(&s);
  SceneBatch batch = SceneBatch::pack(refs);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(batch).trajectories.data());
  }
}
BENCHMARK(BM_ForwardPass);

static void BM_TrainStep(benchmark::State& state) {
  SynthSpec spec;
  spec.count = 4;
  spec.seed = 3;
  spec.topology = Topology::kFork;
  std::vector<Scenario> corpus = synth_corpus(spec);
  ModelConfig cfg = ModelConfig::reduced();
  ForecastModel model(cfg, 5);
  std::vector<CompiledScene> scenes;
  for (const Scenario& s : corpus) scenes.push_back(compile_scene(s, cfg));
  std::vector<const CompiledScene*> refs;
  for (const CompiledScene& s : scenes) refs.push_back(&s);
  SceneBatch batch = SceneBatch::pack(refs);
  AdamOptimizer opt(model.params());
  for (auto _ : state) {
    model.params().zero_grad();
    Tape tape;
    LossBreakdown out;
    {
      Tape::Scope scope(tape);
      out = model.loss(batch);
    }
    backward(out.total, tape);
    opt.step(1e-3);
    benchmark::DoNotOptimize(out.total.at(0));
  }
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
