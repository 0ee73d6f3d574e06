#include <benchmark/benchmark.h>

#include <map>

#include "hetlink/dataset.hpp"
#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/metrics.hpp"
#include "hetlink/model.hpp"
#include "hetlink/synthetic.hpp"
#include "hetlink/trainer.hpp"

namespace {

using namespace hetlink;

// Planted task scaled by the benchmark argument (genes = diseases = n).
struct Fixture {
  SyntheticTask task;
  PropagationOperator op;
  FeatureMatrix x;

  explicit Fixture(std::size_t n) {
    PlantedConfig pc;
    pc.genes = n;
    pc.diseases = n;
    pc.gd_edges = 10 * n;
    task = make_planted_task(pc);
    op = build_operator(task.graph, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    x = align_features(task.graph, task.embeddings, AlignMode::Default, MissingPolicy::Error);
  }
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_BuildOperator(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_operator(f.task.graph, f.op.weights));
}
BENCHMARK(BM_BuildOperator)->Arg(200)->Arg(1000);

void BM_SparseMultiply(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  Matrix h(static_cast<Eigen::Index>(f.op.size()), 112);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(f.op.matrix.multiply(h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.op.matrix.nnz()) * 112);
}
BENCHMARK(BM_SparseMultiply)->Arg(200)->Arg(1000);

void BM_EncodeTraining(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const ModelParams p = init_params(7, ModelConfig{});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(encode(p, f.op, f.x.values, true, seed++));
}
BENCHMARK(BM_EncodeTraining)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const ModelParams p = init_params(7, ModelConfig{});
  const auto gd = f.task.graph.edges(Relation::GD);
  std::vector<NodePair> pairs;
  for (std::size_t k = 0; k < std::min<std::size_t>(512, gd.size()); ++k) pairs.push_back({gd[k].first, gd[k].second});
  ForwardTrace trace = encode(p, f.op, f.x.values, true, 3);
  decode_pairs(trace, pairs);
  const std::vector<double> upstream(pairs.size(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(backward(trace, upstream));
}
BENCHMARK(BM_Backward)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 2);
    scores[i] = rng.normal() + labels[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

void BM_SampleNegatives(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<LabeledPair> positives;
  for (const auto& [u, v] : f.task.graph.edges(Relation::GD)) positives.push_back({u, v, 1});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_negatives(f.task.graph, positives, SamplerConfig{}, seed++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(positives.size()));
}
BENCHMARK(BM_SampleNegatives)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
