#include <benchmark/benchmark.h>

#include "biasaudit/baselines.hpp"
#include "biasaudit/datamodel.hpp"
#include "biasaudit/learners.hpp"
#include "biasaudit/mdba.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/simulate.hpp"

namespace {

using namespace biasaudit;

struct Fixture {
  std::vector<Instance> instances;
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<int> y;

  explicit Fixture(std::size_t rows) {
    auto made = make_synthetic_dataset(rows, 42);
    instances = std::move(made.first);
    feature_names = std::move(made.second);
    x = feature_matrix(instances);
    y = label_vector(instances);
  }
};

void BM_FitLogistic(benchmark::State& state) {
  Fixture fx(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    LogisticModel model = fit_logistic(fx.x, fx.y);
    benchmark::DoNotOptimize(model.bias());
  }
}
BENCHMARK(BM_FitLogistic)->Arg(500)->Arg(2000);

void BM_FitBoostedTrees(benchmark::State& state) {
  Fixture fx(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    BoostedTreesModel model = fit_boosted_trees(fx.x, fx.y);
    benchmark::DoNotOptimize(model.trees().size());
  }
}
BENCHMARK(BM_FitBoostedTrees)->Arg(500)->Arg(2000);

void BM_GroupConfusion(benchmark::State& state) {
  Fixture fx(static_cast<std::size_t>(state.range(0)));
  std::vector<int> preds = fx.y;
  std::vector<Group> groups = group_vector(fx.instances);
  for (auto _ : state) {
    GroupConfusion confusion = group_confusion(preds, fx.y, groups);
    benchmark::DoNotOptimize(confusion.cells(Group::a).tp);
  }
}
BENCHMARK(BM_GroupConfusion)->Arg(2000)->Arg(20000);

void BM_EstimateBias(benchmark::State& state) {
  auto made = make_synthetic_dataset(2500, 42);
  ScenarioSpec scenario;
  scenario.num_humans = 4;
  scenario.seed = 9;
  SimulatedWorld world =
      build_world(made.first, made.second, "synthetic", scenario, 200, 150);
  MdbaConfig config;
  for (auto _ : state) {
    auto estimates = estimate_bias(world.humans, world.gold_pool, config);
    benchmark::DoNotOptimize(estimates.front().gap);
  }
}
BENCHMARK(BM_EstimateBias);

}  // namespace

BENCHMARK_MAIN();
