#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "flowplan/experiment.hpp"
#include "flowplan/fem.hpp"
#include "flowplan/mesh.hpp"
#include "flowplan/policy_iter.hpp"

namespace {

using namespace flowplan;

/// n x n states on the 40 km gyre; A = 0.5, sigma = 1.
struct Problem {
  StateSpace states;
  std::shared_ptr<const MdpModel> model;

  explicit Problem(int n) : states(make_states(config(), n)), model(make_model(config(), make_field(config()), states)) {}

  static const ExperimentConfig& config() {
    static const ExperimentConfig c;
    return c;
  }
};

const Problem& problem(int n) {
  static std::map<int, std::unique_ptr<Problem>> cache;
  auto& p = cache[n];
  if (!p) p = std::make_unique<Problem>(n);
  return *p;
}

void BM_FemEvaluation(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  const Policy pi = goal_aimed_policy(*p.model);
  auto mesh = std::make_shared<const Mesh>(build_mesh(p.states, k));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_policy_fem(*p.model, pi, mesh, MomentConvention::Displacement));
  }
  state.counters["unknowns"] = mesh->num_nodes();
}
BENCHMARK(BM_FemEvaluation)->ArgsProduct({{20, 40}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_ExactEvaluation(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  const Policy pi = goal_aimed_policy(*p.model);
  for (auto _ : state) benchmark::DoNotOptimize(policy_evaluation_exact(*p.model, pi));
}
BENCHMARK(BM_ExactEvaluation)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_ClassicPolicyIteration(benchmark::State& state) {
  const Problem& p = problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classic_policy_iteration(*p.model));
}
BENCHMARK(BM_ClassicPolicyIteration)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ApproximatePolicyIteration(benchmark::State& state) {
  const Problem& p = problem(20);
  ApiConfig cfg;
  cfg.k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(approximate_policy_iteration(*p.model, cfg));
}
BENCHMARK(BM_ApproximatePolicyIteration)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
