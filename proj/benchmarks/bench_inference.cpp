#include <benchmark/benchmark.h>

#include "helm/compiler.hpp"
#include "helm/harness.hpp"
#include "helm/merit.hpp"
#include "helm/oracle.hpp"
#include "helm/prospector.hpp"
#include "helm/serialize.hpp"

using namespace helm;

namespace {

FeatureModel stern() {
  return load_feature_model(read_file(std::string(HELM_SOURCE_DIR) + "/models/stern-plan-view.json"));
}

// Propagation cost of 8 leaf observations on a 24-node tree, per policy.
void BM_Propagate(benchmark::State& st) {
  const auto policy = static_cast<bms::SchedulerPolicy>(st.range(0));
  const auto net = harness::random_polytree(24, 3, 7);
  const auto initial = bms::BeliefState::init_equilibrium(net);
  const auto leaves = harness::leaves(net);
  std::vector<Evidence> evidence;
  for (std::size_t i = 0; i < leaves.size() && evidence.size() < 8; ++i) {
    const auto& node = net.node(leaves[i]);
    evidence.push_back(Evidence::hard(node.id, node.states[i % node.states.size()]));
  }
  std::size_t activations = 0;
  for (auto _ : st) {
    auto state = initial;
    for (const auto& e : evidence) state.post_evidence(e);
    activations = state.propagate_to_equilibrium(policy);
    benchmark::DoNotOptimize(state.belief(0));
  }
  st.counters["activations"] = static_cast<double>(activations);
  st.SetLabel(std::string(bms::policy_name(policy)));
}
BENCHMARK(BM_Propagate)
    ->Arg(static_cast<int>(bms::SchedulerPolicy::kLifo))
    ->Arg(static_cast<int>(bms::SchedulerPolicy::kFifo))
    ->Arg(static_cast<int>(bms::SchedulerPolicy::kFifoDedup));

void BM_InitEquilibrium(benchmark::State& st) {
  const auto net = harness::random_polytree(static_cast<std::size_t>(st.range(0)), 3, 11);
  for (auto _ : st) benchmark::DoNotOptimize(bms::BeliefState::init_equilibrium(net));
}
BENCHMARK(BM_InitEquilibrium)->Arg(12)->Arg(48)->Arg(192);

void BM_ExactPosterior(benchmark::State& st) {
  const auto net = harness::random_polytree(static_cast<std::size_t>(st.range(0)), 3, 5);
  for (auto _ : st) benchmark::DoNotOptimize(exact_posterior(net, {}));
}
BENCHMARK(BM_ExactPosterior)->Arg(6)->Arg(10);

void BM_SternMeritTable(benchmark::State& st) {
  const auto net = compiler::compile_bms(stern());
  const auto state = bms::BeliefState::init_equilibrium(net);
  const std::vector<std::string> questions{"stern.square", "stern.round", "stern.tapered"};
  for (auto _ : st) benchmark::DoNotOptimize(merit::merit_table(state, questions, {"class", "Bainbridge"}));
}
BENCHMARK(BM_SternMeritTable);

void BM_ProspectorPropagate(benchmark::State& st) {
  const auto model = std::make_shared<const prospector::Model>(compiler::compile_prospector(stern()));
  const prospector::State initial(model);
  for (auto _ : st) {
    auto state = initial;
    state.post_graded_evidence("stern.round", 0.8);
    state.post_graded_evidence("stern.square", 0.1);
    state.propagate();
    benchmark::DoNotOptimize(state.probability("Belknap"));
  }
}
BENCHMARK(BM_ProspectorPropagate);

}  // namespace

BENCHMARK_MAIN();
