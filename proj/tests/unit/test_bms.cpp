#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <set>

#include "helm/error.hpp"
#include "helm/harness.hpp"
#include "helm/oracle.hpp"

using namespace helm;
using namespace helm::bms;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

// Root R with children X and Y; Y has a child Z.
VariableNetwork forked() {
  return VariableNetwork({
      {"R", "", {"r1", "r2"}, {}, {0.3, 0.7}, {}},
      {"X", "", {"x1", "x2"}, {"R"}, {}, {{0.9, 0.1}, {0.4, 0.6}}},
      {"Y", "", {"y1", "y2"}, {"R"}, {}, {{0.2, 0.8}, {0.7, 0.3}}},
      {"Z", "", {"z1", "z2"}, {"Y"}, {}, {{0.5, 0.5}, {0.1, 0.9}}},
  });
}

}  // namespace

TEST_SUITE("bms") {

TEST_CASE("initial equilibrium is the prior marginal") {
  const auto state = BeliefState::init_equilibrium(testing::chain_ab());
  CHECK(state.belief("A") == std::vector<double>{0.6, 0.4});
  CHECK(state.belief("B")[0] == doctest::Approx(0.62));
  CHECK(state.belief("B")[1] == doctest::Approx(0.38));
  CHECK(state.update_count() == 0);
  CHECK(state.at_equilibrium());
}

TEST_CASE("isolated node") {
  const auto state =
      BeliefState::init_equilibrium(VariableNetwork({{"S", "", {"a", "b", "c"}, {}, {0.2, 0.3, 0.5}, {}}}));
  CHECK(state.belief("S") == std::vector<double>{0.2, 0.3, 0.5});
  CHECK(state.model().edges().empty());
}

TEST_CASE("posting evidence only activates") {
  auto state = BeliefState::init_equilibrium(testing::chain_ab());
  state.post_evidence(Evidence::hard("B", "b1"));
  CHECK(state.pending() == std::vector<std::size_t>{1});
  CHECK(code_of([&] { state.belief("A"); }) == ErrorCode::kStaleRead);
  CHECK(state.belief("A", true) == std::vector<double>{0.6, 0.4});
  state.propagate_to_equilibrium();
  CHECK(state.belief("A")[0] == doctest::Approx(0.54 / 0.62).epsilon(1e-12));
  CHECK(state.belief("A")[1] == doctest::Approx(0.129032).epsilon(1e-6));
  CHECK(state.belief("B") == std::vector<double>{1.0, 0.0});
}

TEST_CASE("virtual evidence") {
  SUBCASE("uninformative") {
    auto state = BeliefState::init_equilibrium(testing::chain_ab());
    state.post_evidence(Evidence::likelihood("B", {1.0, 1.0}));
    state.propagate_to_equilibrium();
    CHECK(state.belief("A")[0] == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("proportional to P(b1|a) on A's child") {
    // Likelihood (0.9, 0.2) on A equals observing b1.
    auto state = BeliefState::init_equilibrium(testing::chain_ab());
    state.post_evidence(Evidence::likelihood("A", {0.9, 0.2}));
    state.propagate_to_equilibrium();
    CHECK(state.belief("A")[0] == doctest::Approx(0.870968).epsilon(1e-6));
  }
  SUBCASE("on B matches the oracle") {
    auto state = BeliefState::init_equilibrium(testing::chain_ab());
    state.post_evidence(Evidence::likelihood("B", {0.9, 0.2}));
    state.propagate_to_equilibrium();
    const auto exact = exact_posterior(testing::chain_ab(), {Evidence::likelihood("B", {0.9, 0.2})});
    CHECK(testing::max_abs_diff(state.belief("A"), exact.at("A")) < 1e-12);
  }
}

TEST_CASE("contradicting hard evidence is rejected") {
  auto state = BeliefState::init_equilibrium(testing::chain_ab());
  state.post_evidence(Evidence::hard("B", "b1"));
  CHECK(code_of([&] { state.post_evidence(Evidence::hard("B", "b2")); }) ==
        ErrorCode::kInconsistentEvidence);
  CHECK(code_of([&] { state.post_evidence(Evidence::hard("Q", "b2")); }) == ErrorCode::kUnknownNode);
  CHECK(code_of([&] { state.post_evidence(Evidence::hard("B", "b7")); }) == ErrorCode::kUnknownState);
  CHECK(code_of([&] { state.post_evidence(Evidence::likelihood("B", {-1.0, 2.0})); }) ==
        ErrorCode::kInvalidEvidence);
}

TEST_CASE("loopy networks are refused") {
  const VariableNetwork diamond({
      {"A", "", {"t", "f"}, {}, {0.5, 0.5}, {}},
      {"B", "", {"t", "f"}, {"A"}, {}, {{0.5, 0.5}, {0.5, 0.5}}},
      {"C", "", {"t", "f"}, {"A"}, {}, {{0.5, 0.5}, {0.5, 0.5}}},
      {"D", "", {"t", "f"}, {"B", "C"}, {}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}},
  });
  CHECK(code_of([&] { BeliefState::init_equilibrium(diamond); }) == ErrorCode::kValidation);
}

TEST_CASE("chain of three: one activation per node for every policy") {
  for (SchedulerPolicy policy : kAllPolicies) {
    auto state = BeliefState::init_equilibrium(testing::chain_abc());
    state.post_evidence(Evidence::hard("C", "c1"));
    CHECK(state.propagate_to_equilibrium(policy) == 3);
    CHECK(state.update_count() == 3);
    const auto exact = exact_posterior(testing::chain_abc(), {Evidence::hard("C", "c1")});
    CHECK(testing::max_abs_diff(state.belief("A"), exact.at("A")) < 1e-12);
  }
}

TEST_CASE("activation reports changed neighbours") {
  auto state = BeliefState::init_equilibrium(testing::chain_abc());
  CHECK(state.activate(1).empty());
  state.post_evidence(Evidence::hard("C", "c1"));
  CHECK(state.activate(2) == std::vector<std::size_t>{1});
  CHECK(state.activate(2).empty());
  // Every call counts, including the no-op ones.
  CHECK(state.update_count() == 3);
}

TEST_CASE("message from one child changes only the sibling's pi-message") {
  auto state = BeliefState::init_equilibrium(forked());
  const auto& model = state.model();
  state.post_evidence(Evidence::hard("Z", "z1"));
  const std::size_t z = 3, y = 2, r = 0, x = 1;
  CHECK(state.activate(z) == std::vector<std::size_t>{y});
  CHECK(state.activate(y) == std::vector<std::size_t>{r});
  // R received a new lambda-message from Y: only X's inbound pi-message moves.
  const std::size_t to_y = model.child_edges(r)[1];
  const auto before_y = state.pi_message(to_y);
  CHECK(state.activate(r) == std::vector<std::size_t>{x});
  CHECK(state.pi_message(to_y) == before_y);
  state.activate(x);
  state.propagate_to_equilibrium();  // drains Z's original activation
  const auto exact = exact_posterior(forked(), {Evidence::hard("Z", "z1")});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(testing::max_abs_diff(state.belief(i), exact.at(forked().node(i).id)) < 1e-12);
  }
}

TEST_CASE("no evidence means no activations") {
  auto state = BeliefState::init_equilibrium(forked());
  CHECK(state.propagate_to_equilibrium() == 0);
}

TEST_CASE("agenda policies") {
  Agenda lifo(SchedulerPolicy::kLifo), fifo(SchedulerPolicy::kFifo), dedup(SchedulerPolicy::kFifoDedup);
  for (std::size_t n : {1, 2, 3, 1}) {
    lifo.push(n);
    fifo.push(n);
    dedup.push(n);
  }
  CHECK(lifo.pop() == 1);
  CHECK(lifo.pop() == 3);
  CHECK(fifo.pop() == 1);
  CHECK(fifo.size() == 3);
  CHECK(std::vector<std::size_t>(dedup.items().begin(), dedup.items().end()) ==
        std::vector<std::size_t>{2, 3, 1});
}

TEST_CASE("policy names") {
  CHECK(policy_name(SchedulerPolicy::kFifoDedup) == "fifo-dedup");
  CHECK(parse_policy("stack") == SchedulerPolicy::kLifo);
  CHECK(parse_policy("fifo") == SchedulerPolicy::kFifo);
  CHECK(code_of([] { parse_policy("random"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("activation cap raises non-convergence and keeps the agenda") {
  auto state = BeliefState::init_equilibrium(testing::chain_abc());
  state.post_evidence(Evidence::hard("C", "c1"));
  CHECK(code_of([&] { state.propagate_to_equilibrium(SchedulerPolicy::kFifo, 1e-9, 1); }) ==
        ErrorCode::kNonConvergence);
  CHECK_FALSE(state.at_equilibrium());
}

TEST_CASE("multi-parent nodes match the oracle") {
  const VariableNetwork collider({
      {"U", "", {"u1", "u2"}, {}, {0.3, 0.7}, {}},
      {"V", "", {"v1", "v2", "v3"}, {}, {0.2, 0.5, 0.3}, {}},
      {"W", "", {"w1", "w2"}, {"U", "V"}, {},
       {{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}, {0.6, 0.4}, {0.3, 0.7}, {0.05, 0.95}}},
      {"K", "", {"k1", "k2"}, {"W"}, {}, {{0.7, 0.3}, {0.1, 0.9}}},
  });
  const std::vector<Evidence> evidence{Evidence::hard("K", "k2"), Evidence::likelihood("U", {0.4, 1.0})};
  auto state = BeliefState::init_equilibrium(collider);
  for (const auto& e : evidence) state.post_evidence(e);
  state.propagate_to_equilibrium();
  const auto exact = exact_posterior(collider, evidence);
  for (std::size_t i = 0; i < collider.size(); ++i) {
    CHECK(testing::max_abs_diff(state.belief(i), exact.at(collider.node(i).id)) < 1e-10);
  }
}

TEST_CASE("graded evidence matches the oracle") {
  auto state = BeliefState::init_equilibrium(testing::chain_abc());
  state.post_evidence(Evidence::graded("C", 0.8));
  state.propagate_to_equilibrium();
  CHECK(state.belief("C")[0] == doctest::Approx(0.8).epsilon(1e-12));
  const auto exact = exact_posterior(testing::chain_abc(), {Evidence::graded("C", 0.8)});
  CHECK(testing::max_abs_diff(state.belief("A"), exact.at("A")) < 1e-12);
}

TEST_CASE("ranking of states") {
  auto state = BeliefState::init_equilibrium(compiler::compile_bms(testing::stern_model()));
  state.post_evidence(Evidence::hard("stern.tapered", "detected"));
  state.propagate_to_equilibrium();
  const auto ranking = state.rank_states("class");
  CHECK(ranking.front().state == "Sverdlov");
  CHECK(ranking.front().probability == doctest::Approx(1.0));
  for (std::size_t i = 2; i < ranking.size(); ++i) CHECK(ranking[i - 1].state < ranking[i].state);
}

TEST_CASE("csv row") {
  RunRecord record{SchedulerPolicy::kFifoDedup, 24, 23, 8, 71, 12};
  CHECK(to_csv_row(record) == "fifo-dedup,24,23,8,71,12");
  CHECK(kRunRecordHeader == "policy,nodes,links,evidence,activations,micros");
}

}  // TEST_SUITE
