#include "doctest.h"
#include "support.hpp"

#include <algorithm>

#include "helm/error.hpp"
#include "helm/harness.hpp"
#include "helm/merit.hpp"
#include "helm/oracle.hpp"

using namespace helm;
using namespace helm::merit;

namespace {

// Independent recomputation: enumerate answers with the exact oracle.
double brute_delta(const VariableNetwork& net, const std::vector<Evidence>& evidence,
                   const std::string& question, const VariableTarget& target) {
  const auto now = exact_posterior(net, evidence);
  const auto& node = net.node(net.require(target.node));
  const std::size_t t = *node.state_index(target.state);
  const double q_now = now.at(target.node)[t];
  const auto& answers = net.node(net.require(question)).states;
  double total = 0.0;
  for (std::size_t a = 0; a < answers.size(); ++a) {
    const double p = now.at(question)[a];
    if (p <= 0.0) continue;
    auto with = evidence;
    with.push_back(Evidence::hard(question, answers[a]));
    total += p * std::abs(exact_posterior(net, with).at(target.node)[t] - q_now);
  }
  return total;
}

}  // namespace

TEST_SUITE("merit") {

TEST_CASE("chain example") {
  const auto state = bms::BeliefState::init_equilibrium(testing::chain_ab());
  const VariableTarget target{"A", "a1"};
  const double expected = 0.62 * std::abs(0.54 / 0.62 - 0.6) + 0.38 * std::abs(0.06 / 0.38 - 0.6);
  CHECK(expected == doctest::Approx(0.336));
  CHECK(expected_delta(state, "B", target) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected_delta(state, "B", target) ==
        doctest::Approx(brute_delta(testing::chain_ab(), {}, "B", target)).epsilon(1e-12));

  const auto one = merit::merit(state, "B", target);
  CHECK(one.merit == doctest::Approx(0.336));
  CHECK(one.cost == 1.0);
  const auto two = merit::merit(state, "B", target, 2.0);
  CHECK(two.merit == doctest::Approx(0.168));
  CHECK(two.merit == two.delta_p / 2.0);
}

TEST_CASE("uninformative questions have zero merit") {
  SUBCASE("identical rows") {
    const VariableNetwork net({
        {"A", "", {"a1", "a2"}, {}, {0.6, 0.4}, {}},
        {"B", "", {"b1", "b2"}, {"A"}, {}, {{0.3, 0.7}, {0.3, 0.7}}},
    });
    const auto state = bms::BeliefState::init_equilibrium(net);
    CHECK(expected_delta(state, "B", {"A", "a1"}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(merit::merit(state, "B", {"A", "a1"}, 5.0).merit == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("no path to the target") {
    const VariableNetwork net({
        {"A", "", {"a1", "a2"}, {}, {0.6, 0.4}, {}},
        {"B", "", {"b1", "b2"}, {"A"}, {}, {{0.9, 0.1}, {0.2, 0.8}}},
        {"Q", "", {"q1", "q2"}, {}, {0.5, 0.5}, {}},
    });
    const auto state = bms::BeliefState::init_equilibrium(net);
    CHECK(expected_delta(state, "Q", {"A", "a1"}) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("answered questions are refused") {
  auto state = bms::BeliefState::init_equilibrium(testing::chain_ab());
  state.post_evidence(Evidence::hard("B", "b1"));
  state.propagate_to_equilibrium();
  try {
    expected_delta(state, "B", {"A", "a1"});
    FAIL("expected already-answered");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAlreadyAnswered);
  }
  const auto table = merit_table(state, {"B"}, {"A", "a1"});
  CHECK(table.empty());
}

TEST_CASE("selection") {
  std::vector<MeritRecord> records{{"q2", 0.1, 1, 0.1}, {"q1", 0.3, 1, 0.3}};
  CHECK(select(records) == "q1");
  records = {{"b", 0.2, 1, 0.2}, {"a", 0.2, 1, 0.2}};
  CHECK(select(records) == "a");
  CHECK_FALSE(select({}).has_value());
  records = {{"a", 0.0, 1, 0.0}};
  CHECK(select(records) == "a");
  CHECK_FALSE(select(records, {true}).has_value());
}

TEST_CASE("stern: first question is the brute-force argmax") {
  const auto net = compiler::compile_bms(testing::stern_model());
  const auto state = bms::BeliefState::init_equilibrium(net);
  const std::string leader = state.rank_states("class").front().state;
  CHECK(leader == "Bainbridge");  // uniform tie, smallest id
  const VariableTarget target{"class", leader};
  std::vector<std::string> askables{"stern.square", "stern.round", "stern.tapered"};

  std::string best;
  double best_value = -1.0;
  for (const auto& q : askables) {
    const double brute = brute_delta(net, {}, q, target);
    CHECK(expected_delta(state, q, target) == doctest::Approx(brute).epsilon(1e-12));
    if (brute > best_value + 1e-12 || (std::abs(brute - best_value) <= 1e-12 && q < best)) {
      best = q;
      best_value = brute;
    }
  }
  CHECK(next_question(state, askables, target) == best);
  std::reverse(askables.begin(), askables.end());
  CHECK(next_question(state, askables, target) == best);

  // Scaling every cost leaves the choice alone.
  std::map<std::string, double> costs{{"stern.square", 3.0}, {"stern.round", 3.0}, {"stern.tapered", 3.0}};
  CHECK(next_question(state, askables, target, costs) == best);
  const auto table = merit_table(state, askables, target, costs);
  for (const auto& r : table) CHECK(r.merit == doctest::Approx(r.delta_p / 3.0));
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i - 1].merit >= table[i].merit);
}

TEST_CASE("martingale on random polytrees") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto net = harness::random_polytree(7, 3, seed, harness::Orientation::kMixed);
    const auto state = bms::BeliefState::init_equilibrium(net);
    const VariableTarget target{net.node(0).id, net.node(0).states[0]};
    const double q_now = current_value(state, target);
    for (std::size_t q = 1; q < net.size(); ++q) {
      double signed_sum = 0.0;
      for (const auto& o : answer_outcomes(state, net.node(q).id, target)) {
        signed_sum += o.probability * (o.value - q_now);
      }
      CHECK(std::abs(signed_sum) < 1e-9);
    }
  }
}

TEST_CASE("proposition merit uses the node probability as P(yes)") {
  const auto model =
      std::make_shared<const prospector::Model>(compiler::compile_prospector(testing::stern_model()));
  prospector::State state(model);
  const double q_now = state.probability("Sverdlov");
  const double p_yes = state.probability("stern.tapered");
  auto yes = state;
  yes.post_graded_evidence("stern.tapered", 1.0);
  yes.propagate();
  auto no = state;
  no.post_graded_evidence("stern.tapered", 0.0);
  no.propagate();
  const double expected = p_yes * std::abs(yes.probability("Sverdlov") - q_now) +
                          (1 - p_yes) * std::abs(no.probability("Sverdlov") - q_now);
  CHECK(expected_delta(state, "stern.tapered", "Sverdlov") == doctest::Approx(expected).epsilon(1e-12));
  const auto record = merit::merit(state, "stern.tapered", "Sverdlov");
  CHECK(record.cost == 1.0);
  CHECK(record.merit == record.delta_p);

  const auto outcomes = answer_outcomes(state, "stern.tapered", "Sverdlov");
  REQUIRE(outcomes.size() == 2);
  CHECK(outcomes[0].answer == "detected");
  CHECK(outcomes[0].probability == doctest::Approx(0.1));
}

}  // TEST_SUITE
