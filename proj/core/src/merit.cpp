#include "helm/merit.hpp"

#include <algorithm>
#include <cmath>

#include "helm/error.hpp"

namespace helm::merit {

namespace {

std::size_t target_state(const bms::BeliefState& state, const VariableTarget& target) {
  const std::size_t node = state.network().require(target.node);
  auto index = state.network().node(node).state_index(target.state);
  if (!index) {
    throw Error(ErrorCode::kUnknownState,
                "target '" + target.node + "' has no state '" + target.state + "'");
  }
  return *index;
}

double sum_abs_change(const std::vector<AnswerOutcome>& outcomes, double now) {
  double total = 0.0;
  for (const auto& outcome : outcomes) total += outcome.probability * std::abs(outcome.value - now);
  return total;
}

MeritRecord make_record(const std::string& question, double delta, double cost) {
  if (!(cost > 0.0)) throw Error(ErrorCode::kInvalidArgument, "question cost must be positive");
  return {question, delta, cost, delta / cost};
}

}  // namespace

void sort_records(std::vector<MeritRecord>& records) {
  std::sort(records.begin(), records.end(), [](const MeritRecord& a, const MeritRecord& b) {
    if (rank_key(a.merit) != rank_key(b.merit)) return a.merit > b.merit;
    return a.question < b.question;
  });
}

double current_value(const bms::BeliefState& state, const VariableTarget& target) {
  const std::size_t s = target_state(state, target);
  return state.belief(target.node)[s];
}

double current_value(const prospector::State& state, const std::string& target) {
  return state.probability(target);
}

std::vector<AnswerOutcome> answer_outcomes(const bms::BeliefState& state,
                                           const std::string& question,
                                           const VariableTarget& target) {
  const std::size_t q = state.network().require(question);
  const std::size_t t = target_state(state, target);
  if (state.has_evidence(q)) {
    throw Error(ErrorCode::kAlreadyAnswered, "'" + question + "' already has evidence");
  }
  const Distribution predictive = state.belief(q);
  const auto& answers = state.network().node(q).states;
  std::vector<AnswerOutcome> out;
  for (std::size_t a = 0; a < answers.size(); ++a) {
    if (predictive[a] <= 0.0) continue;
    bms::BeliefState clone = state;
    clone.post_evidence(Evidence::hard(question, answers[a]));
    clone.propagate_to_equilibrium();
    out.push_back({answers[a], predictive[a], clone.belief(target.node)[t]});
  }
  return out;
}

std::vector<AnswerOutcome> answer_outcomes(const prospector::State& state,
                                           const std::string& question,
                                           const std::string& target) {
  state.network().require(target);
  if (state.observed(question)) {
    throw Error(ErrorCode::kAlreadyAnswered, "'" + question + "' already has evidence");
  }
  const auto& answers = state.network().node(state.network().require(question)).answers;
  const double yes = state.probability(question);
  std::vector<AnswerOutcome> out;
  for (int a = 0; a < 2; ++a) {
    prospector::State clone = state;
    clone.post_graded_evidence(question, a == 0 ? 1.0 : 0.0);
    clone.propagate();
    out.push_back({answers[a], a == 0 ? yes : 1.0 - yes, clone.probability(target)});
  }
  return out;
}

double expected_delta(const bms::BeliefState& state, const std::string& question,
                      const VariableTarget& target) {
  return sum_abs_change(answer_outcomes(state, question, target), current_value(state, target));
}

double expected_delta(const prospector::State& state, const std::string& question,
                      const std::string& target) {
  return sum_abs_change(answer_outcomes(state, question, target), current_value(state, target));
}

MeritRecord merit(const bms::BeliefState& state, const std::string& question,
                  const VariableTarget& target, double cost) {
  return make_record(question, expected_delta(state, question, target), cost);
}

MeritRecord merit(const prospector::State& state, const std::string& question,
                  const std::string& target) {
  const double cost = state.network().node(state.network().require(question)).cost;
  return make_record(question, expected_delta(state, question, target), cost);
}

std::vector<MeritRecord> merit_table(const bms::BeliefState& state,
                                     const std::vector<std::string>& askables,
                                     const VariableTarget& target,
                                     const std::map<std::string, double>& costs) {
  std::vector<MeritRecord> records;
  for (const auto& question : askables) {
    if (state.has_evidence(state.network().require(question))) continue;
    auto cost = costs.find(question);
    records.push_back(merit(state, question, target, cost == costs.end() ? 1.0 : cost->second));
  }
  sort_records(records);
  return records;
}

std::vector<MeritRecord> merit_table(const prospector::State& state,
                                     const std::vector<std::string>& askables,
                                     const std::string& target) {
  std::vector<MeritRecord> records;
  for (const auto& question : askables) {
    if (state.observed(question)) continue;
    records.push_back(merit(state, question, target));
  }
  sort_records(records);
  return records;
}

std::optional<std::string> select(std::vector<MeritRecord> records,
                                  const SelectionOptions& options) {
  if (records.empty()) return std::nullopt;
  sort_records(records);
  if (options.stop_on_zero_merit && records.front().merit <= 0.0) return std::nullopt;
  return records.front().question;
}

std::optional<std::string> next_question(const bms::BeliefState& state,
                                         const std::vector<std::string>& askables,
                                         const VariableTarget& target,
                                         const std::map<std::string, double>& costs,
                                         const SelectionOptions& options) {
  return select(merit_table(state, askables, target, costs), options);
}

std::optional<std::string> next_question(const prospector::State& state,
                                         const std::vector<std::string>& askables,
                                         const std::string& target,
                                         const SelectionOptions& options) {
  return select(merit_table(state, askables, target), options);
}

}  // namespace helm::merit
