#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "helm/bms.hpp"
#include "helm/prospector.hpp"

namespace helm::merit {

// deltaP / cost for one candidate question.
struct MeritRecord {
  std::string question;
  double delta_p = 0.0;
  double cost = 1.0;
  double merit = 0.0;
};

// One possible answer to a question: its predictive probability and the
// target quantity after hearing it.
struct AnswerOutcome {
  std::string answer;
  double probability = 0.0;
  double value = 0.0;
};

// Tracked quantity on the variable side: P(node = state).
struct VariableTarget {
  std::string node;
  std::string state;
};

double current_value(const bms::BeliefState& state, const VariableTarget& target);
double current_value(const prospector::State& state, const std::string& target);

// Simulates every answer on a clone. Answers with zero predictive
// probability are skipped. Throws kAlreadyAnswered, kUnknownNode,
// kUnknownState.
std::vector<AnswerOutcome> answer_outcomes(const bms::BeliefState& state,
                                           const std::string& question,
                                           const VariableTarget& target);
std::vector<AnswerOutcome> answer_outcomes(const prospector::State& state,
                                           const std::string& question,
                                           const std::string& target);

// Sum over answers of P(a) * |q_a - q_now|.
double expected_delta(const bms::BeliefState& state, const std::string& question,
                      const VariableTarget& target);
double expected_delta(const prospector::State& state, const std::string& question,
                      const std::string& target);

// Cost defaults to 1; the proposition side reads it from the node.
MeritRecord merit(const bms::BeliefState& state, const std::string& question,
                  const VariableTarget& target, double cost = 1.0);
MeritRecord merit(const prospector::State& state, const std::string& question,
                  const std::string& target);

// Records for every unanswered askable, descending merit, ties by id.
std::vector<MeritRecord> merit_table(const bms::BeliefState& state,
                                     const std::vector<std::string>& askables,
                                     const VariableTarget& target,
                                     const std::map<std::string, double>& costs = {});
std::vector<MeritRecord> merit_table(const prospector::State& state,
                                     const std::vector<std::string>& askables,
                                     const std::string& target);

struct SelectionOptions {
  bool stop_on_zero_merit = false;
};

// Highest merit, ties by ascending id; nullopt when nothing is left to ask.
std::optional<std::string> select(std::vector<MeritRecord> records,
                                  const SelectionOptions& options = {});

std::optional<std::string> next_question(const bms::BeliefState& state,
                                         const std::vector<std::string>& askables,
                                         const VariableTarget& target,
                                         const std::map<std::string, double>& costs = {},
                                         const SelectionOptions& options = {});
std::optional<std::string> next_question(const prospector::State& state,
                                         const std::vector<std::string>& askables,
                                         const std::string& target,
                                         const SelectionOptions& options = {});

// Sorts descending by merit with ascending-id tie-break.
void sort_records(std::vector<MeritRecord>& records);

}  // namespace helm::merit
