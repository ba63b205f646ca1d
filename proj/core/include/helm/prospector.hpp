#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "helm/network.hpp"

namespace helm::prospector {

// Probabilities entering odds arithmetic are kept inside [kEpsilon, 1 - kEpsilon].
inline constexpr double kEpsilon = 1e-9;
// A consequent whose probability moves less than this is not re-propagated.
inline constexpr double kChangeThreshold = 1e-12;

double clamp_probability(double p);

// Piecewise-linear posterior of a consequent through the anchors
// (0 -> lambda2), (pE -> prior), (1 -> lambda1), evaluated at pObs.
// Throws Error(kInvalidLink) when pE is not strictly inside (0,1).
double interpolate_posterior(double prior, double pE, double lambda1, double lambda2,
                             double pObs);

// Odds-product combination: O = O(prior) * prod O(c_i) / O(prior).
double combine_evidence(double prior, const std::vector<double>& contributions);

struct RankedClass {
  std::string id;
  double probability = 0.0;
};

// Descending probability, ties by ascending id.
std::vector<RankedClass> rank(std::vector<RankedClass> classes);

// Network plus derived topology shared by every state built on it.
class Model {
 public:
  // Validates, then clamps lambdas into [kEpsilon, 1 - kEpsilon].
  explicit Model(PropositionNetwork network);

  const PropositionNetwork& network() const { return network_; }
  const std::vector<std::size_t>& order() const { return order_; }
  double lambda1(std::size_t link) const { return lambda1_[link]; }
  double lambda2(std::size_t link) const { return lambda2_[link]; }

 private:
  PropositionNetwork network_;
  std::vector<std::size_t> order_;
  std::vector<double> lambda1_;
  std::vector<double> lambda2_;
};

// Current probabilities of one consultation. Copying a state is a cheap
// snapshot; the model is shared and immutable.
class State {
 public:
  explicit State(std::shared_ptr<const Model> model);

  const Model& model() const { return *model_; }
  const PropositionNetwork& network() const { return model_->network(); }

  // Sets an askable node's probability (replacing earlier evidence) and marks
  // it dirty. Throws kUnknownNode, kNotAskable, kInvalidEvidence.
  void post_graded_evidence(const std::string& node, double pObs);
  // Answer by name: answers[0] -> 1, answers[1] -> 0.
  void post_answer(const std::string& node, const std::string& answer);
  // Likelihood (yes, no) turned into pObs through the node's prior.
  void post_likelihood(const std::string& node, const std::vector<double>& likelihood);
  void post(const Evidence& evidence);

  // Recomputes consequents of dirty nodes in topological order.
  void propagate();

  double probability(const std::string& node) const;
  double probability(std::size_t index) const { return probability_[index]; }
  // Posterior the link alone would assign to its consequent.
  double contribution(std::size_t link) const { return contribution_[link]; }
  bool observed(const std::string& node) const;
  bool has_pending() const;

  std::vector<RankedClass> rank_classes() const;
  std::map<std::string, double> snapshot() const;

  // Node recomputations since construction.
  std::size_t visits() const { return visits_; }
  std::size_t visits(std::size_t index) const { return node_visits_[index]; }

 private:
  std::size_t askable_index(const std::string& node) const;

  std::shared_ptr<const Model> model_;
  std::vector<double> probability_;
  std::vector<double> contribution_;
  std::vector<bool> observed_;
  std::vector<bool> dirty_;
  std::vector<std::size_t> node_visits_;
  std::size_t visits_ = 0;
};

}  // namespace helm::prospector
